"""
Counting quasimorphisms on the free group
=========================================

Evaluate h_w on a few words, watch a detour beat the geodesic once the
weight is large, and compare the homogenization with the exact stable value.
"""

from relqm.freeword import parse, ball
from relqm.countqm import (QmSpec, c_value, h_value, count_copies, oracle_c,
                           defect_scan, homogenize, stable_value)

# the classic pattern ab, weight 1
spec = QmSpec.of("ab")
for text in ["ab", "abab", "abAB", "aabb", "BA"]:
    g = parse(text)
    print(f"h_ab({text}) = {h_value(spec, g)}")

# with W = 1 the value is just the copy count along the geodesic
g = parse("ababbab")
print("copies of ab in", g.text, "=", count_copies(g, "ab"), "c =", c_value(spec, g))

# heavier weight: the walk abAB.b reads one full copy of abAB, so it is
# cheaper than the geodesic abA even though it is longer
heavy = QmSpec.of("abAB", W=3)
g = parse("abA")
print("geodesic copies:", count_copies(g, "abAB"))
print("exact c:", c_value(heavy, g), "brute force:", oracle_c(heavy, g, slack=6))

# defect over a ball; the measured value sits far below the proven bound
rep = defect_scan(spec, radius=4)
print("defect on ball(4):", rep.empirical_defect, "bound:", rep.paper_bound)

# homogenization converges to the stable value
for text in ["ab", "abAB", "aabAB"]:
    g = parse(text)
    est = homogenize(spec, g, n=64)
    print(f"{text}: estimate {est.value} +/- {est.error_bound}, exact {stable_value(spec, g)}")

# the ball is small enough to tabulate every value
values = [h_value(spec, x) for x in ball(3)]
print("range of h_ab on ball(3):", min(values), max(values))
