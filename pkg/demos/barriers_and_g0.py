"""
Barriers and the element g0
===========================

Find the shortest word that no element of a subgroup can carry as a
barrier, then check the projection bound it buys.
"""

from relqm.freeword import parse
from relqm.stallings import build, index_and_gauge
from relqm.barrier import (BarrierParams, has_barrier, find_g0, extend_to_contracting,
                           bounded_projection_scan, FiniteIndexError)

# <a> has infinite index, so something is left to certify
H = build([parse("a")])
print("index of <a>:", index_and_gauge(H).index)

cert = find_g0([H])
print("g0 =", cert.g0.text, "exact for all of H:", cert.exact_all_H)

# at epsilon = 0 a barrier is just a factor of the geodesic
for text in ["abba", "aaab", "bAB"]:
    print(text, "has a b-barrier:", has_barrier(parse(text), cert.g0, BarrierParams(0)))

# pad g0 into a contracting element and scan projections of H onto its axis
g = extend_to_contracting(cert.g0)
scan = bounded_projection_scan(g, [H], radius=4)
print("contracting element:", g.text)
print(scan)

# a finite-index subgroup has nothing to certify
try:
    find_g0([build([parse("a"), parse("b")])])
except FiniteIndexError as exc:
    print("refused:", exc)
