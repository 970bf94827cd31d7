"""
Projection complex of an axis family
====================================

Translates of one axis, their projections, intervals, and the bottleneck
constant of a small ball in the complex.
"""

from relqm.freeword import parse, axis_of
from relqm.projcx import (ProjFamily, ProjConfig, check_axioms, d_U, interval,
                          pk_ball, bottleneck_constant)
import networkx as nx

base = axis_of(parse("bab"))
F = ProjFamily.from_ball(base, radius=3)
print("family size:", len(F))

rep = check_axioms(F)
print(rep)

# measured kappa plus room for the order to be strict
cfg = ProjConfig(kappa=1, K=5)

# the first pair with a non-empty interval
for V in F.members[:20]:
    hit = None
    for W in F.members:
        if V == W:
            continue
        iv = interval(V, W, F, cfg)
        if iv.members:
            hit = (W, iv)
            break
    if hit:
        W, iv = hit
        print("interval from", V.label(), "to", W.label())
        for U in iv.chain:
            print("   ", U.label(), "d_U =", d_U(U, V, W) if U not in (V, W) else "-")
        break

pk = pk_ball(base, hops=3, F=F, cfg=cfg)
delta, witness = bottleneck_constant(pk.graph)
print("P_K ball:", pk.graph.number_of_nodes(), "vertices, bottleneck", delta)

# sanity: cycles are far from trees
for n in (8, 16):
    print(f"C{n} bottleneck:", bottleneck_constant(nx.cycle_graph(n))[0])
