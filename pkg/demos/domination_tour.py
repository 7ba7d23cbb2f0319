"""Pointwise domination of S_mu u by M u + I|grad u| across the catalog.

Prints the largest node ratio for every catalog function against every
catalog measure, at two resolutions, and the spread of the trace ratio
rho / M.  Both stay bounded and settle under refinement.
"""
from maxsobolev import grid as G
from maxsobolev.grid import AnalyticFunction
from maxsobolev.measures import make_measure
from maxsobolev.operators import ScaleLadder
from maxsobolev.verify import SUITE, domination_ratio, meyers_ziemer_ratio

L = 3.0
for tag in sorted(SUITE):
    for label in ("sphere", "ball", "cube-boundary"):
        mu = make_measure(label, 2)
        ratios, rhos = [], []
        for m in (65, 129):
            u = G.enforce_zero_boundary(G.sample(AnalyticFunction(tag), 2, L, m))
            ratios.append(domination_ratio(u, mu, ScaleLadder(0.125, L / (2 * mu.R)))["max_ratio"])
            rhos.append(meyers_ziemer_ratio(u, mu)["rho_over_M"])
        print(f"{tag:24s} {label:14s} S/T {ratios[0]:.4f} -> {ratios[1]:.4f}"
              f"   rho/M {rhos[0]:.4f} -> {rhos[1]:.4f}")
