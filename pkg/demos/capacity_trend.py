"""Boxed 2-capacity of the unit ball in R^3 as the box grows.

The grid spacing is held at h = 1/4 while the half-width L doubles, so the
only thing changing is the box.  The radial condenser value 4 pi L/(L - 1)
is printed next to it for orientation; the box [-L, L]^3 sits between the
balls of radius L and L sqrt(3).
"""
import math

from maxsobolev.capacity import CapacityProblem, estimate_p_capacity, radial_capacity_oracle

h = 0.25
print(f"{'L':>4} {'m':>4} {'grid':>9} {'ball L':>9} {'ball L√3':>9}")
for L in (2.0, 4.0, 8.0):
    m = int(round(2 * L / h)) + 1
    energy, rep = estimate_p_capacity(CapacityProblem.ball(3, 2.0, 1.0, L, m), levels=2)
    inner = radial_capacity_oracle(3, 2.0, 1.0, L)
    outer = radial_capacity_oracle(3, 2.0, 1.0, L * math.sqrt(3))
    print(f"{L:4.0f} {m:4d} {energy:9.3f} {inner:9.3f} {outer:9.3f}")
print(f"whole-space value 4 pi = {4 * math.pi:.3f}")
