"""Exhaustive stability levels on enumerable patches.

The 2^24-state sweep on (4,5), N = 1 pins the global-minimum switch at
h1* = 2 exactly and the barrier Phi(+1,-1) - H(+1) = 7/2 at h = 19/10.
"""
from fractions import Fraction

from hypising import landscape, lattice

g0 = lattice.build(4, 5, 0)
for h in (Fraction(1), Fraction(2), Fraction(5, 2)):
    rep = landscape.exhaustive_landscape(g0, h)
    gm = rep.gamma_max.as_tuple() if rep.gamma_max else None
    print(f"(4,5,N=0) h={h}: Gamma_max={gm} X^m={rep.x_m} X^s={rep.x_s}")

print("\n(4,5,N=1): 2^24 states; this takes a few seconds...")
g = lattice.build(4, 5, 1)
plus = (1 << 24) - 1
for h in (Fraction(19, 10), Fraction(2), Fraction(21, 10)):
    mins, e = landscape.global_minima(g, h)
    names = {0: "all-minus", plus: "all-plus"}
    print(f"h={h}: argmin = {[names.get(m, m) for m in mins]}  energy {e.as_tuple()}")

h = Fraction(19, 10)
rep = landscape.exhaustive_landscape(g, h, requests=[(plus, 0)])
phi = rep.phi[(plus, 0)]
print(f"\nh={h}: Phi(+1,-1) level {phi['level'].as_tuple()}, "
      f"barrier from +1 = {phi['minus_h_a'].as_tuple()} "
      f"= {float(phi['minus_h_a'].value(h))}")
print(f"Gamma_max = {rep.gamma_max.as_tuple()} attained by {rep.x_m_count} state(s)")

sl = landscape.manifold_slice(g, h, 3)
print(f"nu_3 slice: min {sl['min'].as_tuple()} over {sl['argmin_count']} argmin state(s)")
