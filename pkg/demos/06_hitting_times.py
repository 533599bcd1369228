"""Seeded escape campaigns: the oracle-vs-dynamics closed loop.

On (4,5), N = 1 at h = 19/10 the exhaustive barrier out of all-plus is
exactly 7/2; at large beta the log hitting times grow with that slope.
The companion nucleation experiment on (5,5), N = 3 tracks the reference
path barrier through the interior_plus target (the exact all-plus corner
is entropically unreachable there -- the boundary layer is soft).
"""
import numpy as np
from fractions import Fraction

from hypising import dynamics, energy, landscape, lattice
from hypising.params import ModelParams

g = lattice.build(4, 5, 1)
h = Fraction(19, 10)
print("(4,5,N=1), h=19/10, all-plus -> all-minus (Gamma_ex = 3.5):")
lns = []
betas = [4.0, 4.5, 5.0]
for beta in betas:
    mp = ModelParams(4, 5, 1, h, beta)
    s = dynamics.hit(g, mp, energy.SpinConfig.all_plus(g), "all_minus",
                     4 * 10 ** 9, seed=42, replicas=30)
    steps = np.array([x.steps for x in s], dtype=float)
    lns.append(np.log(steps.mean()))
    print(f"  beta={beta}: mean={steps.mean():.3e}  ln={lns[-1]:.3f}")
print(f"  slope = {np.polyfit(betas, lns, 1)[0]:.3f}")

rep = dynamics.tail_statistics(
    dynamics.hit(g, ModelParams(4, 5, 1, h, 3.0), energy.SpinConfig.all_plus(g),
                 "all_minus", 10 ** 8, seed=12, replicas=100))
print(f"  tail at T-hat={rep.t_hat:.0f}: "
      f"{[(r['t'], round(r['empirical'], 3)) for r in rep.rows]} vs exp(-t)")

print("\n(5,5,N=3), h=56/25, nucleation (interior_plus):")
g3 = lattice.build(5, 5, 3)
h3 = Fraction(56, 25)
gr = landscape.reference_gamma(g3, h3, window_n=21)
print(f"  Gamma_op = {float(gr.gamma_op.value(h3)):.2f} (segment {gr.argmax_segment})")
for beta in (2.4, 2.8):
    mp = ModelParams(5, 5, 3, h3, beta)
    s = dynamics.hit(g3, mp, energy.SpinConfig.all_minus(g3), "interior_plus",
                     4 * 10 ** 9, seed=20250809, replicas=10)
    steps = np.array([x.steps for x in s], dtype=float)
    print(f"  beta={beta}: mean={steps.mean():.3e}  ln={np.log(steps.mean()):.3f}")
