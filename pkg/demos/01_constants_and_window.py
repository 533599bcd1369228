"""Closed-form constants and the metastable field window.

Walks the transfer-matrix recursion for a few (p, q), evaluates the
eigenvalue constants, and shows how the window (h1*, h2*) narrows onto
(h_limit, h2*) as the patch deepens.
"""
from fractions import Fraction

from hypising import params

for (p, q) in [(4, 5), (5, 5), (5, 4), (7, 7)]:
    sc = params.spectral_constants(p, q)
    print(f"({p},{q}): T={sc.T}  lambda+={sc.lambda_plus:.6f} lambda-={sc.lambda_minus:.6f}")
    print(f"        a+={sc.a_plus:.6f} a-={sc.a_minus:.6f} c={sc.c_pq:.6f} "
          f"h_limit={sc.h_limit:.6f}")
    for n in range(4):
        print(f"        layer {n}: (I,E,L) = {params.layer_counts(p, q, n)}")

print("\nwindow sweep at (5,5): h1* decreases to h_limit, h2* = 9/4 exactly")
for n in (1, 2, 3, 5, 9, 15, 21):
    w = params.field_window(5, 5, n)
    print(f"  N={n:2d}: h1* = {w.h1} = {float(w.h1):.10f}   h2* = {w.h2:.10f}")

h = Fraction(56, 25)
r = params.critical_radius(5, 5, h)
mp = params.ModelParams(5, 5, 3, h, 2.8)
print(f"\nh = {h}: r* = {int(r)} (ratio {r.ratio:.4f}), "
      f"region = {params.region_classify(mp).label}")

w45 = params.field_window(4, 5, 2)
print(f"\nprinted identity check at (4,5): h2* = {w45.h2} vs h1*(1) = {w45.h1_of_1} "
      f"-> agree: {w45.h2_equals_h1_of_1} (surfaced, not reconciled)")
