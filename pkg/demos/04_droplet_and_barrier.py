"""Critical droplet, K*(h), and the operational barrier vs the closed form.

Shows the comparison layer in action: the printed appendix strip lengths
(13 at h = 2.24, 55 at h = 2.2364) against the exact prefix argmax (32),
and the printed Gamma closed form against the true reference-path maximum.
"""
from fractions import Fraction

from hypising import landscape, lattice

g = lattice.build(5, 5, 3)

for h in (Fraction(56, 25), Fraction(5591, 2500)):
    print(f"=== h = {h} = {float(h)} ===")
    ks = landscape.kstar(g, h, window_n=21)
    print(f"K* = {ks.k_star.as_tuple()} = {float(ks.k_star.value(h)):+.4f} "
          f"at strip {ks.strip_len}; K_rec = {ks.k_rec.as_tuple()}")
    for fl in ks.flags:
        print("  FLAG:", fl)
    for note in ks.notes:
        print("  note:", note)
    dr = landscape.critical_droplet(g, h, window_n=21)
    print(f"droplet: radius {dr.spec.radius}, strip {dr.spec.strip_len}, "
          f"area {dr.spec.area}, energy {dr.energy.as_tuple()} "
          f"= {float(dr.energy.value(h)):+.4f}")
    sr = landscape.shape_classify(g, dr.config)
    print(f"shape: {sr.classification} (s_e={sr.empty_strips}, "
          f"occupied I = {sr.occupied_i}, o_max = {sr.o_max})")
    gr = landscape.reference_gamma(g, h, window_n=21)
    print(f"Gamma_op = {gr.gamma_op.as_tuple()} = {float(gr.gamma_op.value(h)):+.4f} "
          f"in segment {gr.argmax_segment}")
    print(f"printed closed form = {gr.gamma_closed_printed:+.4f}; "
          f"ball-energy variant = {gr.gamma_closed_ball_variant:+.4f}")
    print(f"segment maxima: {[(r, e.as_tuple()) for r, _, e in gr.segment_maxima]}")
    print()
