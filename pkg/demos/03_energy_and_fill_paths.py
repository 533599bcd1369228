"""Exact energies and the layer-filling energy profile.

Reproduces the worked numbers: the first 13 flips of the layer-1 fill at
(5,5), h = 2.24 cost 9 x (3-h) up and 4 x (1-h) down, cumulative 31 - 13h.
The profile over the whole layer peaks later, at strip length 32.
"""
from fractions import Fraction

from hypising import energy, landscape, lattice

g = lattice.build(5, 5, 3)
h = Fraction(56, 25)

s = energy.SpinConfig.all_minus(g)
print("all-minus:", energy.delta_h(g, s).as_tuple())
s.flip(g.vertex_id(1, 7))
print("one plus:", energy.delta_h(g, s).as_tuple(), "-> value q - h =",
      float(energy.delta_h(g, s).value(h)))

for r in range(3):
    ball = landscape.ball_config(g, r + 1)
    e = energy.delta_h(g, ball)
    print(f"ball({r + 1}): (u,n)={e.as_tuple()}  value={float(e.value(h)):+.2f}  "
          f"increment={landscape.ball_increment(5, 5, r).as_tuple()}")

tr = landscape.fill_layer_path(g, 1, h)
print("\nfill of layer 1 (first 15 steps):")
print("step layer index cls  du dn  cum_u cum_n   value")
for row in tr.rows(h)[:15]:
    print("{:4d} {:5d} {:5d}  {}  {:3d} {:2d}  {:5d} {:5d}  {:+.2f}".format(*row))
k, e = tr.max_prefix(h)
print(f"prefix maximum: strip {k}, cumulative {e.as_tuple()} = {float(e.value(h)):+.2f}")
print(f"cumulative after 13 flips: {tr.cum(13).as_tuple()} = "
      f"{float(tr.cum(13).value(h)):+.2f} (the printed worked value)")

cs = energy.clusters(g, landscape.critical_droplet(g, h, window_n=21).config)
print("\ndroplet cluster check:", [(c.area, c.perimeter) for c in cs.clusters])
