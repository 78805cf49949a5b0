"""
Sign change of the ground state around the trough
=================================================

Transport the ground state along a loop that joins a trough point to its
antipodal representative. The transported vector comes back as its negative;
on a small contractible loop it comes back unchanged. The excited pair of
t_e_t2 picks up a reflection on the first loop and a small rotation, equal to
the enclosed solid angle, on the second.
"""

import numpy as np

from jtgeom import build_model, find_trough
from jtgeom.holonomy import make_loop, subspace_holonomy, transport_ground

model = build_model("t_e_t2")
spec = find_trough(model)
base = [np.pi / 2, 0.0]

# convergence of the raw overlap with the number of steps
for steps in (64, 128, 256, 512, 1024):
    rec = transport_ground(model, make_loop(spec, "nontrivial", base, steps=steps))
    print(f"steps={steps:5d}  raw phase={rec.phase_raw:+.12f}  |raw + 1|={abs(rec.phase_raw + 1):.2e}")

h = subspace_holonomy(model, make_loop(spec, "nontrivial", base))
print("nontrivial loop: gamma0 =", h.gamma0, " det W =", round(h.W_det, 9), " flipped =", h.flipped_count)

# C[0] and C[1] on the electronic sphere
rec = transport_ground(model, make_loop(spec, "nontrivial", base))
print("C[0] =", np.round(rec.initial_vector, 9), " C[1] =", np.round(rec.final_vector, 9))

for r in (0.05, 0.01):
    hc = subspace_holonomy(model, make_loop(spec, "contractible", base, steps=1024, radius=r))
    angle = np.arctan2(hc.W[1, 0], hc.W[0, 0])
    print(f"contractible r={r}: gamma0={hc.gamma0} rotation of the excited pair={angle:+.3e} rad")
