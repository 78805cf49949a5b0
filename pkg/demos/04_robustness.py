"""
Robustness of the sign change
=============================

Warp the e_x_e trough with a quadratic term and keep the loop fixed. The sign
change survives until the ground-state gap closes on the loop, after which the
loop encloses an even number of intersections. A static field instead splits
the vibronic doublet.
"""

import numpy as np

from jtgeom import build_model, find_trough
from jtgeom.holonomy import make_loop
from jtgeom.perturb import add_field, add_quadratic, bracket_transitions, robustness_scan

model = build_model("e_x_e")
loop = make_loop(find_trough(model), "nontrivial", [0.0], steps=4096)
rows = robustness_scan(add_quadratic(model, 0.0), loop, [0.0, 0.3, 0.6, 0.9, 1.0, 1.2, 1.5, 2.0])
for r in rows:
    print(f"g={r['strength']:.2f} phase={r['phase_snapped']} raw={r['phase_raw']} min gap={r['min_gap']:.3f} {r['status']}")
print("transitions bracketed in:", bracket_transitions(rows))

strong = build_model("e_x_e", F=5.0)
rows = robustness_scan(add_field(strong, np.diag([1.0, -1.0]), 0.0), make_loop(find_trough(strong), "nontrivial", [0.0], steps=512),
                       [0.0, 0.05, 0.1, 0.2], n_max=30)
for r in rows:
    print(f"eps={r['strength']:.2f} phase={r['phase_snapped']} doublet splitting={r['splitting']:.3e}")
