"""
The ground-state trough
=======================

Build the two built-in models, find the trough radius and energy, and check
that every point on the trough has the same electronic spectrum pattern.
"""

import numpy as np

from jtgeom import build_model, find_trough, trough_point, verify_trough_spectrum
from jtgeom.model import apes
from jtgeom.trough import random_angles

rng = np.random.default_rng(0)

for name in ("e_x_e", "t_e_t2"):
    model = build_model(name, F=1.0, omega=1.0)
    spec = find_trough(model)
    print(f"{name}: N={model.N} M={model.M} Qstar={spec.Qstar:.12f} Emin={spec.Emin:.12f}")

    # random pseudorotations of the reference distortion stay on the trough
    for _ in range(3):
        p = trough_point(spec, random_angles(model.N, rng))
        rep = verify_trough_spectrum(model, p.Q)
        print(f"  |Q|={np.linalg.norm(p.Q):.12f} lowest APES={apes(model, p.Q)[0]:.12f} ratios={np.round(rep.ratios, 12)}")

# a radial cut through the Mexican hat: both sheets meet at Q = 0
model = build_model("e_x_e")
for q in np.linspace(0.0, 2.0, 9):
    lo, hi = apes(model, [0.0, q])
    print(f"Q={q:4.2f}  lower={lo:+.4f}  upper={hi:+.4f}")
