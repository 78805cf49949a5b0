"""Symmetry-breaking perturbations and robustness scans.

Two perturbations are supported on top of a linear model:

* quadratic (trigonal) warping of ``e_x_e``,
  ``g [(Qz^2 - Qx^2) sigma_z - 2 Qx Qz sigma_x]``; it leaves three minima on
  the trough circle and, for ``g > omega^2``, pulls three extra conical
  intersections inside the trough radius;
* a constant electronic term ``eps W_f`` (static field type).
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse

from .errors import InvalidPerturbationError, JTError, UnsupportedModelError
from .holonomy import transport_ground, _snap
from .vibronic import low_spectrum, make_basis, position_operators

SCAN_COLUMNS = ("strength", "phase_raw", "phase_snapped", "min_gap", "splitting", "status")


@dataclass(frozen=True, eq=False)
class PerturbedModel:
    base: object
    g: float = 0.0
    W_f: np.ndarray = None
    eps: float = 0.0
    kind: str = "quadratic"  # which strength a scan varies

    @property
    def name(self):
        return self.base.name

    @property
    def N(self):
        return self.base.N

    @property
    def M(self):
        return self.base.M

    @property
    def F(self):
        return self.base.F

    @property
    def omega(self):
        return self.base.omega

    def with_strength(self, s):
        if self.kind == "quadratic":
            return replace(self, g=float(s))
        return replace(self, eps=float(s))

    def hamiltonian(self, Q):
        H = self.base.hamiltonian(Q)
        if self.g != 0.0:
            Qx, Qz = Q
            H = H + self.g * np.array([[Qz * Qz - Qx * Qx, -2 * Qx * Qz], [-2 * Qx * Qz, Qx * Qx - Qz * Qz]])
        if self.eps != 0.0:
            H = H + self.eps * self.W_f
        return H

    def vibronic_terms(self, basis):
        X = position_operators(basis, self.omega)
        terms = [(self.F * self.base.V[k], X[k]) for k in range(self.M)]
        if self.g != 0.0:
            # products built one shell higher, then restricted, so matrix elements are exact
            big = make_basis(basis.N, basis.M, basis.n_max + 1, max_dim=np.inf)
            Xb = position_operators(big, self.omega)
            n = basis.n_vib
            xx = (Xb[0] @ Xb[0])[:n, :n]
            zz = (Xb[1] @ Xb[1])[:n, :n]
            xz = (Xb[0] @ Xb[1])[:n, :n]
            sx, sz = self.base.V
            terms.append((self.g * sz, sparse.csr_matrix(zz - xx)))
            terms.append((-2 * self.g * sx, sparse.csr_matrix(xz)))
        if self.eps != 0.0:
            terms.append((self.eps * self.W_f, sparse.identity(basis.n_vib, format="csr")))
        return terms


def add_quadratic(base, g):
    if getattr(base, "name", None) != "e_x_e" or base.N != 2 or base.M != 2:
        raise UnsupportedModelError("quadratic coupling is implemented for e_x_e only")
    return PerturbedModel(base, g=float(g), kind="quadratic")


def add_field(base, W_f, eps):
    W_f = np.asarray(W_f, dtype=float)
    if W_f.shape != (base.N, base.N) or not np.allclose(W_f, W_f.T, atol=1e-14):
        raise InvalidPerturbationError(f"field term must be a real symmetric {base.N}x{base.N} matrix")
    W_f = W_f.copy()
    W_f.setflags(write=False)
    return PerturbedModel(base, W_f=W_f, eps=float(eps), kind="field")


def _row(p, loop, s, n_max):
    model = p.with_strength(s)
    row = dict(strength=float(s), phase_raw=None, phase_snapped=None, min_gap=None, splitting=None, status="ok")
    try:
        rec = transport_ground(model, loop)
        row["phase_raw"] = rec.phase_raw
        row["min_gap"] = rec.min_gap
        row["phase_snapped"] = _snap(rec)
    except JTError as err:
        row["status"] = err.code
        row["min_gap"] = _min_gap(model, loop) if row["min_gap"] is None else row["min_gap"]
    if n_max is not None:
        try:
            spec = low_spectrum(model, n_max, k=model.N + 2, check=False)
            row["splitting"] = float(spec.levels[1] - spec.levels[0])
        except JTError as err:
            row["status"] = err.code if row["status"] == "ok" else row["status"]
    return row


def _min_gap(model, loop):
    gaps = [np.diff(np.linalg.eigvalsh(model.hamiltonian(Q))[:2])[0] for Q in loop.points]
    return float(min(gaps))


def robustness_scan(p, loop, strengths, n_max=None, threads=1):
    """Re-run transport on a fixed loop for each perturbation strength.

    ``splitting`` is the gap between the two lowest vibronic levels at the
    reduced cutoff ``n_max`` (skipped when ``n_max`` is None). Row errors are
    recorded in ``status``; the scan never aborts.
    """
    strengths = [float(s) for s in strengths]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda s: _row(p, loop, s, n_max), strengths))
    return [_row(p, loop, s, n_max) for s in strengths]


def bracket_transitions(rows):
    """Adjacent strength pairs across which the snapped phase or the status changes."""
    out = []
    for a, b in zip(rows[:-1], rows[1:]):
        if (a["phase_snapped"], a["status"]) != (b["phase_snapped"], b["status"]):
            out.append((a["strength"], b["strength"]))
    return out
