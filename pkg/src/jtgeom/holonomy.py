"""Adiabatic transport around loops on the trough.

Two independent discretizations of parallel transport are run side by side:

* sign alignment: at every point the ground eigenvector is re-signed to have a
  positive overlap with its predecessor (the usual lattice gauge choice). For
  a resolved path this is exact, so the end vector is ``+-C[0]`` to roundoff
  and fixes the snapped phase.
* projector propagation: ``C`` is pushed through the midpoint step
  ``expm([P_i, P_{i-1}])`` of the adiabatic transport equation
  ``dC/dt = [dP/dt, P] C``. It only sees projectors, so it is gauge-free, and
  it carries a genuine O(steps^-2) discretization error; its overlap with
  ``C[0]`` is the reported raw phase.

The excited block (all columns above the ground state) is transported with
per-step polar re-orthogonalization; its closed-loop matrix ``W`` is returned
in the initial excited frame.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import (
    DegeneracyError,
    DegeneracyOnPathError,
    InvalidParameterError,
    ResolutionError,
)
from .model import CLUSTER_TOL, as_geometry, eigensystem
from .trough import antipode, trough_point

MIN_STEPS = 64
OVERLAP_FLOOR = 0.9
GAP_FLOOR_REL = 1e-6
SNAP_TOL = 1e-6
POLAR_FLOOR = 0.5
CONTRACTIBLE_RADIUS = 0.05


@dataclass(frozen=True, eq=False)
class LoopPath:
    points: np.ndarray  # (S + 1, M)
    kind: str = "custom"
    thetas: np.ndarray = None  # chart record, (S + 1, N - 1)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or len(pts) < 2:
            raise InvalidParameterError("a loop needs at least two points")
        if np.linalg.norm(pts[0] - pts[-1]) >= 1e-12:
            raise InvalidParameterError("loop is not closed")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def base(self):
        return self.points[0]

    @property
    def steps(self):
        return len(self.points) - 1

    @property
    def max_step(self):
        return float(np.max(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))

    def __add__(self, other):
        return concatenate(self, other)


@dataclass(frozen=True, eq=False)
class TransportRecord:
    frames: list
    step_overlaps: np.ndarray
    vectors: np.ndarray  # sign-aligned C[t], (S + 1, N)
    propagated: np.ndarray  # projector-propagated C[t], (S + 1, N)
    gaps: np.ndarray
    gap_floor: float

    @property
    def initial_vector(self):
        return self.vectors[0]

    @property
    def final_vector(self):
        return self.vectors[-1]

    @property
    def phase_raw(self):
        return float(self.propagated[-1] @ self.vectors[0])

    @property
    def min_overlap(self):
        return float(self.step_overlaps.min()) if len(self.step_overlaps) else 1.0

    @property
    def min_gap(self):
        return float(self.gaps.min())


@dataclass(frozen=True, eq=False)
class HolonomyResult:
    gamma0: int
    phase_raw: float
    W: np.ndarray
    flipped_count: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def W_det(self):
        return float(np.linalg.det(self.W))


def make_loop(spec, kind, base_theta, steps=256, radius=CONTRACTIBLE_RADIUS):
    """Closed loop on the trough starting at ``trough_point(spec, base_theta)``.

    ``nontrivial`` runs on a straight line in angle space from ``base_theta``
    to its antipode, which closes in configuration space (for N = 2 this is a
    full winding of the trough circle). ``contractible`` is a circle of
    parameter radius ``radius`` in the first and last angles (a back-and-forth
    arc when N = 2).
    """
    N = spec.model.N
    if steps < MIN_STEPS:
        raise ResolutionError(f"loops need at least {MIN_STEPS} steps, got {steps}")
    base = np.atleast_1d(np.asarray(base_theta, dtype=float))
    if base.shape != (N - 1,):
        raise InvalidParameterError(f"expected {N - 1} base angles, got {base.shape}")
    t = np.linspace(0.0, 1.0, steps + 1)
    if kind == "nontrivial":
        thetas = base + t[:, None] * (antipode(N, base) - base)
    elif kind == "contractible":
        if not 0 < radius <= 0.1:
            raise InvalidParameterError("contractible radius must be in (0, 0.1]")
        thetas = np.repeat(base[None, :], steps + 1, axis=0)
        if N == 2:
            thetas[:, 0] += radius * np.sin(2 * np.pi * t)
        else:
            thetas[:, 0] += radius * (np.cos(2 * np.pi * t) - 1.0)
            thetas[:, -1] += radius * np.sin(2 * np.pi * t)
    else:
        raise InvalidParameterError(f"unknown loop kind {kind!r}")
    points = np.array([trough_point(spec, th).Q for th in thetas])
    points[-1] = points[0]
    return LoopPath(points, kind, thetas)


def concatenate(a, b):
    if np.linalg.norm(a.base - b.base) >= 1e-12:
        raise InvalidParameterError("loops must share their base point")
    thetas = None
    if a.thetas is not None and b.thetas is not None:
        thetas = np.vstack([a.thetas, b.thetas[1:]])
    kind = a.kind if a.kind == b.kind else "custom"
    return LoopPath(np.vstack([a.points, b.points[1:]]), kind, thetas)


def _frames(model, path, resign):
    frames = [eigensystem(model, as_geometry(Q, model.M)) for Q in path.points]
    vecs = np.array([f.eigenvectors for f in frames])
    if resign is not None:
        resign = np.asarray(resign, dtype=float)
        vecs = vecs * (resign[:, None, :] if resign.ndim == 2 else resign[:, None, None])
    return frames, vecs


def _gap_floor(frames):
    floor = GAP_FLOOR_REL * frames[0].spectral_range
    if floor <= 0:
        raise DegeneracyOnPathError("electronic spectrum is fully degenerate at the base point")
    gaps = np.array([f.gap for f in frames])
    bad = np.flatnonzero(gaps < floor)
    if len(bad):
        raise DegeneracyOnPathError(
            f"ground-state gap {gaps[bad[0]]:.3e} below floor {floor:.3e} at step {bad[0]}"
        )
    return gaps, floor


def transport_ground(model, path, resign=None):
    """Parallel-transport the ground state around ``path``.

    ``resign`` optionally multiplies the gauge-fixed eigenvectors at each point
    by a sign (shape ``(S + 1,)`` or ``(S + 1, N)``); results must not depend
    on it.
    """
    frames, vecs = _frames(model, path, resign)
    gaps, floor = _gap_floor(frames)
    S = path.steps
    ground = vecs[:, :, 0]
    aligned = np.empty_like(ground)
    aligned[0] = ground[0]
    overlaps = np.empty(S)
    propagated = np.empty_like(ground)
    propagated[0] = ground[0]
    P_prev = np.outer(ground[0], ground[0])
    for i in range(1, S + 1):
        v = ground[i]
        ov = float(v @ aligned[i - 1])
        if ov < 0:
            v, ov = -v, -ov
        if ov < OVERLAP_FLOOR:
            raise ResolutionError(
                f"step {i}: overlap {ov:.3f} below {OVERLAP_FLOOR}; use more steps"
            )
        aligned[i] = v
        overlaps[i - 1] = ov
        P = np.outer(ground[i], ground[i])
        propagated[i] = expm(P @ P_prev - P_prev @ P) @ propagated[i - 1]
        P_prev = P
    return TransportRecord(frames, overlaps, aligned, propagated, gaps, floor)


def _snap(record):
    exact = float(record.final_vector @ record.initial_vector)
    snapped = 1 if exact > 0 else -1
    raw = record.phase_raw
    if abs(exact - snapped) > SNAP_TOL or abs(raw - snapped) > SNAP_TOL:
        raise ResolutionError(
            f"transported vector does not close on +-C[0] (aligned {exact:.3e}, raw {raw:.9f})"
        )
    return snapped


def berry_phase(model, path, resign=None):
    """Ground-state geometric phase (+1 or -1) of a closed loop."""
    return _snap(transport_ground(model, path, resign))


def subspace_holonomy(model, path, resign=None):
    """Orthogonal holonomy of the excited block plus the ground-state phase."""
    record = transport_ground(model, path, resign)
    gamma0 = _snap(record)
    _, vecs = _frames(model, path, resign)
    excited = vecs[:, :, 1:]
    T = excited[0]
    smin = 1.0
    for i in range(1, path.steps + 1):
        A, s, Bt = np.linalg.svd(excited[i].T @ T)
        smin = min(smin, float(s.min()))
        if s.min() < POLAR_FLOOR:
            raise ResolutionError(f"step {i}: excited-frame overlap singular value {s.min():.3f}; use more steps")
        T = excited[i] @ (A @ Bt)
    A, _, Bt = np.linalg.svd(excited[0].T @ T)
    W = A @ Bt
    sym = np.linalg.eigvalsh(0.5 * (W + W.T))
    flipped = int(np.sum(np.abs(sym + 1.0) < SNAP_TOL))
    diagnostics = {
        "steps": path.steps,
        "min_step_overlap": record.min_overlap,
        "min_gap": record.min_gap,
        "min_singular_value": smin,
        "W_eigenvalues_sym": sym.tolist(),
    }
    return HolonomyResult(gamma0, record.phase_raw, W, flipped, diagnostics)


def projector(model, Q):
    """Gauge-free ground-state projector ``|phi0><phi0|``."""
    frame = eigensystem(model, Q)
    if frame.gap < CLUSTER_TOL * max(1.0, frame.spectral_range):
        raise DegeneracyError("ground state is degenerate at this geometry")
    g = frame.ground
    return np.outer(g, g)
