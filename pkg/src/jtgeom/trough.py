"""The ground-state trough: location, pseudorotation parametrization and the
antipodal identification that makes it a real projective space.

Angle convention (hyperspherical, N-1 angles): ``theta[i]`` in ``[0, pi]`` for
``i < N-2`` and the last angle in ``[0, 2 pi)``. The electronic rotation is

    U(theta) = G(N-3 -> N-2; theta[N-2]) ... G(0 -> 1; theta[1]) G(N-1 -> 0; theta[0])

where ``G(a -> b; t)`` rotates ``e_a`` towards ``e_b`` by ``t``. Its last
column is the unit vector ``(sin t0 cos t1, sin t0 sin t1 ..., cos t0)``;
for N = 3 this gives ``U = Rz(phi) Ry(theta)`` and columns
``(e_theta, e_phi, e_r)``.

N = 2 is special: ``theta`` is the angle in configuration space and the
electronic state rotates by half of it, ``U = exp(-i sigma_y theta / 2)``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DegenerateTroughError, InvalidParameterError, VacuousInputError
from .model import JTModel, apes, as_geometry, induced_configuration_rotation

PATTERN_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class TroughSpec:
    model: JTModel
    Qstar: float
    Emin: float
    Q_M: np.ndarray
    gradient_norm: float


@dataclass(frozen=True, eq=False)
class TroughPoint:
    theta: np.ndarray
    Q: np.ndarray
    U: np.ndarray


@dataclass(frozen=True)
class PatternReport:
    is_pattern: bool
    x_value: float
    ratios: tuple


def _givens(N, a, b, t):
    G = np.eye(N)
    c, s = np.cos(t), np.sin(t)
    G[a, a] = c
    G[b, b] = c
    G[b, a] = s
    G[a, b] = -s
    return G


def _check_angles(N, theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (N - 1,):
        raise InvalidParameterError(f"expected {N - 1} angles, got {theta.shape}")
    return theta


def electronic_rotation(N, theta):
    """SO(N) element whose last column is the ground state at angles ``theta``."""
    theta = _check_angles(N, theta)
    if N == 2:
        c, s = np.cos(theta[0] / 2), np.sin(theta[0] / 2)
        return np.array([[c, -s], [s, c]])
    U = _givens(N, N - 1, 0, theta[0])
    for i in range(1, N - 1):
        U = _givens(N, i - 1, i, theta[i]) @ U
    return U


def _gradient(model, Q):
    """Hellmann-Feynman gradient of the lowest APES."""
    _, v = np.linalg.eigh(model.hamiltonian(Q))
    g0 = v[:, 0]
    return model.omega**2 * Q + model.F * np.einsum("i,kij,j->k", g0, model.V, g0)


def find_trough(model):
    """Radius and energy of the trough.

    The radial profile along ``e_M`` is bracketed and minimized by golden
    section, then the stationarity condition (Hellmann-Feynman derivative)
    is solved to machine precision inside the golden bracket.
    """
    if model.F == 0:
        raise DegenerateTroughError("F = 0: the minimum collapses onto the JT center")
    if model.F < 0 or model.omega <= 0:
        raise InvalidParameterError("find_trough needs F > 0 and omega > 0")

    def g(Q):
        return 0.5 * model.omega**2 * Q * Q + float(np.linalg.eigvalsh(model.hamiltonian(Q * e_M))[0])

    e_M = np.zeros(model.M)
    e_M[-1] = 1.0
    hi = 1.0
    # g(0) = 0 and the profile dips below zero just off the center
    while g(hi) >= 0.0:
        hi /= 2
    while g(2 * hi) <= g(hi):
        hi *= 2
    res = optimize.minimize_scalar(g, bracket=(0.0, hi, 2 * hi), method="golden", tol=1e-8)
    width = max(1e-6 * res.x, 1e-12)

    def dg(Q):
        return float(_gradient(model, Q * e_M)[-1])

    lo, up = res.x - width, res.x + width
    while dg(lo) > 0:
        lo -= width
        width *= 2
    while dg(up) < 0:
        up += width
        width *= 2
    Qstar = optimize.brentq(dg, max(lo, 0.0), up, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    Q_M = Qstar * e_M
    grad = _gradient(model, Q_M)
    gnorm = float(np.linalg.norm(grad))
    if gnorm > 1e-6 * max(1.0, model.omega**2 * Qstar):
        raise DegenerateTroughError(f"reference geometry is not stationary (|grad| = {gnorm:.3e})")
    Q_M.setflags(write=False)
    return TroughSpec(model, float(Qstar), g(Qstar), Q_M, gnorm)


def trough_point(spec, theta):
    """Pseudorotate the reference geometry: ``Q = R(U(theta)) Q_M``."""
    model = spec.model
    theta = _check_angles(model.N, theta)
    U = electronic_rotation(model.N, theta)
    R = induced_configuration_rotation(model, U)
    return TroughPoint(theta, R @ spec.Q_M, U)


def verify_trough_spectrum(model, Q, rtol=PATTERN_RTOL):
    """Test whether ``spec H_JT(Q)`` is ``{x, ..., x, -(N-1) x}`` with ``x > 0``."""
    Q = as_geometry(Q, model.M)
    w = np.linalg.eigvalsh(model.hamiltonian(Q))[::-1]
    scale = float(np.max(np.abs(w)))
    if not np.linalg.norm(Q) > 0 or scale == 0:
        raise VacuousInputError("all eigenvalues vanish; the pattern is undefined")
    N = model.N
    x = float(np.mean(w[: N - 1]))
    if x <= 0:
        return PatternReport(False, x, tuple(w / scale))
    target = np.r_[np.ones(N - 1), -(N - 1)]
    ratios = w / x
    ok = bool(np.all(np.abs(ratios - target) <= rtol * (N - 1)))
    return PatternReport(ok, x, tuple(float(r) for r in ratios))


def antipode(spec_or_N, theta):
    """Angles of the same trough point with the opposite ground-state sign.

    For N >= 3 every polar angle maps to ``pi - t`` and the azimuth to
    ``t + pi``; for N = 2 the configuration angle advances by ``2 pi``.
    Angles are not reduced, so the result can be used as a path endpoint.
    """
    N = spec_or_N if isinstance(spec_or_N, (int, np.integer)) else spec_or_N.model.N
    theta = _check_angles(N, theta)
    if N == 2:
        return theta + 2 * np.pi
    out = np.pi - theta
    out[-1] = theta[-1] + np.pi
    return out


def random_angles(N, rng):
    """Angles of a uniformly distributed unit vector on S^{N-1}."""
    v = rng.standard_normal(N)
    v /= np.linalg.norm(v)
    if N == 2:
        # electronic vector (-sin(t/2), cos(t/2))
        return np.array([2 * np.arctan2(-v[0], v[1])])
    theta = np.empty(N - 1)
    theta[0] = np.arccos(np.clip(v[-1], -1, 1))
    rest = v[:-1]
    for i in range(N - 2):
        tail = np.linalg.norm(rest[i:])
        if i == N - 3:
            theta[i + 1] = np.arctan2(rest[i + 1], rest[i]) % (2 * np.pi)
        else:
            theta[i + 1] = np.arccos(np.clip(rest[i] / tail, -1, 1)) if tail > 0 else 0.0
    return theta


def lowest_apes(model, Q):
    return float(apes(model, Q)[0])
