"""Linear Jahn-Teller models with maximal continuous symmetry.

Units: hbar = 1 and mass-weighted coordinates, so ``F`` and ``omega`` are the
only scales. The electronic Hamiltonian at a displacement ``Q`` is

    H_JT(Q) = F * sum_k Q_k V_k

with real symmetric traceless coupling matrices ``V_k`` that are pairwise
trace-orthogonal, ``Tr(V_j V_k) = c delta_jk``. The last matrix ``V_M`` is
diagonal with pattern ``(1, ..., 1, -(N-1))`` up to scale, so ``Q = Q e_M``
is a reference trough geometry at which ``H_JT`` is already diagonal.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    InvalidGeometryError,
    InvalidParameterError,
    InvalidRotationError,
    ModelNotFoundError,
)

CLUSTER_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class JTModel:
    name: str
    N: int
    M: int
    F: float
    omega: float
    V: np.ndarray  # shape (M, N, N)

    def __post_init__(self):
        V = np.array(self.V, dtype=float)
        V.setflags(write=False)
        object.__setattr__(self, "V", V)
        check_coupling_matrices(V, self.N, self.M)

    @property
    def c(self):
        """Shared trace-orthogonality constant ``Tr(V_k V_k)``."""
        return float(np.trace(self.V[0] @ self.V[0]))

    def hamiltonian(self, Q):
        Q = as_geometry(Q, self.M)
        return self.F * np.tensordot(Q, self.V, axes=1)

    def with_params(self, F=None, omega=None):
        return JTModel(
            self.name,
            self.N,
            self.M,
            self.F if F is None else float(F),
            self.omega if omega is None else float(omega),
            self.V,
        )


@dataclass(frozen=True, eq=False)
class AdiabaticFrame:
    Q: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    clusters: tuple

    @property
    def ground(self):
        return self.eigenvectors[:, 0]

    @property
    def excited(self):
        return self.eigenvectors[:, 1:]

    @property
    def gap(self):
        """Gap between the ground level and the first excited level."""
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    @property
    def spectral_range(self):
        return float(self.eigenvalues[-1] - self.eigenvalues[0])


def as_geometry(Q, M):
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (M,):
        raise InvalidGeometryError(f"expected a geometry of length {M}, got shape {Q.shape}")
    return Q


def check_coupling_matrices(V, N, M, atol=1e-12):
    """Validate the structural invariants of a coupling-matrix set."""
    if N < 2 or M < N:
        raise InvalidParameterError(f"need 2 <= N <= M, got N={N}, M={M}")
    if V.shape != (M, N, N):
        raise InvalidParameterError(f"coupling matrices must have shape {(M, N, N)}, got {V.shape}")
    if not np.allclose(V, V.transpose(0, 2, 1), atol=atol):
        raise InvalidParameterError("coupling matrices must be symmetric")
    if not np.allclose(np.trace(V, axis1=1, axis2=2), 0.0, atol=atol):
        raise InvalidParameterError("coupling matrices must be traceless")
    gram = np.einsum("aij,bji->ab", V, V)
    c = gram[0, 0]
    if c <= 0 or not np.allclose(gram, c * np.eye(M), atol=1e-10 * c):
        raise InvalidParameterError("coupling matrices must be trace-orthogonal with a shared constant")
    VM = V[-1]
    if not np.allclose(VM, np.diag(np.diag(VM)), atol=atol):
        raise InvalidParameterError("the last coupling matrix must be diagonal")
    d = np.diag(VM)
    pattern = d[0] * np.r_[np.ones(N - 1), -(N - 1)]
    if d[0] <= 0 or not np.allclose(d, pattern, atol=1e-12 * abs(d[0])):
        raise InvalidParameterError("the last coupling matrix must follow the (x, ..., x, -(N-1)x) pattern, x > 0")


def _e_x_e():
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    sz = np.array([[1.0, 0.0], [0.0, -1.0]])
    return 2, 2, np.array([sx, sz])


def quadrupole_basis():
    """Real symmetric traceless 3x3 basis with ``Tr(V_j V_k) = 2 delta_jk``.

    Ordered (xy, xz, yz, x^2-y^2, 3z^2-r^2); the last element is
    ``diag(1, 1, -2) / sqrt(3)``.
    """
    V = np.zeros((5, 3, 3))
    V[0, 0, 1] = V[0, 1, 0] = 1.0
    V[1, 0, 2] = V[1, 2, 0] = 1.0
    V[2, 1, 2] = V[2, 2, 1] = 1.0
    V[3] = np.diag([1.0, -1.0, 0.0])
    V[4] = np.diag([1.0, 1.0, -2.0]) / np.sqrt(3.0)
    return V


def _t_e_t2():
    return 3, 5, quadrupole_basis()


_REGISTRY: dict = {
    "e_x_e": _e_x_e,
    "t_e_t2": _t_e_t2,
}


def register_model(name: str, factory: Callable):
    """Register a model family.

    ``factory()`` must return ``(N, M, V)``. The coupling matrices are
    validated on every `build_model` call, so a bad factory fails loudly.
    """
    _REGISTRY[name] = factory


def available_models():
    return sorted(_REGISTRY)


def build_model(name, F=1.0, omega=1.0):
    if name not in _REGISTRY:
        raise ModelNotFoundError(f"unknown model {name!r}; available: {', '.join(available_models())}")
    F = float(F)
    omega = float(omega)
    if not np.isfinite(F) or F < 0:
        raise InvalidParameterError(f"F must be finite and >= 0, got {F}")
    if not np.isfinite(omega) or omega <= 0:
        raise InvalidParameterError(f"omega must be > 0, got {omega}")
    N, M, V = _REGISTRY[name]()
    return JTModel(name, N, M, F, omega, V)


def hamiltonian(model, Q):
    return model.hamiltonian(Q)


def gauge_fix(vectors):
    """Make the largest-magnitude entry of each column positive (lowest index wins ties)."""
    vectors = np.array(vectors, dtype=float)
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def cluster_indices(values, tol):
    """Group ascending ``values`` into runs whose consecutive gaps are below ``tol``."""
    clusters = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] < tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return tuple(tuple(c) for c in clusters)


def diagonalize(H, Q, cluster_tol=CLUSTER_TOL):
    if cluster_tol <= 0:
        raise InvalidParameterError("cluster_tol must be > 0")
    w, v = np.linalg.eigh(H)
    v = gauge_fix(v)
    scale = max(1.0, float(w[-1] - w[0]))
    return AdiabaticFrame(Q, w, v, cluster_indices(w, cluster_tol * scale))


def eigensystem(model, Q, cluster_tol=CLUSTER_TOL):
    """Ascending eigenpairs of ``H_JT(Q)`` with the deterministic gauge applied."""
    Q = as_geometry(Q, model.M)
    return diagonalize(model.hamiltonian(Q), Q, cluster_tol)


def apes(model, Q):
    """Adiabatic potential energy surfaces ``omega^2 |Q|^2 / 2 + eig H_JT(Q)``."""
    Q = as_geometry(Q, model.M)
    return 0.5 * model.omega**2 * float(Q @ Q) + np.linalg.eigvalsh(model.hamiltonian(Q))


def induced_configuration_rotation(model, U, atol=1e-10):
    """Configuration-space rotation induced by an electronic rotation ``U``.

    Returns ``R`` with ``R[j, k] = Tr(V_j U V_k U^T) / c``, so that
    ``U V_k U^T = sum_j R[j, k] V_j`` and hence
    ``H_JT(R @ Q) = U H_JT(Q) U^T``. Applied to the reference geometry
    ``Q_M = Q e_M`` it gives the pseudorotated trough point.
    """
    U = np.asarray(U, dtype=float)
    N = model.N
    if U.shape != (N, N):
        raise InvalidRotationError(f"expected an {N}x{N} rotation, got shape {U.shape}")
    if not np.allclose(U.T @ U, np.eye(N), atol=atol) or np.linalg.det(U) < 0:
        raise InvalidRotationError("U must be orthogonal with det(U) = +1")
    rotated = np.einsum("ij,kjl,ml->kim", U, model.V, U)  # U V_k U^T
    R = np.einsum("jab,kba->jk", model.V, rotated) / model.c
    if not np.allclose(R.T @ R, np.eye(model.M), atol=1e-9):
        raise InvalidRotationError("U is not in the symmetry group of this model's coupling matrices")
    return R
