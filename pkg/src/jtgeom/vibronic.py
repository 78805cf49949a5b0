"""Exact diagonalization of the full vibronic Hamiltonian and the rotor reference.

The nuclear part is expanded in harmonic-oscillator occupation vectors with
total quanta ``sum(n) <= n_max``; truncating by total quanta keeps the
truncated space invariant under the continuous symmetry of the model, so
symmetry multiplets stay exactly degenerate at every cutoff.

Flat index layout: ``electronic_index * n_vib + vibrational_index``.
"""
import itertools
from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import CapacityError, InvalidParameterError, SolverError

MAX_DIM = 500_000
DEGENERACY_TOL = 1e-6
ADIABATIC_THRESHOLD = 10.0


@dataclass(frozen=True, eq=False)
class VibronicBasis:
    N: int
    M: int
    n_max: int
    occupations: np.ndarray  # (n_vib, M), ordered by shell
    index: dict

    @property
    def n_vib(self):
        return len(self.occupations)

    @property
    def dim(self):
        return self.N * self.n_vib

    def flat(self, electronic, occupation):
        return electronic * self.n_vib + self.index[tuple(occupation)]

    def unflat(self, i):
        e, v = divmod(int(i), self.n_vib)
        return e, tuple(int(x) for x in self.occupations[v])


@dataclass(frozen=True, eq=False)
class VibronicOperator:
    basis: VibronicBasis
    matrix: sparse.csr_matrix


@dataclass(frozen=True, eq=False)
class VibronicSpectrum:
    levels: np.ndarray
    degeneracies: tuple
    n_max: int
    converged: bool
    reference_n_max: int = None
    ground_shift: float = None
    residual: float = None

    @property
    def ground_cluster(self):
        return self.levels[: self.degeneracies[0]]

    @property
    def ground_splitting(self):
        g = self.ground_cluster
        return float((g[-1] - g[0]) / max(1.0, abs(g[0])))

    def cluster_energies(self):
        out, start = [], 0
        for d in self.degeneracies:
            out.append(float(np.mean(self.levels[start : start + d])))
            start += d
        return out


@dataclass(frozen=True)
class RotorLevel:
    L: float
    energy: float
    degeneracy: int


@dataclass(frozen=True)
class RotorSpectrum:
    N: int
    parity: str
    levels: tuple


@dataclass(frozen=True)
class VGSDReport:
    ground_degeneracy: int
    matches_vector_irrep: bool
    status: str  # ok | inconclusive | not-applicable
    coupling_ratio: float
    spectrum: VibronicSpectrum = None


def _shell(M, s):
    """Occupation vectors of M modes with total quanta s, lexicographically descending."""
    if M == 1:
        yield (s,)
        return
    for first in range(s, -1, -1):
        for rest in _shell(M - 1, s - first):
            yield (first,) + rest


def vibrational_dim(M, n_max):
    return comb(n_max + M, M)


def make_basis(N, M, n_max, max_dim=MAX_DIM):
    if n_max < 1:
        raise InvalidParameterError("n_max must be >= 1")
    dim = N * vibrational_dim(M, n_max)
    if dim > max_dim:
        raise CapacityError(f"basis dimension {dim} exceeds budget {max_dim}")
    occ = [o for s in range(n_max + 1) for o in _shell(M, s)]
    index = {o: i for i, o in enumerate(occ)}
    return VibronicBasis(N, M, n_max, np.array(occ, dtype=int), index)


def position_operators(basis, omega):
    """Sparse ``Q_k = (a_k + a_k^dagger) / sqrt(2 omega)`` on the truncated space."""
    ops = []
    occ = basis.occupations
    n_vib = basis.n_vib
    for k in range(basis.M):
        rows, cols, vals = [], [], []
        for i, o in enumerate(occ):
            if o.sum() == basis.n_max:
                continue
            up = list(o)
            up[k] += 1
            j = basis.index[tuple(up)]
            amp = np.sqrt((o[k] + 1) / (2.0 * omega))
            rows += [i, j]
            cols += [j, i]
            vals += [amp, amp]
        ops.append(sparse.csr_matrix((vals, (rows, cols)), shape=(n_vib, n_vib)))
    return ops


def number_diagonal(basis):
    return basis.occupations.sum(axis=1).astype(float)


def build_vibronic(model, n_max, max_dim=MAX_DIM):
    """Sparse matrix of ``P^2/2 + omega^2 Q^2/2 + H_JT(Q)`` in the oscillator basis.

    ``model`` is a `JTModel` or any object exposing ``N, M, omega`` and
    ``vibronic_terms(basis)``, which yields ``(electronic matrix, nuclear
    operator)`` pairs added on top of the oscillator part.
    """
    basis = make_basis(model.N, model.M, n_max, max_dim)
    osc = sparse.diags(model.omega * (number_diagonal(basis) + model.M / 2.0))
    H = sparse.kron(sparse.identity(model.N), osc, format="csr")
    if hasattr(model, "vibronic_terms"):
        terms = model.vibronic_terms(basis)
    else:
        X = position_operators(basis, model.omega)
        terms = [(model.F * model.V[k], X[k]) for k in range(model.M)]
    for el, nuc in terms:
        if np.any(el):
            H = H + sparse.kron(sparse.csr_matrix(el), nuc, format="csr")
    H = H.tocsr()
    H.sum_duplicates()
    return VibronicOperator(basis, H)


def cluster_sizes(levels, tol):
    sizes = [1]
    for a, b in zip(levels[:-1], levels[1:]):
        if b - a < tol * max(1.0, abs(a)):
            sizes[-1] += 1
        else:
            sizes.append(1)
    return tuple(sizes)


def _lowest(H, k, N):
    dim = H.shape[0]
    if dim <= 600:
        w = np.linalg.eigvalsh(H.toarray())
        return w[:k], 0.0
    kk = min(k + N + 2, dim - 2)
    v0 = np.random.default_rng(12345).standard_normal(dim)
    try:
        w, v = eigsh(H, k=kk, which="SA", v0=v0, ncv=min(dim - 1, max(2 * kk + 1, 40)), tol=0, maxiter=20 * dim)
    except ArpackNoConvergence as err:
        r = [float(np.linalg.norm(H @ x - e * x)) for e, x in zip(err.eigenvalues, err.eigenvectors.T)]
        raise SolverError(f"eigensolver did not converge; residuals {r}", residuals=r) from err
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    res = float(np.max(np.linalg.norm(H @ v - v * w, axis=0)))
    return w[:k], res


def low_spectrum(model, n_max, k=None, tol=DEGENERACY_TOL, max_dim=MAX_DIM, check=True):
    """Lowest ``k`` vibronic levels with degeneracy clusters and a convergence check.

    The convergence flag compares the ground-cluster energy with an
    ``n_max - 2`` run: converged when the shift is below ``10 tol`` relative.
    """
    k = model.N + 1 if k is None else int(k)
    if k < model.N + 1:
        raise InvalidParameterError(f"k must be >= N + 1 = {model.N + 1}")
    op = build_vibronic(model, n_max, max_dim)
    levels, res = _lowest(op.matrix, k, model.N)
    sizes = cluster_sizes(levels, tol)
    converged, shift, ref = False, None, None
    if check and n_max - 2 >= 1:
        ref = n_max - 2
        ref_levels, _ = _lowest(build_vibronic(model, ref, max_dim).matrix, k, model.N)
        e0 = float(np.mean(levels[: sizes[0]]))
        e0_ref = float(np.mean(ref_levels[: cluster_sizes(ref_levels, tol)[0]]))
        shift = abs(e0 - e0_ref)
        converged = shift < 10 * tol * max(1.0, abs(e0))
    return VibronicSpectrum(levels, sizes, n_max, converged, ref, shift, res)


def rotor_degeneracy(N, L):
    """Dimension of the degree-L harmonic polynomials on S^{N-1}."""
    if L == 0:
        return 1
    return (2 * L + N - 2) * factorial(L + N - 3) // (factorial(L) * factorial(N - 2))


def rotor_spectrum(N, parity="odd", count=3):
    """Free particle on S^{N-1}: ``E_L = L (L + N - 2) / 2`` (unit moment of inertia).

    ``parity`` keeps odd L (antipodally odd wavefunctions, the sector selected
    by a sign-changing electronic state), even L, or both. For N = 2 the odd
    sector is reported in the trough angle, i.e. half-odd ``j = L / 2`` with
    ``E = j^2 / 2`` and twofold degeneracy; ``"antiperiodic"`` and
    ``"periodic"`` are accepted as aliases of odd and even.
    """
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise InvalidParameterError(f"N must be an integer >= 2, got {N!r}")
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    parity = {"antiperiodic": "odd", "periodic": "even"}.get(parity, parity)
    if parity not in ("odd", "even", "both"):
        raise InvalidParameterError(f"unknown parity {parity!r}")
    Ls = itertools.count(1, 2) if parity == "odd" else itertools.count(0, 2 if parity == "even" else 1)
    levels = []
    for L in itertools.islice(Ls, count):
        if N == 2:
            j = L / 2
            levels.append(RotorLevel(j, j * j / 2, rotor_degeneracy(2, L)))
        else:
            levels.append(RotorLevel(L, L * (L + N - 2) / 2, rotor_degeneracy(N, L)))
    return RotorSpectrum(N, parity, tuple(levels))


def vgsd_check(model, n_max, k=None, tol=DEGENERACY_TOL, max_dim=MAX_DIM):
    ratio = model.F**2 / model.omega**3
    if ratio < ADIABATIC_THRESHOLD:
        return VGSDReport(0, False, "not-applicable", ratio)
    spec = low_spectrum(model, n_max, k, tol, max_dim)
    g = spec.degeneracies[0]
    return VGSDReport(g, g == model.N, "ok" if spec.converged else "inconclusive", ratio, spec)
