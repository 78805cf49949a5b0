from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jtgeom.errors import CapacityError, InvalidParameterError
from jtgeom.model import build_model
from jtgeom.trough import find_trough
from jtgeom.vibronic import (
    build_vibronic,
    cluster_sizes,
    low_spectrum,
    make_basis,
    rotor_degeneracy,
    rotor_spectrum,
    vgsd_check,
    vibrational_dim,
)


def dense_oracle(model, n_max):
    """Full product Fock space with per-mode cutoff, then restricted to total quanta <= n_max."""
    c = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, c)), 1)
    x1 = (a + a.T) / np.sqrt(2 * model.omega)
    I = np.eye(c)

    def mode_op(op, k):
        out = np.array([[1.0]])
        for j in range(model.M):
            out = np.kron(out, op if j == k else I)
        return out

    nvib = c**model.M
    Hn = np.zeros((nvib, nvib))
    for k in range(model.M):
        Hn += model.omega * mode_op(a.T @ a + 0.5 * I, k)
    H = np.kron(np.eye(model.N), Hn)
    for k in range(model.M):
        H += model.F * np.kron(model.V[k], mode_op(x1, k))
    basis = make_basis(model.N, model.M, n_max)
    # position of each occupation tuple in the product space
    prod = [int(np.ravel_multi_index(tuple(o), (c,) * model.M)) for o in basis.occupations]
    keep = [e * nvib + p for e in range(model.N) for p in prod]
    return H[np.ix_(keep, keep)]


def test_basis_size_and_ordering():
    b = make_basis(2, 2, 2)
    assert b.n_vib == vibrational_dim(2, 2) == 6
    assert [tuple(o) for o in b.occupations] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert b.flat(1, (1, 0)) == 7
    assert b.unflat(7) == (1, (1, 0))
    for M, n in [(2, 5), (5, 4)]:
        b = make_basis(3, M, n)
        assert b.dim == 3 * comb(n + M, M)
        for i in range(b.dim):
            assert b.flat(*b.unflat(i)) == i


def test_e_x_e_hand_built_matrix():
    F = 0.8
    a = F / np.sqrt(2)
    H = np.diag([1.0, 2, 2, 1, 2, 2])
    H[0, 2] = H[2, 0] = a  # sigma_z Q_z, upper state
    H[3, 5] = H[5, 3] = -a  # sigma_z Q_z, lower state
    H[0, 4] = H[4, 0] = a  # sigma_x Q_x
    H[1, 3] = H[3, 1] = a
    op = build_vibronic(build_model("e_x_e", F, 1.0), 1)
    np.testing.assert_allclose(op.matrix.toarray(), H, atol=1e-15)


@pytest.mark.parametrize("name, F, omega, n_max", [("e_x_e", 1.3, 1.0, 6), ("e_x_e", 2.0, 0.7, 4), ("t_e_t2", 1.1, 1.3, 2)])
def test_matches_dense_product_space(name, F, omega, n_max):
    m = build_model(name, F, omega)
    np.testing.assert_allclose(build_vibronic(m, n_max).matrix.toarray(), dense_oracle(m, n_max), atol=1e-13)


@pytest.mark.parametrize("name", ["e_x_e", "t_e_t2"])
def test_zero_coupling_ladder(name):
    m = build_model(name, 0.0, 1.5)
    H = build_vibronic(m, 3).matrix
    np.testing.assert_array_equal(H.toarray(), np.diag(H.diagonal()))
    s = low_spectrum(m, 3, k=m.N * (1 + m.M) + 1, check=False)
    assert s.degeneracies[0] == m.N
    assert s.degeneracies[1] == m.N * comb(1 + m.M - 1, m.M - 1)
    np.testing.assert_allclose(s.cluster_energies()[:2], [1.5 * m.M / 2, 1.5 * (1 + m.M / 2)])


@settings(max_examples=20, deadline=None)
@given(F=st.floats(0.1, 3.0), omega=st.floats(0.5, 2.0))
def test_ground_state_is_variational(F, omega):
    m = build_model("e_x_e", F, omega)
    e = [low_spectrum(m, n, check=False).levels[0] for n in (4, 6, 8)]
    assert e[0] >= e[1] - 1e-12 >= e[2] - 2e-12
    assert e[-1] <= omega * m.M / 2 + 1e-12


def test_iterative_and_dense_agree():
    m = build_model("e_x_e", 3.0, 1.0)
    op = build_vibronic(m, 40)
    assert op.matrix.shape[0] > 600
    dense = np.linalg.eigvalsh(op.matrix.toarray())[:8]
    s = low_spectrum(m, 40, k=8, check=False)
    np.testing.assert_allclose(s.levels, dense, atol=1e-9)
    assert s.residual < 1e-8


def test_e_x_e_ground_doublet():
    s = low_spectrum(build_model("e_x_e", 5.0, 1.0), 40)
    assert s.degeneracies[0] == 2
    assert s.ground_splitting < 1e-6
    assert s.converged and s.reference_n_max == 38


def test_t_e_t2_ground_triplet_and_rotor_clusters():
    s = low_spectrum(build_model("t_e_t2", 4.0, 1.0), 10, k=14, check=False)
    assert s.degeneracies[:2] == (3, 7)
    assert s.ground_splitting < 1e-4
    r = rotor_spectrum(3, "odd", 2)
    assert [lv.degeneracy for lv in r.levels] == [3, 7]


def test_weak_coupling_ground_is_electronic_multiplet():
    for name in ("e_x_e", "t_e_t2"):
        m = build_model(name, 0.0, 1.0)
        assert low_spectrum(m, 2, check=False).degeneracies[0] == m.N


def test_pseudorotation_gap_follows_rotor():
    prev = None
    for F in (3.0, 4.0, 5.0):
        m = build_model("e_x_e", F, 1.0)
        q2 = find_trough(m).Qstar ** 2
        ce = low_spectrum(m, 40, k=8, check=False).cluster_energies()
        scaled = (ce[1] - ce[0]) * q2
        # half-odd rotor: E_j = j^2 / (2 Qstar^2), first gap 1 / Qstar^2
        if prev is not None:
            assert abs(scaled - 1) < abs(prev - 1)
        prev = scaled
        # next rotor level: (9/8 - 1/8) versus (25/8 - 1/8)
        ratio = (ce[2] - ce[0]) / (ce[1] - ce[0])
    assert abs(prev - 1) < 0.1
    assert ratio == pytest.approx(3.0, rel=0.02)


def test_capacity_error():
    with pytest.raises(CapacityError):
        low_spectrum(build_model("t_e_t2", 4.0, 1.0), 40)
    with pytest.raises(CapacityError):
        make_basis(2, 2, 10, max_dim=100)


def test_bad_arguments():
    m = build_model("e_x_e", 1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        low_spectrum(m, 4, k=2)
    with pytest.raises(InvalidParameterError):
        make_basis(2, 2, 0)


def test_cluster_sizes():
    assert cluster_sizes([0.0, 1e-9, 1.0, 2.0, 2.0 + 1e-8], 1e-6) == (2, 1, 2)


def harmonic_dim(N, L):
    """Homogeneous degree-L polynomials in N variables minus those divisible by |x|^2."""
    return comb(L + N - 1, N - 1) - (comb(L + N - 3, N - 1) if L >= 2 else 0)


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_rotor_degeneracy_counts_harmonics(N):
    for L in range(8):
        assert rotor_degeneracy(N, L) == harmonic_dim(N, L)


def test_rotor_spectrum_values():
    r = rotor_spectrum(3, "odd", 3)
    assert [(lv.L, lv.energy, lv.degeneracy) for lv in r.levels] == [(1, 1.0, 3), (3, 6.0, 7), (5, 15.0, 11)]
    e = rotor_spectrum(3, "even", 2)
    assert [(lv.L, lv.degeneracy) for lv in e.levels] == [(0, 1), (2, 5)]
    two = rotor_spectrum(2, "antiperiodic", 3)
    assert [(lv.L, lv.energy, lv.degeneracy) for lv in two.levels] == [(0.5, 0.125, 2), (1.5, 1.125, 2), (2.5, 3.125, 2)]
    both = rotor_spectrum(4, "both", 4)
    assert [lv.L for lv in both.levels] == [0, 1, 2, 3]
    assert [lv.energy for lv in both.levels] == [L * (L + 2) / 2 for L in range(4)]
    with pytest.raises(InvalidParameterError):
        rotor_spectrum(1)
    with pytest.raises(InvalidParameterError):
        rotor_spectrum(3, "odd", 0)
    with pytest.raises(InvalidParameterError):
        rotor_spectrum(3, "sideways")


def test_vgsd_check():
    rep = vgsd_check(build_model("e_x_e", 5.0, 1.0), 40)
    assert rep.status == "ok" and rep.matches_vector_irrep and rep.ground_degeneracy == 2
    rep = vgsd_check(build_model("e_x_e", 1.0, 1.0), 20)
    assert rep.status == "not-applicable" and rep.spectrum is None
    rep = vgsd_check(build_model("t_e_t2", 4.0, 1.0), 10)
    assert rep.ground_degeneracy == 3 and rep.matches_vector_irrep
    assert rep.status in ("ok", "inconclusive")


def test_solver_failure_reports_residuals(monkeypatch):
    from scipy.sparse.linalg import ArpackNoConvergence

    import jtgeom.vibronic as vib
    from jtgeom.errors import SolverError

    def fail(H, k, **kw):
        x = np.zeros((H.shape[0], 1))
        x[0] = 1.0
        raise ArpackNoConvergence("no", np.array([0.5]), x)

    monkeypatch.setattr(vib, "eigsh", fail)
    with pytest.raises(SolverError) as info:
        low_spectrum(build_model("e_x_e", 3.0, 1.0), 40, check=False)
    assert len(info.value.residuals) == 1 and info.value.residuals[0] > 0
