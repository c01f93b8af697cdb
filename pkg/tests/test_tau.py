import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import sample_points
from lossless_schur.errors import LosslessError
from lossless_schur.jlossless import NudelmanData, phi_eval, random_admissible_data
from lossless_schur.numcore import OutputNormalPair, hermitian_sqrt, random_unitary
from lossless_schur.schur import BalancedRealization, forward_step
from lossless_schur.tau import tau_map, tau_map_with_root, u_zero_completion, v_matrix


def _ct(M):
    return M.conj().T


def _blockdiag(A, d):
    out = np.eye(A.shape[0] + d, dtype=complex)
    out[:A.shape[0], :A.shape[0]] = A
    return out


def test_zero_v_gives_completion():
    pr = random_admissible_data(2, 3, seed=1).pair
    pair = tau_map(NudelmanData.create(pr.W, pr.U, np.zeros_like(pr.U)))
    np.testing.assert_allclose(pair.Vmat, np.eye(5), atol=1e-14)
    np.testing.assert_allclose(pair.Umat, u_zero_completion(pr), atol=1e-13)


def test_scalar_hand_computed():
    # w = 0, u = 1, v = 1/2: P = 3/4, Vt = 1/sqrt(3), X = 0, Y = 1, Z = K = 4/3, L = 0
    data = NudelmanData.create([[0.0]], [[1.0]], [[0.5]])
    assert data.P[0, 0] == pytest.approx(0.75, abs=1e-15)
    pair = tau_map(data)
    s = np.sqrt(3) / 2
    np.testing.assert_allclose(pair.Vmat, [[s, 0.5], [-0.5, s]], atol=1e-14)
    np.testing.assert_allclose(pair.Umat, [[0, 1], [1, 0]], atol=1e-14)
    assert pair.unitarity_residual() < 1e-14


@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 5))
def test_pair_unitary_and_blocks(seed, p, d):
    pair = tau_map(random_admissible_data(p, d, seed=seed))
    assert pair.unitarity_residual() < 1e-12
    assert pair.M_u.shape == (p, p) and pair.kappa_v.shape == (d, d)
    assert pair.alpha_u.shape == (p, d) and pair.beta_v.shape == (p, d)


def test_kappa_v_formula():
    data = random_admissible_data(2, 3, seed=2)
    T = hermitian_sqrt(data.P)
    Vt = data.V @ np.linalg.inv(T)
    K = np.eye(3) + _ct(Vt) @ Vt
    w, Z = np.linalg.eigh(K)
    np.testing.assert_allclose(tau_map(data).kappa_v, (Z / np.sqrt(w)) @ _ct(Z), atol=1e-13)


def test_v_matrix_unitary():
    rng = np.random.default_rng(0)
    Vt = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    M = v_matrix(Vt)
    assert np.linalg.norm(_ct(M) @ M - np.eye(5)) < 1e-13


def test_hermitian_root_matches_tau_map():
    data = random_admissible_data(2, 3, seed=3)
    a, b = tau_map(data), tau_map_with_root(data, hermitian_sqrt(data.P))
    np.testing.assert_allclose(a.Umat, b.Umat, atol=1e-14)
    np.testing.assert_allclose(a.Vmat, b.Vmat, atol=1e-14)


def test_rotated_root_same_phi_similar_realization():
    data = random_admissible_data(2, 3, seed=4)
    O = random_unitary(3, seed=5)
    a = tau_map(data)
    b = tau_map_with_root(data, O @ hermitian_sqrt(data.P))
    for z in sample_points(np.random.default_rng(6), 8):
        assert np.abs(phi_eval(a, z) - phi_eval(b, z)).max() < 1e-10
    G0 = BalancedRealization.constant(random_unitary(2, seed=7))
    Ra, Rb = forward_step(G0, a), forward_step(G0, b)
    # the new states differ by the similarity O
    Rs = Ra.similar(_ct(O))
    assert np.abs(Rs.matrix - Rb.matrix).max() < 1e-12


def test_root_validation():
    data = random_admissible_data(2, 2, seed=8)
    with pytest.raises(LosslessError):
        tau_map_with_root(data, 2 * hermitian_sqrt(data.P))


def test_u_zero_completion_scalar():
    pr = OutputNormalPair(np.array([[1.0]]), np.array([[0.0]]))
    np.testing.assert_allclose(u_zero_completion(pr), [[0, 1], [1, 0]], atol=1e-15)


@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 4), st.booleans())
def test_u_zero_completion_unitary(seed, p, d, real):
    pr = random_admissible_data(p, d, seed=seed, real=real).pair
    U0 = u_zero_completion(pr)
    assert np.linalg.norm(_ct(U0) @ U0 - np.eye(p + d)) < 1e-13


def test_u_zero_completion_complex_eigenvalues():
    # real 2x2 node with a complex conjugate eigenvalue pair
    for seed in range(50):
        pr = random_admissible_data(2, 2, seed=seed, real=True).pair
        if np.abs(np.linalg.eigvals(pr.W).imag).min() > 1e-3:
            break
    U0 = u_zero_completion(pr)
    assert np.linalg.norm(U0.T @ U0 - np.eye(4)) < 1e-13


def test_equivariance():
    data = random_admissible_data(2, 3, seed=9)
    Lam, Pi = random_unitary(2, seed=10), random_unitary(2, seed=11)
    a = tau_map(data)
    b = tau_map(NudelmanData.create(data.W, Lam @ data.U, Pi @ data.V))
    L, P = _blockdiag(Lam, 3), _blockdiag(Pi, 3)
    assert np.abs(L @ a.Umat @ _ct(L) - b.Umat).max() < 1e-11
    assert np.abs(P @ a.Vmat @ _ct(P) - b.Vmat).max() < 1e-11


def test_state_similarity_invariance():
    data = random_admissible_data(2, 3, seed=12)
    S = random_unitary(3, seed=13)
    other = NudelmanData.create(_ct(S) @ data.W @ S, data.U @ S, data.V @ S)
    a, b = tau_map(data), tau_map(other)
    for z in sample_points(np.random.default_rng(14), 10):
        assert np.abs(phi_eval(a, z) - phi_eval(b, z)).max() < 1e-10


def test_smooth_in_v():
    data = random_admissible_data(2, 2, seed=15)
    direction = np.random.default_rng(16).standard_normal(data.V.shape)
    base = tau_map(data)
    ratios = []
    for eps in (1e-4, 1e-5):
        moved = tau_map(NudelmanData.create(data.W, data.U, data.V + eps * direction))
        ratios.append(max(np.linalg.norm(moved.Umat - base.Umat),
                          np.linalg.norm(moved.Vmat - base.Vmat)) / eps)
    assert ratios[0] < 100 and abs(ratios[0] - ratios[1]) < 1e-2 * ratios[0]
