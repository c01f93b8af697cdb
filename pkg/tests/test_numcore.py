import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import stein_series
from lossless_schur.errors import LosslessError, NotPositiveDefiniteError, NotStableError
from lossless_schur.numcore import (
    OutputNormalPair,
    circle_quadrature_interpolant,
    hermitian_sqrt,
    is_positive_definite,
    observability_gramian_min_eig,
    quadrature_order,
    random_output_normal_pair,
    random_unitary,
    solve_stein_sylvester,
    solve_stein_symmetric,
    spectral_radius,
)


def _ct(M):
    return M.conj().T


def _stable(rng, d, radius=0.9):
    W = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return W * (radius / spectral_radius(W))


# hermitian_sqrt ------------------------------------------------------------

def test_sqrt_of_identity():
    assert np.allclose(hermitian_sqrt(np.eye(3)), np.eye(3), atol=1e-15)


def test_sqrt_of_diagonal():
    np.testing.assert_allclose(hermitian_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)


@given(st.integers(0, 10**6), st.integers(1, 6))
def test_sqrt_squares_back(seed, m):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    P = _ct(X) @ X + 0.1 * np.eye(m)
    T = hermitian_sqrt(P)
    assert np.linalg.norm(T - _ct(T)) < 1e-13 * np.linalg.norm(T)
    assert np.linalg.eigvalsh(T)[0] > 0
    assert np.linalg.norm(T @ T - P) < 1e-12 * np.linalg.norm(P)
    # idempotence on Hermitian positive input
    assert np.linalg.norm(hermitian_sqrt(T @ T) - T) < 1e-12 * np.linalg.norm(T)


def test_sqrt_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError):
        hermitian_sqrt(np.diag([1.0, -1.0]))


# is_positive_definite ------------------------------------------------------

def test_pd_identity():
    chk = is_positive_definite(np.eye(2))
    assert chk.ok and chk.min_eigenvalue == pytest.approx(1.0)


def test_pd_indefinite():
    assert not is_positive_definite(np.diag([1.0, -1.0])).ok


def test_pd_non_hermitian():
    assert not is_positive_definite(np.array([[1.0, 1.0], [0.0, 1.0]])).ok


# Stein solvers -------------------------------------------------------------

def test_stein_zero_w():
    rng = np.random.default_rng(1)
    U = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    V = rng.standard_normal((2, 3))
    P = solve_stein_symmetric(np.zeros((3, 3)), U, V)
    np.testing.assert_allclose(P, _ct(U) @ U - _ct(V) @ V, atol=1e-14)


def test_stein_output_normal_zero_v():
    pair = random_output_normal_pair(2, 4, seed=3)
    P = solve_stein_symmetric(pair.W, pair.U, np.zeros_like(pair.U))
    assert np.linalg.norm(P - np.eye(4)) < 1e-12


@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 10))
def test_stein_residual_and_series(seed, p, d):
    rng = np.random.default_rng(seed)
    W = _stable(rng, d, 0.9)
    U = rng.standard_normal((p, d)) + 1j * rng.standard_normal((p, d))
    V = rng.standard_normal((p, d)) + 1j * rng.standard_normal((p, d))
    S = solve_stein_symmetric(W, U, V)
    rhs = _ct(U) @ U - _ct(V) @ V
    scale = np.linalg.norm(S) + np.linalg.norm(U) ** 2 + np.linalg.norm(V) ** 2
    assert np.linalg.norm(S - _ct(W) @ S @ W - rhs) <= 1e-12 * scale
    ref = stein_series(_ct(W), W, rhs)
    assert np.linalg.norm(S - ref) <= 1e-10 * max(1.0, np.linalg.norm(ref))


def test_stein_rejects_unstable():
    with pytest.raises(NotStableError):
        solve_stein_symmetric(np.array([[1.0]]), np.ones((1, 1)), np.zeros((1, 1)))


def test_sylvester_degenerate():
    rng = np.random.default_rng(2)
    rhs = rng.standard_normal((3, 2))
    np.testing.assert_allclose(solve_stein_sylvester(np.zeros((3, 3)), _stable(rng, 2), rhs), rhs)
    np.testing.assert_allclose(solve_stein_sylvester(_stable(rng, 3), np.zeros((2, 2)), rhs), rhs)


def test_sylvester_balanced_pair_gives_identity():
    # (C, A) of a unitary realization matrix: Q - A* Q A = C* C has Q = I
    R = random_unitary(5, seed=4)
    C, A = R[:2, 2:], R[2:, 2:]
    Q = solve_stein_sylvester(A, A, _ct(C) @ C)
    assert np.linalg.norm(Q - np.eye(3)) < 1e-12


@given(st.integers(0, 10**6), st.integers(1, 6), st.integers(1, 6))
def test_sylvester_series(seed, n, d):
    rng = np.random.default_rng(seed)
    A, W = _stable(rng, n, 0.85), _stable(rng, d, 0.85)
    rhs = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    Q = solve_stein_sylvester(A, W, rhs)
    assert np.linalg.norm(Q - _ct(A) @ Q @ W - rhs) < 1e-12 * (np.linalg.norm(Q) + np.linalg.norm(rhs))
    ref = stein_series(_ct(A), W, rhs)
    assert np.linalg.norm(Q - ref) < 1e-10 * np.linalg.norm(ref)


def test_sylvester_rejects_unstable():
    with pytest.raises(NotStableError):
        solve_stein_sylvester(np.eye(2), np.zeros((1, 1)), np.ones((2, 1)))


# random generators ---------------------------------------------------------

def test_random_unitary_scalar():
    q = random_unitary(1, seed=0)
    assert abs(abs(q[0, 0]) - 1) < 1e-15


@pytest.mark.parametrize("real", [False, True])
def test_random_unitary_orthonormal(real):
    Q = random_unitary(4, seed=7, real=real)
    assert np.linalg.norm(_ct(Q) @ Q - np.eye(4)) < 1e-13
    assert (not real) or not np.iscomplexobj(Q) or not np.any(Q.imag)


def test_random_unitary_reproducible():
    np.testing.assert_array_equal(random_unitary(3, seed=11), random_unitary(3, seed=11))
    assert not np.allclose(random_unitary(3, seed=11), random_unitary(3, seed=12))


def test_random_unitary_haar_mean():
    # Haar: E[Q] = 0 and E|Q_ij|^2 = 1/m
    rng = np.random.default_rng(0)
    Qs = np.array([random_unitary(3, rng) for _ in range(4000)])
    assert np.abs(Qs.mean(axis=0)).max() < 0.05
    np.testing.assert_allclose((np.abs(Qs) ** 2).mean(axis=0), 1 / 3, atol=0.03)


def test_scalar_output_normal_pair():
    pr = random_output_normal_pair(1, 1, seed=5)
    u, w = pr.U[0, 0], pr.W[0, 0]
    assert abs(abs(u) ** 2 + abs(w) ** 2 - 1) < 1e-14
    assert abs(w) < 1


@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 5), st.booleans())
def test_output_normal_pair_invariants(seed, p, d, real):
    pr = random_output_normal_pair(p, d, seed=seed, real=real)
    assert pr.normality_residual() <= 1e-10
    assert spectral_radius(pr.W) < 1 - 1e-8
    assert observability_gramian_min_eig(pr.U, pr.W) > 1e-10
    assert pr.is_real == real or not real


def test_output_normal_pair_reproducible():
    a, b = random_output_normal_pair(2, 3, seed=9), random_output_normal_pair(2, 3, seed=9)
    np.testing.assert_array_equal(a.U, b.U)
    np.testing.assert_array_equal(a.W, b.W)


def test_pair_validation_rejects_non_normal():
    with pytest.raises(LosslessError):
        OutputNormalPair(np.array([[1.0]]), np.array([[0.5]])).validate()


def test_pair_validation_rejects_unobservable():
    # a decoupled state with |w| = 1 cannot be output normal and stable;
    # an unobservable state must be caught by the Gramian check
    U = np.array([[1.0, 0.0]])
    W = np.array([[0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(LosslessError):
        OutputNormalPair(U, W).validate()


# quadrature oracle ---------------------------------------------------------

def test_quadrature_constant_identity():
    U = np.array([[1.0], [2.0]])
    V = circle_quadrature_interpolant(lambda z: np.eye(2), U, np.zeros((1, 1)), N=64)
    np.testing.assert_allclose(V, U, atol=1e-14)


def test_quadrature_self_convergence_scalar_blaschke():
    a = 0.6 + 0.2j

    def b(z):
        return np.array([[(1 - np.conj(a) * z) / (z - a)]])

    U, W = np.array([[0.8]]), np.array([[0.6]])
    V512 = circle_quadrature_interpolant(b, U, W, N=512)
    V1024 = circle_quadrature_interpolant(b, U, W, N=1024)
    assert np.abs(V512 - V1024).max() < 1e-12


def test_quadrature_closed_form_scalar():
    # scalar Nudelman value for g(z) = 1/z: residue at z = w of conj(g(1/conj z)) u/(z - w) = w u
    u, w = 0.8, 0.6
    V = circle_quadrature_interpolant(lambda z: np.array([[1 / z]]), [[u]], [[w]], N=256)
    assert abs(V[0, 0] - w * u) < 1e-14


def test_quadrature_geometric_convergence():
    a = 0.7

    def g(z):
        return np.array([[(1 - a * z) / (z - a)]])

    exact = circle_quadrature_interpolant(g, [[0.6]], [[0.8]], N=4096)
    errs = [abs(circle_quadrature_interpolant(g, [[0.6]], [[0.8]], N=N) - exact)[0, 0]
            for N in (64, 128)]
    assert errs[1] <= 0.5 * errs[0] or errs[1] < 1e-15


def test_quadrature_rejects_bad_order():
    with pytest.raises(ValueError):
        circle_quadrature_interpolant(lambda z: np.eye(1), [[1.0]], [[0.0]], N=100)


def test_quadrature_order_monotone():
    assert quadrature_order(0.5) == 64
    assert quadrature_order(0.99) > quadrature_order(0.9)
