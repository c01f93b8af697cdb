"""Dense matrix utilities: Stein solvers, Hermitian roots, random generators.

All matrices are plain :class:`numpy.ndarray` objects with ``complex128``
(or ``float64``) entries.  Everything here is a pure function of its inputs;
random generators take an explicit seed or :class:`numpy.random.Generator`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from .errors import (
    DimensionError,
    LosslessError,
    NotPositiveDefiniteError,
    NotStableError,
)

TOL_HERM = 1e-10
TOL_PD = 1e-10
TOL_UNIT = 1e-10
TOL_SQRT = 1e-12
STABILITY_MARGIN = 1e-8

__all__ = [
    "OutputNormalPair",
    "PDCheck",
    "as_matrix",
    "circle_quadrature_interpolant",
    "hermitian_power",
    "hermitian_sqrt",
    "is_positive_definite",
    "observability_gramian_min_eig",
    "quadrature_order",
    "random_output_normal_pair",
    "random_unitary",
    "solve_stein_sylvester",
    "solve_stein_symmetric",
    "spectral_radius",
]


def as_matrix(M, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Return ``M`` as a 2-D complex array, checking the shape if requested."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of shape {M.shape}")
    if rows is not None and M.shape[0] != rows:
        raise DimensionError(f"expected {rows} rows, got {M.shape[0]}")
    if cols is not None and M.shape[1] != cols:
        raise DimensionError(f"expected {cols} columns, got {M.shape[1]}")
    return M


def _ct(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def spectral_radius(A: np.ndarray) -> float:
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


class PDCheck(NamedTuple):
    """Outcome of :func:`is_positive_definite`."""

    ok: bool
    min_eigenvalue: float
    hermitian_residual: float


def is_positive_definite(M: np.ndarray, tol_herm: float = TOL_HERM,
                         tol_pd: float = TOL_PD) -> PDCheck:
    """Test whether ``M`` is Hermitian positive definite.

    ``M`` passes when ``||M - M*||_F <= tol_herm * ||M||_F`` and the smallest
    eigenvalue of its Hermitian part exceeds ``tol_pd * ||M||_2``.  Never
    raises for square input; the diagnostics are returned instead.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"square matrix required, got shape {M.shape}")
    if M.size == 0:
        return PDCheck(True, float("inf"), 0.0)
    scale = np.linalg.norm(M)
    herm_res = float(np.linalg.norm(M - _ct(M)) / scale) if scale > 0 else 0.0
    H = (M + _ct(M)) / 2
    eigs = np.linalg.eigvalsh(H)
    lam_min = float(eigs[0])
    norm2 = float(np.max(np.abs(eigs)))
    ok = herm_res <= tol_herm and lam_min > tol_pd * norm2
    return PDCheck(bool(ok), lam_min, herm_res)


def hermitian_power(M: np.ndarray, power: float, check: bool = True) -> np.ndarray:
    """``M**power`` for Hermitian positive definite ``M`` via ``eigh``."""
    M = np.asarray(M)
    if check:
        res = is_positive_definite(M)
        if not res.ok:
            raise NotPositiveDefiniteError(
                f"matrix is not Hermitian positive definite "
                f"(min eigenvalue {res.min_eigenvalue:.3e}, "
                f"hermitian residual {res.hermitian_residual:.3e})",
                res.min_eigenvalue,
            )
    H = (M + _ct(M)) / 2
    if np.iscomplexobj(H) and not np.any(H.imag):
        H = H.real
    w, Z = np.linalg.eigh(H)
    return (Z * w**power) @ _ct(Z)


def hermitian_sqrt(P: np.ndarray) -> np.ndarray:
    """The unique Hermitian positive square root of ``P``.

    Raises :class:`NotPositiveDefiniteError` if ``P`` is not Hermitian
    positive definite.
    """
    T = hermitian_power(P, 0.5)
    return (T + _ct(T)) / 2


def _check_stable(name: str, A: np.ndarray, margin: float = 0.0) -> None:
    rho = spectral_radius(A)
    if rho >= 1.0 - margin:
        raise NotStableError(name, rho)


def solve_stein_symmetric(W, U, V) -> np.ndarray:
    """Solve ``P - W* P W = U* U - V* V`` for ``P``.

    The Stein operator is linearized with Kronecker products and solved
    densely, which is adequate for the state sizes handled here (a few
    dozen at most).  The result is Hermitian up to rounding and is returned
    symmetrized.

    Parameters
    ----------
    W : (d, d) array
        Stable matrix.
    U, V : (p, d) arrays

    Raises
    ------
    NotStableError
        If the spectral radius of ``W`` is not below one.
    """
    W = as_matrix(W)
    d = W.shape[0]
    U = as_matrix(U, cols=d) if np.size(U) else np.zeros((0, d), complex)
    V = as_matrix(V, cols=d) if np.size(V) else np.zeros((0, d), complex)
    if W.shape != (d, d):
        raise DimensionError(f"W must be square, got {W.shape}")
    if d == 0:
        return np.zeros((0, 0), complex)
    _check_stable("W", W)
    rhs = _ct(U) @ U - _ct(V) @ V
    P = _solve_stein_general(_ct(W), W, rhs)
    return (P + _ct(P)) / 2


def solve_stein_sylvester(A, W, rhs) -> np.ndarray:
    """Solve ``Q - A* Q W = rhs`` for the ``(n, d)`` matrix ``Q``.

    Both ``A`` (n x n) and ``W`` (d x d) must be stable; the solution is
    then unique and equals the convergent series ``sum_k (A*)^k rhs W^k``.
    """
    A = as_matrix(A)
    W = as_matrix(W)
    n, d = A.shape[0], W.shape[0]
    if A.shape != (n, n) or W.shape != (d, d):
        raise DimensionError("A and W must be square")
    rhs = np.asarray(rhs, dtype=complex).reshape(n, d)
    if n == 0 or d == 0:
        return np.zeros((n, d), complex)
    _check_stable("A", A)
    _check_stable("W", W)
    return _solve_stein_general(_ct(A), W, rhs)


def _solve_stein_general(L: np.ndarray, R: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # X - L X R = rhs  <=>  (I - R^T kron L) vec(X) = vec(rhs), column-major vec
    n, d = rhs.shape
    op = np.eye(n * d, dtype=complex) - np.kron(R.T, L)
    x = np.linalg.solve(op, rhs.reshape(-1, order="F"))
    return x.reshape((n, d), order="F")


def random_unitary(m: int, seed=None, real: bool = False) -> np.ndarray:
    """Haar-distributed ``m x m`` unitary (orthogonal if ``real``) matrix.

    QR factorization of a Gaussian sample with the phases of ``diag(R)``
    moved into ``Q`` so the distribution is invariant under left and right
    multiplication.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    if real:
        Z = rng.standard_normal((m, m))
    else:
        Z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    Q = Q * ph
    return Q.astype(float) if real else Q.astype(complex)


def observability_gramian_min_eig(U: np.ndarray, W: np.ndarray) -> float:
    """Smallest eigenvalue of the observability Gramian of a stable pair."""
    if W.shape[0] == 0:
        return float("inf")
    G = solve_stein_symmetric(W, U, np.zeros_like(U))
    return float(np.linalg.eigvalsh(G)[0])


@dataclass(frozen=True, eq=False)
class OutputNormalPair:
    """Interpolation directions ``U`` (p x d) and nodes ``W`` (d x d).

    Satisfies ``U*U + W*W = I``, ``W`` stable and ``(U, W)`` observable.
    """

    U: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        W = as_matrix(self.W)
        d = W.shape[0]
        if W.shape != (d, d):
            raise DimensionError(f"W must be square, got {W.shape}")
        U = np.asarray(self.U, dtype=complex)
        if U.ndim == 1:
            U = U.reshape(-1, 1)
        if U.shape[1] != d:
            raise DimensionError(f"U must have {d} columns, got {U.shape}")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "W", W)

    @property
    def p(self) -> int:
        return self.U.shape[0]

    @property
    def delta(self) -> int:
        return self.W.shape[0]

    @property
    def is_real(self) -> bool:
        return not (np.any(self.U.imag) or np.any(self.W.imag))

    def normality_residual(self) -> float:
        d = self.delta
        return float(np.linalg.norm(_ct(self.U) @ self.U + _ct(self.W) @ self.W - np.eye(d)))

    def validate(self, tol_unit: float = TOL_UNIT) -> "OutputNormalPair":
        """Raise unless all three invariants hold; returns ``self``."""
        res = self.normality_residual()
        if res > tol_unit:
            raise LosslessError(f"pair is not output normal (residual {res:.3e})")
        _check_stable("W", self.W)
        # for an output normal pair the observability Gramian is I
        if observability_gramian_min_eig(self.U, self.W) <= TOL_PD:
            raise LosslessError("pair (U, W) is not observable")
        return self


def random_output_normal_pair(p: int, delta: int, seed=None, real: bool = False,
                              max_tries: int = 100) -> OutputNormalPair:
    """Random output normal pair taken from the ``(C, A)`` blocks of a unitary.

    A Haar unitary of size ``p + delta`` is read as a realization matrix
    ``[[D, C], [B, A]]``; its last ``delta`` columns are orthonormal, which
    is exactly the output normal condition.  Samples with ``W`` too close to
    the circle (margin 1e-8) or unobservable are redrawn.
    """
    if p < 1 or delta < 1:
        raise ValueError("p and delta must be >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        R = random_unitary(p + delta, rng, real=real)
        U, W = R[:p, p:], R[p:, p:]
        if spectral_radius(W) >= 1.0 - STABILITY_MARGIN:
            continue
        if observability_gramian_min_eig(U, W) <= TOL_PD:
            continue
        return OutputNormalPair(U, W)
    raise LosslessError(f"no admissible output normal pair after {max_tries} draws")


def quadrature_order(radius: float, tol: float = 1e-17, minimum: int = 64,
                     maximum: int = 1 << 20) -> int:
    """Smallest power of two ``N >= minimum`` with ``radius**N < tol``.

    The trapezoid rule on the circle converges like ``radius**N`` for
    rational integrands whose poles have modulus ``radius`` (or its inverse).
    """
    N = minimum
    while N < maximum and radius**N >= tol:
        N *= 2
    return N


def circle_quadrature_interpolant(G: Callable, U, W, N: int = 1024) -> np.ndarray:
    """Trapezoid-rule value of ``(1/2 pi i) \\oint G#(z) U (zI - W)^{-1} dz``.

    ``G`` is a callable returning the ``p x p`` value at a complex point; if it
    also has a vectorized ``evaluate(points)`` method, that is used.  Meant as
    an independent oracle for closed-form interpolation values.
    """
    if N < 64 or N & (N - 1):
        raise ValueError("N must be a power of two >= 64")
    U = as_matrix(U)
    W = as_matrix(W)
    d = W.shape[0]
    z = np.exp(2j * np.pi * np.arange(N) / N)
    zs = 1.0 / np.conj(z)
    evaluate = getattr(G, "evaluate", None)
    if evaluate is not None:
        vals = evaluate(zs)
    else:
        vals = np.stack([np.asarray(G(s), dtype=complex) for s in zs])
    sharp = np.conj(np.swapaxes(vals, -1, -2))
    res = z[:, None, None] * np.eye(d) - W
    # U (zI - W)^{-1} = solve((zI - W)^T, U^T)^T
    right = np.swapaxes(np.linalg.solve(np.swapaxes(res, -1, -2),
                                        np.broadcast_to(U.T, (N, d, U.shape[0]))), -1, -2)
    terms = sharp @ right * z[:, None, None]
    return terms.sum(axis=0) / N
