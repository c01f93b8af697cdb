"""J-lossless factors and linear fractional transformations.

Three kinds of ``2p x 2p`` J-lossless functions appear in the Schur
recursion: the interpolation factor built from Nudelman data, the factor
``Phi`` built from a unitary pair, and constant J-unitary matrices.  They are
all wrapped by :class:`JLosslessFactor`, which is callable at a point.
Transfer functions are passed around as callables ``z -> (p, p) array``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable

import numpy as np

from .errors import (
    DimensionError,
    InadmissibleDataError,
    LosslessError,
    SingularEvaluationError,
)
from .numcore import (
    OutputNormalPair,
    as_matrix,
    is_positive_definite,
    random_output_normal_pair,
    solve_stein_symmetric,
)

if TYPE_CHECKING:
    from .tau import UnitaryPair

Evaluator = Callable[[complex], np.ndarray]


def signature(p: int) -> np.ndarray:
    """``J = diag(I_p, -I_p)``."""
    return np.diag(np.r_[np.ones(p), -np.ones(p)]).astype(complex)


def _ct(M):
    return M.conj().T


@dataclass(frozen=True, eq=False)
class NudelmanData:
    """Admissible interpolation triple ``(W, U, V)`` with its Stein solution ``P``.

    Use :meth:`create` rather than the constructor; it solves the Stein
    equation and rejects data whose ``P`` is not positive definite.
    """

    W: np.ndarray
    U: np.ndarray
    V: np.ndarray
    P: np.ndarray
    _theta_right: np.ndarray = field(repr=False, compare=False, default=None)

    @classmethod
    def create(cls, W, U, V, output_normal: bool = False) -> "NudelmanData":
        W = as_matrix(W) if np.size(W) else np.zeros((0, 0), complex)
        d = W.shape[0]
        U = np.asarray(U, dtype=complex)
        U = U.reshape(-1, d) if d else U.reshape(U.shape[0] if U.ndim == 2 else 0, 0)
        V = np.asarray(V, dtype=complex).reshape(U.shape)
        if output_normal:
            OutputNormalPair(U, W).validate()
        P = solve_stein_symmetric(W, U, V)
        chk = is_positive_definite(P)
        if not chk.ok:
            raise InadmissibleDataError(
                f"Stein solution is not positive definite (min eigenvalue "
                f"{chk.min_eigenvalue:.3e})", chk.min_eigenvalue)
        p = U.shape[0]
        if d:
            C = np.vstack([U, V])
            right = np.linalg.solve(P, np.linalg.solve(_ct(np.eye(d) - W), _ct(C))) @ signature(p)
        else:
            right = np.zeros((0, 2 * p), complex)
        return cls(W, U, V, P, right)

    @classmethod
    def from_pair(cls, pair: OutputNormalPair, V) -> "NudelmanData":
        return cls.create(pair.W, pair.U, V)

    @property
    def p(self) -> int:
        return self.U.shape[0]

    @property
    def delta(self) -> int:
        return self.W.shape[0]

    @property
    def pair(self) -> OutputNormalPair:
        return OutputNormalPair(self.U, self.W)

    def stein_residual(self) -> float:
        """Relative residual of the Stein equation for the cached ``P``."""
        P, W, U, V = self.P, self.W, self.U, self.V
        r = P - _ct(W) @ P @ W - (_ct(U) @ U - _ct(V) @ V)
        scale = np.linalg.norm(P) + np.linalg.norm(U) ** 2 + np.linalg.norm(V) ** 2
        return float(np.linalg.norm(r) / scale) if scale else 0.0


def random_admissible_data(p: int, delta: int, seed=None, real: bool = False,
                           strength: float = 0.9) -> NudelmanData:
    """Random admissible triple on a random output normal pair.

    ``V`` is a Gaussian direction scaled so that ``P = I - V-Gramian`` keeps
    its smallest eigenvalue above ``1 - strength``.
    """
    if not 0 <= strength < 1:
        raise ValueError("strength must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    pair = random_output_normal_pair(p, delta, rng, real=real)
    V0 = rng.standard_normal((p, delta))
    if not real:
        V0 = V0 + 1j * rng.standard_normal((p, delta))
    S = solve_stein_symmetric(pair.W, V0, np.zeros_like(V0))
    t = np.sqrt(rng.uniform(0, strength) / np.linalg.eigvalsh(S)[-1])
    return NudelmanData.create(pair.W, pair.U, t * V0)


def sharp_eval(G: Evaluator, z: complex) -> np.ndarray:
    """``G#(z) = G(1/conj(z))*``."""
    if z == 0:
        raise SingularEvaluationError("G# is evaluated at 1/conj(z); z = 0 maps to infinity")
    return _ct(np.asarray(G(1.0 / np.conj(z)), dtype=complex))


def theta_eval(data: NudelmanData, z: complex) -> np.ndarray:
    """Evaluate the interpolation factor
    ``I - (z-1) C (zI - W)^{-1} P^{-1} (I - W)^{-*} C* J`` with ``C = [U; V]``.
    """
    p, d = data.p, data.delta
    if d == 0:
        return np.eye(2 * p, dtype=complex)
    C = np.vstack([data.U, data.V])
    res = z * np.eye(d) - data.W
    try:
        mid = np.linalg.solve(res, data._theta_right)
    except np.linalg.LinAlgError as exc:
        raise SingularEvaluationError(f"zI - W is singular at z={z}") from exc
    return np.eye(2 * p, dtype=complex) - (z - 1) * (C @ mid)


def _pencil_solve(pair: "UnitaryPair", z: complex, rhs: np.ndarray) -> np.ndarray:
    pencil = pair.kappa_v * z - pair.kappa_u
    try:
        sol = np.linalg.solve(pencil, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularEvaluationError(f"kappa_v z - kappa_u is singular at z={z}") from exc
    if not np.all(np.isfinite(sol)):
        raise SingularEvaluationError(f"kappa_v z - kappa_u is singular at z={z}")
    return sol


def phi_eval(pair: "UnitaryPair", z: complex) -> np.ndarray:
    """Evaluate ``Phi(z) = M + alpha (kappa_v z - kappa_u)^{-1} beta* J diag(I, z I)``."""
    p = pair.p
    J = signature(p)
    scale = np.diag(np.r_[np.ones(p), z * np.ones(p)])
    if pair.delta == 0:
        return pair.M.astype(complex)
    return pair.M + pair.alpha @ _pencil_solve(pair, z, _ct(pair.beta) @ J @ scale)


def h_constant(pair: "UnitaryPair") -> np.ndarray:
    """The constant J-unitary ``H = M + alpha (kappa_v - kappa_u)^{-1} beta* J``.

    Equals ``Phi(1)``; raises :class:`SingularEvaluationError` if
    ``kappa_v - kappa_u`` is singular.
    """
    diff = pair.kappa_v - pair.kappa_u
    if pair.delta and np.linalg.cond(diff) > 1e14:
        raise SingularEvaluationError("kappa_v - kappa_u is singular")
    return phi_eval(pair, 1.0)


@dataclass(frozen=True, eq=False)
class JLosslessFactor:
    """A ``2p x 2p`` J-lossless function of one of three kinds.

    ``kind`` is ``"theta"`` (payload :class:`NudelmanData`), ``"phi"``
    (payload a unitary pair) or ``"constant"`` (payload a J-unitary matrix).
    ``right`` optionally multiplies the value on the right by a constant,
    which is how ``Theta H`` is represented.
    """

    kind: str
    payload: Any
    right: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("theta", "phi", "constant"):
            raise ValueError(f"unknown factor kind {self.kind!r}")

    @classmethod
    def theta(cls, data: NudelmanData, H: np.ndarray | None = None) -> "JLosslessFactor":
        return cls("theta", data, H)

    @classmethod
    def phi(cls, pair: "UnitaryPair") -> "JLosslessFactor":
        return cls("phi", pair)

    @classmethod
    def constant(cls, H) -> "JLosslessFactor":
        H = as_matrix(H)
        if H.shape[0] != H.shape[1] or H.shape[0] % 2:
            raise DimensionError("constant J-lossless factor must be 2p x 2p")
        return cls("constant", H)

    @property
    def p(self) -> int:
        if self.kind == "constant":
            return self.payload.shape[0] // 2
        return self.payload.p

    def __call__(self, z: complex) -> np.ndarray:
        if self.kind == "theta":
            val = theta_eval(self.payload, z)
        elif self.kind == "phi":
            val = phi_eval(self.payload, z)
        else:
            val = self.payload
        return val if self.right is None else val @ self.right


def lft_matrix(Theta: np.ndarray, F: np.ndarray) -> np.ndarray:
    """``(T11 F + T12)(T21 F + T22)^{-1}`` for constant matrices."""
    p = F.shape[0]
    if Theta.shape != (2 * p, 2 * p):
        raise DimensionError(f"Theta must be {2 * p}x{2 * p}, got {Theta.shape}")
    num = Theta[:p, :p] @ F + Theta[:p, p:]
    den = Theta[p:, :p] @ F + Theta[p:, p:]
    # right division num @ den^{-1}
    try:
        out = np.linalg.solve(den.T, num.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularEvaluationError("LFT denominator is singular") from exc
    if not np.all(np.isfinite(out)) or np.linalg.cond(den) > 1e14:
        raise SingularEvaluationError("LFT denominator is singular")
    return out


def lft_apply(Theta: Callable | np.ndarray, F: Callable | np.ndarray, z: complex) -> np.ndarray:
    """Value at ``z`` of the linear fractional transform ``T_Theta(F)``.

    ``Theta`` and ``F`` may each be a callable of ``z`` or a constant matrix.
    Failures are reported per point via :class:`SingularEvaluationError`.
    """
    Tz = Theta(z) if callable(Theta) else np.asarray(Theta, dtype=complex)
    Fz = F(z) if callable(F) else np.asarray(F, dtype=complex)
    return lft_matrix(np.asarray(Tz, dtype=complex), np.asarray(Fz, dtype=complex))


@dataclass(frozen=True, eq=False)
class JLosslessReport:
    circle_residual: float
    exterior_excess: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.circle_residual <= self.tol and self.exterior_excess <= self.tol


def is_j_lossless(F: Callable, samples: int = 20, seed=0, tol: float = 1e-10,
                  exterior_radius: float = 2.0) -> JLosslessReport:
    """Sample ``F J F* = J`` on the circle and ``F J F* <= J`` at ``|z| = 2``.

    Returns the worst circle residual (Frobenius) and the largest eigenvalue
    of ``F J F* - J`` outside the disk, both scaled by ``max(1, |F|^2)``.
    """
    if samples < 8:
        raise ValueError("samples must be >= 8")
    rng = np.random.default_rng(seed)
    F0 = np.asarray(F(1.0 + 0j))
    J = signature(F0.shape[0] // 2)
    circ = 0.0
    ext = -np.inf
    for theta in rng.uniform(0, 2 * np.pi, samples):
        z = np.exp(1j * theta)
        Fz = np.asarray(F(z))
        scale = max(1.0, np.linalg.norm(Fz, 2) ** 2)
        circ = max(circ, np.linalg.norm(Fz @ J @ _ct(Fz) - J) / scale)
        Fz = np.asarray(F(exterior_radius * z))
        scale = max(1.0, np.linalg.norm(Fz, 2) ** 2)
        M = Fz @ J @ _ct(Fz) - J
        ext = max(ext, np.linalg.eigvalsh((M + _ct(M)) / 2)[-1] / scale)
    return JLosslessReport(float(circ), float(ext), tol)


def _check_unitary(name: str, M: np.ndarray, tol: float = 1e-10) -> None:
    if M.shape[0] != M.shape[1] or np.linalg.norm(_ct(M) @ M - np.eye(M.shape[0])) > tol:
        raise LosslessError(f"{name} is not unitary")


def equivariance_transform(data: NudelmanData, Lam, Pi) -> NudelmanData:
    """Return the data ``(W, Lam U, Pi V)`` for unitary ``Lam`` and ``Pi``.

    Conjugating the interpolation factor by ``diag(Lam, Pi)`` gives the factor
    of the transformed data, and the induced LFT satisfies
    ``T'(Lam F Pi*) = Lam T(F) Pi*``.
    """
    Lam = as_matrix(Lam, data.p, data.p)
    Pi = as_matrix(Pi, data.p, data.p)
    _check_unitary("Lambda", Lam)
    _check_unitary("Pi", Pi)
    return NudelmanData.create(data.W, Lam @ data.U, Pi @ data.V)
