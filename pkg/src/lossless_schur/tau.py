"""Closed-form unitary pairs attached to Nudelman data.

Given admissible data ``(W, U, V)`` with ``(U, W)`` output normal, the map
:func:`tau_map` returns two ``(p+d) x (p+d)`` unitary matrices whose blocks
drive the state-space recursion of one Schur step.  The completions used
are the canonical ones (Hermitian positive roots throughout); only the
square root ``T`` of the Stein solution can be overridden, through
:func:`tau_map_with_root`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, LosslessError, NotStableError
from .jlossless import NudelmanData
from .numcore import OutputNormalPair, hermitian_power, hermitian_sqrt, spectral_radius


def _ct(M):
    return M.conj().T


@dataclass(frozen=True, eq=False)
class UnitaryPair:
    """Unitary matrices ``(Umat, Vmat)`` partitioned with block sizes ``(p, delta)``.

    Each matrix reads ``[[M, alpha], [beta*, kappa]]``, with ``M`` p x p,
    ``alpha`` and ``beta`` p x delta and ``kappa`` delta x delta.
    """

    Umat: np.ndarray
    Vmat: np.ndarray
    p: int

    def __post_init__(self):
        m = self.Umat.shape[0]
        if self.Umat.shape != (m, m) or self.Vmat.shape != (m, m) or not 0 < self.p <= m:
            raise DimensionError("unitary pair blocks have inconsistent sizes")

    @property
    def delta(self) -> int:
        return self.Umat.shape[0] - self.p

    @property
    def M_u(self):
        return self.Umat[: self.p, : self.p]

    @property
    def alpha_u(self):
        return self.Umat[: self.p, self.p:]

    @property
    def beta_u(self):
        return _ct(self.Umat[self.p:, : self.p])

    @property
    def kappa_u(self):
        return self.Umat[self.p:, self.p:]

    @property
    def M_v(self):
        return self.Vmat[: self.p, : self.p]

    @property
    def alpha_v(self):
        return self.Vmat[: self.p, self.p:]

    @property
    def beta_v(self):
        return _ct(self.Vmat[self.p:, : self.p])

    @property
    def kappa_v(self):
        return self.Vmat[self.p:, self.p:]

    @property
    def M(self):
        p = self.p
        out = np.zeros((2 * p, 2 * p), dtype=complex)
        out[:p, :p] = self.M_u
        out[p:, p:] = self.M_v
        return out

    @property
    def alpha(self):
        return np.vstack([self.alpha_u, self.alpha_v])

    @property
    def beta(self):
        return np.vstack([self.beta_u, self.beta_v])

    def unitarity_residual(self) -> float:
        m = self.Umat.shape[0]
        I = np.eye(m)
        return float(max(np.linalg.norm(_ct(self.Umat) @ self.Umat - I),
                         np.linalg.norm(_ct(self.Vmat) @ self.Vmat - I)))


def xy_blocks(U: np.ndarray, W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``X = I - U (I - W*)^{-1} U*`` and ``Y = (I - W)(I - W*)^{-1} U*``."""
    d = W.shape[0]
    p = U.shape[0]
    if spectral_radius(W) >= 1.0:
        raise NotStableError("W", spectral_radius(W))
    G = np.linalg.solve(np.eye(d) - _ct(W), _ct(U))
    X = np.eye(p) - U @ G
    Y = (np.eye(d) - W) @ G
    return X, Y


def u_zero_completion(pair: OutputNormalPair) -> np.ndarray:
    """Unitary completion ``[[X, U], [Y, W]]`` of the column ``[U; W]``."""
    X, Y = xy_blocks(pair.U, pair.W)
    return np.block([[X, pair.U], [Y, pair.W]])


def v_matrix(Vt: np.ndarray) -> np.ndarray:
    """The canonical unitary built from ``Vt = V T^{-1}``."""
    p, d = Vt.shape
    Mv = hermitian_power(np.eye(p) + Vt @ _ct(Vt), -0.5, check=False)
    Kv = hermitian_power(np.eye(d) + _ct(Vt) @ Vt, -0.5, check=False)
    return np.block([[Mv, Vt @ Kv], [-_ct(Vt) @ Mv, Kv]])


def tau_map_with_root(data: NudelmanData, T: np.ndarray, tol: float = 1e-10) -> UnitaryPair:
    """Unitary pair of ``data`` computed with an arbitrary root ``T*T = P``.

    With ``T`` the Hermitian root this is :func:`tau_map`.  Other roots
    ``T' = O T`` (``O`` unitary) leave the induced LFT unchanged and move the
    resulting realization by the state similarity ``O``.
    """
    U, W, V, P = data.U, data.W, data.V, data.P
    p, d = data.p, data.delta
    T = np.asarray(T, dtype=complex)
    if T.shape != (d, d):
        raise DimensionError(f"T must be {d}x{d}")
    scale = max(1.0, np.linalg.norm(P))
    if np.linalg.norm(_ct(T) @ T - P) > tol * scale:
        raise LosslessError("T*T does not reproduce the Stein solution P")
    if np.linalg.cond(T) > 1e12:
        raise LosslessError("square root T is singular")
    Tinv = np.linalg.inv(T)
    Ut, Wt, Vt = U @ Tinv, T @ W @ Tinv, V @ Tinv
    Vmat = v_matrix(Vt)

    X, Y = xy_blocks(U, W)
    Z = _ct(X) @ X + _ct(Y) @ np.linalg.solve(P, Y)
    L = _ct(Ut) @ X + _ct(Wt) @ T @ Y
    K = _ct(Ut) @ Ut + _ct(Wt) @ Wt
    K = (K + _ct(K)) / 2
    Zh = hermitian_sqrt(Z)
    Kinv_half = hermitian_power(K, -0.5)
    left = np.block([[X, Ut], [T @ Y, Wt]])
    right = np.block([[Zh, np.zeros((p, d))],
                      [-np.linalg.solve(K, L) @ Zh, Kinv_half]])
    return UnitaryPair(left @ right, Vmat, p)


def tau_map(data: NudelmanData) -> UnitaryPair:
    """Canonical unitary pair of admissible output normal data.

    Uses the Hermitian positive root ``T = P^{1/2}``.  For ``V = 0`` this
    returns ``(u_zero_completion(pair), I)``.
    """
    return tau_map_with_root(data, hermitian_sqrt(data.P))
