"""Chart and coordinate containers, and local coordinates on the unitary group.

A chart is a sequence of output normal pairs plus a reference unitary
``base_ref`` around which the terminal constant ``G0`` is parametrized by the
matrix logarithm.  Coordinates are the Schur parameters ``V_j`` together
with the real vector ``g0`` of that logarithm.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from .errors import DimensionError, LosslessError, OutOfDomainError
from .numcore import OutputNormalPair, as_matrix

KINDS = ("complex", "real", "mutual")
CUT_LOCUS_MARGIN = 1e-8


def _ct(M):
    return M.conj().T


def unitary_coord_count(p: int, real: bool = False) -> int:
    return p * (p - 1) // 2 if real else p * p


def _skew_to_vector(S: np.ndarray, real: bool) -> np.ndarray:
    p = S.shape[0]
    iu = np.triu_indices(p, 1)
    if real:
        return np.real(S[iu]).astype(float)
    H = -1j * S  # Hermitian
    return np.concatenate([np.real(np.diag(H)), np.real(H[iu]), np.imag(H[iu])]).astype(float)


def _vector_to_skew(x: np.ndarray, p: int, real: bool) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != unitary_coord_count(p, real):
        raise DimensionError(f"expected {unitary_coord_count(p, real)} unitary coordinates, got {x.size}")
    iu = np.triu_indices(p, 1)
    m = len(iu[0])
    if real:
        S = np.zeros((p, p))
        S[iu] = x
        return S - S.T
    H = np.zeros((p, p), dtype=complex)
    H[np.diag_indices(p)] = x[:p]
    H[iu] = x[p:p + m] + 1j * x[p + m:]
    H = H + np.triu(H, 1).conj().T
    return 1j * H


def unitary_coords(G0, base_ref, real: bool = False) -> np.ndarray:
    """Real coordinates of ``G0`` around ``base_ref``.

    The coordinates are the independent real entries of the principal
    logarithm ``S = log(base_ref* G0)``: ``p**2`` numbers for a unitary, or
    ``p(p-1)/2`` for a real orthogonal matrix.  Raises
    :class:`OutOfDomainError` when ``base_ref* G0`` has an eigenvalue at (or
    numerically next to) ``-1``.
    """
    G0 = as_matrix(G0)
    base_ref = as_matrix(base_ref, *G0.shape)
    M = _ct(base_ref) @ G0
    T, Z = linalg.schur(M, output="complex")
    ang = np.angle(np.diag(T))
    if np.max(np.abs(ang), initial=0.0) > np.pi - CUT_LOCUS_MARGIN:
        raise OutOfDomainError("G0 lies on the cut locus of the unitary chart (eigenvalue -1)")
    S = (Z * (1j * ang)) @ _ct(Z)
    S = (S - _ct(S)) / 2
    if real:
        if np.max(np.abs(S.imag), initial=0.0) > 1e-8:
            raise LosslessError("G0 and base_ref are not in the same real orthogonal component")
        S = S.real
    return _skew_to_vector(S, real)


def unitary_from_coords(x, base_ref, real: bool = False) -> np.ndarray:
    """Inverse of :func:`unitary_coords`: ``base_ref @ expm(S(x))``."""
    base_ref = as_matrix(base_ref)
    p = base_ref.shape[0]
    S = _vector_to_skew(x, p, real)
    # exp of a skew-Hermitian matrix through its Hermitian eigendecomposition
    w, Z = np.linalg.eigh(-1j * S)
    E = (Z * np.exp(1j * w)) @ _ct(Z)
    if real:
        return (base_ref @ E.real).real
    return base_ref @ E


@dataclass(frozen=True, eq=False)
class Chart:
    """Sequence of output normal pairs ``((U_1, W_1), ..., (U_l, W_l))``.

    ``kind`` is ``"complex"`` (all pairs of size 1), ``"real"`` (real pairs of
    size 1 or 2, the 2 x 2 nodes with complex-conjugate eigenvalues) or
    ``"mutual"`` (a single pair of full size).
    """

    kind: str
    pairs: tuple
    base_ref: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown chart kind {self.kind!r}")
        object.__setattr__(self, "pairs", tuple(self.pairs))
        object.__setattr__(self, "base_ref", as_matrix(self.base_ref))

    @property
    def p(self) -> int:
        return self.base_ref.shape[0]

    @property
    def n(self) -> int:
        return sum(pr.delta for pr in self.pairs)

    @property
    def sizes(self) -> list[int]:
        return [pr.delta for pr in self.pairs]

    @property
    def real(self) -> bool:
        return self.kind == "real"

    def validate(self) -> "Chart":
        """Check the structural rules of the chart kind; returns ``self``."""
        p = self.p
        if np.linalg.norm(_ct(self.base_ref) @ self.base_ref - np.eye(p)) > 1e-10:
            raise LosslessError("base_ref is not unitary")
        for pr in self.pairs:
            if pr.p != p:
                raise DimensionError("pair output dimension differs from base_ref")
            pr.validate()
        if self.kind == "complex" and any(d != 1 for d in self.sizes):
            raise LosslessError("complex charts use pairs of size 1")
        if self.kind == "real":
            if np.any(self.base_ref.imag):
                raise LosslessError("real charts need a real base_ref")
            for pr in self.pairs:
                if not pr.is_real or pr.delta not in (1, 2):
                    raise LosslessError("real charts use real pairs of size 1 or 2")
                if pr.delta == 2 and np.all(np.abs(np.linalg.eigvals(pr.W.real).imag) == 0):
                    raise LosslessError("2x2 real nodes must have complex conjugate eigenvalues")
        if self.kind == "mutual" and len(self.pairs) != 1:
            raise LosslessError("mutual charts have exactly one pair")
        return self

    def dimension(self) -> int:
        """Number of real coordinates of the chart."""
        if self.real:
            return unitary_coord_count(self.p, True) + self.n * self.p
        return unitary_coord_count(self.p) + 2 * self.n * self.p

    def with_base_ref(self, base_ref) -> "Chart":
        return Chart(self.kind, self.pairs, base_ref)

    def g0_from_coords(self, g0) -> np.ndarray:
        return unitary_from_coords(g0, self.base_ref, self.real)

    def coords_from_g0(self, G0) -> np.ndarray:
        return unitary_coords(G0, self.base_ref, self.real)

    def zero_coordinates(self) -> "ChartCoordinates":
        dt = float if self.real else complex
        return ChartCoordinates([np.zeros((self.p, d), dtype=dt) for d in self.sizes],
                                np.zeros(unitary_coord_count(self.p, self.real)))


@dataclass(frozen=True, eq=False)
class ChartCoordinates:
    """Schur parameters ``V_1..V_l`` and unitary-group coordinates ``g0``."""

    V_list: list = field(default_factory=list)
    g0: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "V_list", [np.atleast_2d(np.asarray(V)) for V in self.V_list])
        object.__setattr__(self, "g0", np.asarray(self.g0, dtype=float).ravel())

    def real_count(self, real: bool) -> int:
        per = 1 if real else 2
        return self.g0.size + per * sum(V.size for V in self.V_list)

    def to_vector(self, real: bool = False) -> np.ndarray:
        parts = [self.g0]
        for V in self.V_list:
            if real:
                parts.append(np.real(V).ravel())
            else:
                parts.append(np.real(V).ravel())
                parts.append(np.imag(V).ravel())
        return np.concatenate(parts) if parts else np.zeros(0)

    @classmethod
    def from_vector(cls, x, chart: Chart) -> "ChartCoordinates":
        x = np.asarray(x, dtype=float).ravel()
        if x.size != chart.dimension():
            raise DimensionError(f"chart has {chart.dimension()} coordinates, got {x.size}")
        k = unitary_coord_count(chart.p, chart.real)
        g0, pos = x[:k], k
        Vs = []
        for d in chart.sizes:
            m = chart.p * d
            re = x[pos:pos + m].reshape(chart.p, d)
            pos += m
            if chart.real:
                Vs.append(re.copy())
            else:
                im = x[pos:pos + m].reshape(chart.p, d)
                pos += m
                Vs.append(re + 1j * im)
        return cls(Vs, g0)

    def max_parameter_norm(self) -> float:
        return max((float(np.linalg.norm(V)) for V in self.V_list), default=0.0)


def make_chart(kind: str, pairs: Sequence, base_ref=None, p: int | None = None) -> Chart:
    """Convenience constructor accepting ``(U, W)`` tuples or pairs."""
    prs = [pr if isinstance(pr, OutputNormalPair) else OutputNormalPair(*pr) for pr in pairs]
    if base_ref is None:
        if p is None:
            p = prs[0].p
        base_ref = np.eye(p)
    return Chart(kind, tuple(prs), base_ref).validate()
