"""Balanced realizations and the Schur algorithm on them.

A lossless function of McMillan degree ``n`` is stored as a realization
``(A, B, C, D)`` whose realization matrix ``[[D, C], [B, A]]`` is unitary.
One Schur step adds (:func:`forward_step`) or removes (:func:`backward_step`)
``delta`` states by multiplying with the unitary pair of the step; no
transfer-function inverse is ever formed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charts import Chart, ChartCoordinates
from .errors import (
    ConsistencyError,
    DimensionError,
    InadmissibleDataError,
    LosslessError,
    OutOfDomainError,
    SingularEvaluationError,
)
from .jlossless import NudelmanData
from .numcore import (
    OutputNormalPair,
    STABILITY_MARGIN,
    as_matrix,
    hermitian_sqrt,
    random_unitary,
    solve_stein_sylvester,
    solve_stein_symmetric,
    spectral_radius,
)
from .tau import UnitaryPair, tau_map

MIDDLE_BLOCK_TOL = 1e-8
RANK_TOL = 1e-8


def _ct(M):
    return M.conj().T


@dataclass(frozen=True, eq=False)
class BalancedRealization:
    """State-space realization ``G(z) = D + C (zI - A)^{-1} B``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = as_matrix(self.D)
        p = D.shape[0]
        A = np.asarray(self.A, dtype=complex)
        n = A.shape[0] if A.size else 0
        A = A.reshape(n, n)
        B = np.asarray(self.B, dtype=complex).reshape(n, p)
        C = np.asarray(self.C, dtype=complex).reshape(p, n)
        if D.shape != (p, p):
            raise DimensionError(f"D must be square, got {D.shape}")
        for name, val in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, val)

    @classmethod
    def constant(cls, D) -> "BalancedRealization":
        D = as_matrix(D)
        p = D.shape[0]
        return cls(np.zeros((0, 0)), np.zeros((0, p)), np.zeros((p, 0)), D)

    @classmethod
    def from_matrix(cls, R, p: int) -> "BalancedRealization":
        R = as_matrix(R)
        return cls(R[p:, p:], R[p:, :p], R[:p, p:], R[:p, :p])

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.D.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Realization matrix ``[[D, C], [B, A]]``."""
        return np.block([[self.D, self.C], [self.B, self.A]])

    @property
    def is_real(self) -> bool:
        return self.max_imag() == 0.0

    def max_imag(self) -> float:
        return float(np.max(np.abs(self.matrix.imag), initial=0.0))

    def real_part(self) -> "BalancedRealization":
        return BalancedRealization(self.A.real, self.B.real, self.C.real, self.D.real)

    def unitarity_residual(self) -> float:
        R = self.matrix
        return float(np.linalg.norm(_ct(R) @ R - np.eye(R.shape[0])))

    def similar(self, S: np.ndarray) -> "BalancedRealization":
        """Realization in the state basis ``x' = S* x`` for unitary ``S``."""
        return BalancedRealization(_ct(S) @ self.A @ S, _ct(S) @ self.B, self.C @ S, self.D)

    def __call__(self, z: complex) -> np.ndarray:
        return eval_transfer(self, z)

    def evaluate(self, zs) -> np.ndarray:
        """Vectorized transfer values, shape ``(len(zs), p, p)``."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        if self.n == 0:
            return np.broadcast_to(self.D, (zs.size, self.p, self.p)).copy()
        res = zs[:, None, None] * np.eye(self.n) - self.A
        X = np.linalg.solve(res, np.broadcast_to(self.B, (zs.size,) + self.B.shape))
        return self.D + self.C @ X


def eval_transfer(R: BalancedRealization, z: complex) -> np.ndarray:
    """``G(z) = D + C (zI - A)^{-1} B``."""
    if R.n == 0:
        return R.D.copy()
    try:
        X = np.linalg.solve(z * np.eye(R.n) - R.A, R.B)
    except np.linalg.LinAlgError as exc:
        raise SingularEvaluationError(f"zI - A is singular at z={z}") from exc
    return R.D + R.C @ X


def forward_step(R: BalancedRealization, pair: UnitaryPair) -> BalancedRealization:
    """Add ``delta`` states: ``diag(Umat, I) [[D,0,C],[0,I,0],[B,0,A]] diag(Vmat*, I)``.

    The new states come first in the resulting state vector.  The transfer
    function of the result is the LFT of ``G`` by ``Phi`` of the pair.
    """
    p, d, k = R.p, pair.delta, R.n
    if pair.p != p:
        raise DimensionError(f"unitary pair has p={pair.p}, realization has p={p}")
    m = p + d + k
    E = np.zeros((m, m), dtype=complex)
    E[:p, :p] = R.D
    E[:p, p + d:] = R.C
    E[p:p + d, p:p + d] = np.eye(d)
    E[p + d:, :p] = R.B
    E[p + d:, p + d:] = R.A
    left = np.eye(m, dtype=complex)
    left[:p + d, :p + d] = pair.Umat
    right = np.eye(m, dtype=complex)
    right[:p + d, :p + d] = _ct(pair.Vmat)
    return BalancedRealization.from_matrix(left @ E @ right, p)


@dataclass(frozen=True, eq=False)
class SchurStepRecord:
    """Result of one Schur step: the pair, its parameter ``V`` and Stein solution ``P``."""

    pair: OutputNormalPair
    V: np.ndarray
    P: np.ndarray
    Q: np.ndarray | None = None

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.P)[0]) if self.P.size else float("inf")


def interpolation_value(R: BalancedRealization, pair: OutputNormalPair) -> tuple[np.ndarray, np.ndarray]:
    """State-space interpolation value of ``G`` for ``pair``.

    Returns ``(V, Q)`` with ``Q - A* Q W = C* U`` and ``V = D* U + B* Q W``.
    """
    U, W = pair.U, pair.W
    Q = solve_stein_sylvester(R.A, W, _ct(R.C) @ U)
    V = _ct(R.D) @ U + _ct(R.B) @ Q @ W
    return V, Q


def backward_step(R: BalancedRealization, pair: OutputNormalPair,
                  real: bool = False) -> tuple[np.ndarray, BalancedRealization, np.ndarray]:
    """Extract one interpolation condition and deflate ``delta`` states.

    Computes ``V`` from the state-space formula, checks admissibility, then
    rotates the state basis so the first ``delta`` states are those created
    by the forward step (``S[:, :delta] = Q P^{-1/2}``) and strips the
    unitary pair off both sides.

    Returns
    -------
    V : (p, delta) array
    R_prev : BalancedRealization of degree ``n - delta``
    P : (delta, delta) array, Stein solution (equal to ``Q* Q``)

    Raises
    ------
    InadmissibleDataError
        If ``P`` is not positive definite; the function is outside the
        domain of this step.
    ConsistencyError
        If the stripped realization does not exhibit the identity middle block.
    """
    p, n, d = R.p, R.n, pair.delta
    if pair.p != p:
        raise DimensionError(f"pair has p={pair.p}, realization has p={p}")
    if d > n:
        raise DimensionError(f"cannot extract {d} states from a realization of degree {n}")
    V, Q = interpolation_value(R, pair)
    if real:
        V, Q = V.real, Q.real
    data = NudelmanData.create(pair.W, pair.U, V)
    T = hermitian_sqrt(data.P)
    S1 = Q @ np.linalg.inv(T)
    Us, _, Vh = np.linalg.svd(S1, full_matrices=True)
    S = np.hstack([Us[:, :d] @ Vh, Us[:, d:]])
    if real:
        S = S.real
    if np.linalg.norm(S[:, :d] - S1) > MIDDLE_BLOCK_TOL * max(1.0, np.linalg.norm(S1)):
        raise ConsistencyError("Q P^{-1/2} does not have orthonormal columns")
    up = tau_map(data)
    Rs = R.similar(S).matrix
    m = p + n
    left = np.eye(m, dtype=complex)
    left[:p + d, :p + d] = _ct(up.Umat)
    right = np.eye(m, dtype=complex)
    right[:p + d, :p + d] = up.Vmat
    E = left @ Rs @ right
    mid = np.zeros((d, m), dtype=complex)
    mid[:, p:p + d] = np.eye(d)
    resid = max(np.linalg.norm(E[p:p + d, :] - mid), np.linalg.norm(E[:, p:p + d] - mid.T))
    if resid > MIDDLE_BLOCK_TOL:
        raise ConsistencyError(f"middle block residual {resid:.3e} after stripping the step")
    keep = np.r_[np.arange(p), np.arange(p + d, m)]
    R_prev = BalancedRealization.from_matrix(E[np.ix_(keep, keep)], p)
    return V, R_prev, data.P


def schur_algorithm(R: BalancedRealization, chart: Chart) -> tuple[list[SchurStepRecord], np.ndarray]:
    """Run the Schur algorithm of ``chart`` on ``R``.

    Returns the step records in chart order ``j = 1..l`` and the terminal
    constant unitary ``G0``.  Raises :class:`OutOfDomainError` carrying the
    failing step index and minimum eigenvalue of ``P_j``.
    """
    if R.n != chart.n:
        raise DimensionError(f"realization has degree {R.n}, chart expects {chart.n}")
    if R.p != chart.p:
        raise DimensionError(f"realization has p={R.p}, chart expects p={chart.p}")
    if chart.real and R.max_imag() > 1e-12:
        raise LosslessError("real chart applied to a complex realization")
    records = []
    cur = R
    for j in range(len(chart.pairs), 0, -1):
        pair = chart.pairs[j - 1]
        try:
            V, cur, P = backward_step(cur, pair, real=chart.real)
        except InadmissibleDataError as exc:
            raise OutOfDomainError(
                f"Schur step {j}: Stein solution not positive definite "
                f"(min eigenvalue {exc.min_eigenvalue:.3e})", step=j,
                quality=exc.min_eigenvalue) from exc
        records.append(SchurStepRecord(pair, V.real if chart.real else V, P))
    records.reverse()
    G0 = cur.D.real if chart.real else cur.D
    return records, G0


def analyze(R: BalancedRealization, chart: Chart) -> ChartCoordinates:
    """Coordinates ``(V_1, ..., V_l, psi(G0))`` of ``R`` in ``chart``."""
    records, G0 = schur_algorithm(R, chart)
    try:
        g0 = chart.coords_from_g0(G0)
    except LosslessError as exc:
        raise OutOfDomainError(f"terminal unitary outside the chart of U(p): {exc}",
                               step=0) from exc
    return ChartCoordinates([rec.V for rec in records], g0)


def synthesize_records(coords: ChartCoordinates, chart: Chart
                       ) -> tuple[BalancedRealization, list[SchurStepRecord]]:
    """Like :func:`synthesize` but also returns the per-step records."""
    if len(coords.V_list) != len(chart.pairs):
        raise DimensionError(f"chart has {len(chart.pairs)} steps, got {len(coords.V_list)} parameters")
    G0 = chart.g0_from_coords(coords.g0)
    R = BalancedRealization.constant(G0)
    records = []
    for j, (pair, V) in enumerate(zip(chart.pairs, coords.V_list), start=1):
        try:
            data = NudelmanData.create(pair.W, pair.U, V)
        except InadmissibleDataError as exc:
            raise OutOfDomainError(
                f"Schur parameter {j} is not admissible (min eigenvalue "
                f"{exc.min_eigenvalue:.3e})", step=j, quality=exc.min_eigenvalue) from exc
        R = forward_step(R, tau_map(data))
        records.append(SchurStepRecord(pair, data.V, data.P))
    return R, records


def synthesize(coords: ChartCoordinates, chart: Chart) -> BalancedRealization:
    """Balanced realization of the function with ``coords`` in ``chart``.

    Starts from the constant ``G0`` and applies one forward step per pair,
    ``j = 1..l``; the last pair's states end up first.
    """
    return synthesize_records(coords, chart)[0]


def _psd_sqrt(M: np.ndarray) -> np.ndarray:
    w, Z = np.linalg.eigh((M + _ct(M)) / 2)
    return (Z * np.sqrt(np.clip(w, 0, None))) @ _ct(Z)


def hankel_singular_values(R: BalancedRealization) -> np.ndarray:
    """Singular values of the infinite Hankel operator, via the Gramians."""
    if R.n == 0:
        return np.zeros(0)
    Wo = solve_stein_symmetric(R.A, R.C, np.zeros_like(R.C))
    Wc = solve_stein_symmetric(_ct(R.A), _ct(R.B), np.zeros_like(_ct(R.B)))
    return np.linalg.svd(_psd_sqrt(Wo) @ _psd_sqrt(Wc), compute_uv=False)


def degree(R: BalancedRealization, rtol: float = RANK_TOL) -> int:
    """McMillan degree: numerical rank of the observability-controllability product.

    The product of the infinite observability and controllability operators
    is the Hankel operator; its singular values come from the Gramians.
    """
    s = hankel_singular_values(R)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def random_lossless(p: int, n: int, seed=None, real: bool = False,
                    max_tries: int = 100) -> BalancedRealization:
    """Random balanced realization read off a Haar unitary of size ``p + n``."""
    if p < 1 or n < 0:
        raise ValueError("need p >= 1 and n >= 0")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        R = BalancedRealization.from_matrix(random_unitary(p + n, rng, real=real), p)
        if n and spectral_radius(R.A) >= 1.0 - STABILITY_MARGIN:
            continue
        if degree(R) != n:
            continue
        return R
    raise LosslessError(f"no minimal stable realization after {max_tries} draws")


@dataclass
class RealizationReport:
    unitarity: float
    circle_losslessness: float
    spectral_radius: float
    degree: int | None
    n: int

    def ok(self, tol: float = 1e-10) -> bool:
        return (self.unitarity < tol and self.circle_losslessness < tol
                and self.spectral_radius < 1 and self.degree == self.n)


def verify_realization(R: BalancedRealization, samples: int = 64) -> RealizationReport:
    """Residuals of every balanced-realization invariant.

    ``degree`` is ``None`` when ``A`` is not stable (the Gramians diverge).
    """
    z = np.exp(2j * np.pi * (np.arange(samples) + 0.5) / samples)
    rho = spectral_radius(R.A) if R.n else 0.0
    try:
        G = R.evaluate(z)
        loss = float(np.max(np.linalg.norm(G @ np.conj(np.swapaxes(G, -1, -2)) - np.eye(R.p),
                                           axis=(1, 2))))
    except (np.linalg.LinAlgError, SingularEvaluationError):
        loss = np.inf
    deg = degree(R) if rho < 1 else None
    return RealizationReport(R.unitarity_residual(), loss, rho, deg, R.n)
