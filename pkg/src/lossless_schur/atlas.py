"""The three atlases: complex, real and mutual-encoding charts.

Each atlas comes with a way to compute an *adapted chart* for a given
function, i.e. a chart in which all its Schur parameters vanish.  For the
sequential atlases this peels pairs off a (real) Schur form of ``A``; for
the mutual atlas the pair is simply ``(C, A)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .charts import Chart, ChartCoordinates, unitary_coords, unitary_from_coords  # noqa: F401
from .errors import (
    DimensionError,
    InadmissibleDataError,
    LosslessError,
    OutOfDomainError,
)
from .jlossless import NudelmanData
from .numcore import OutputNormalPair, solve_stein_sylvester
from .schur import (
    BalancedRealization,
    analyze,
    forward_step,
    interpolation_value,
    schur_algorithm,
    synthesize,
)
from .tau import tau_map, tau_map_with_root, xy_blocks

MUTUAL_COND_MAX = 1e8
UNITARY_TOL = 1e-10


def _ct(M):
    return M.conj().T


def _require_unitary(R: BalancedRealization) -> None:
    res = R.unitarity_residual()
    if res > UNITARY_TOL * max(1, R.n + R.p):
        raise LosslessError(f"realization matrix is not unitary (residual {res:.3e})")


def _peel(D, C, B, A, sizes):
    """Strip leading diagonal blocks of a (quasi-)triangular ``A``.

    Returns the pairs in chart order (last peeled first) and the terminal
    constant.  Uses ``C <- C_hat + U (I - W)^{-1} A_hat*`` and the analogous
    update of ``D``, which invert the zero-parameter forward step.
    """
    pairs = []
    for d in sizes:
        U, W = C[:, :d], A[:d, :d]
        F = U @ np.linalg.inv(np.eye(d) - W)
        C = C[:, d:] + F @ A[:d, d:]
        D = D + F @ B[:d, :]
        A, B = A[d:, d:], B[d:, :]
        pairs.append(OutputNormalPair(U, W))
    pairs.reverse()
    return pairs, D


def adapted_chart_complex(R: BalancedRealization) -> Chart:
    """Complex chart in which ``R`` has all-zero Schur parameters.

    The nodes ``w_j`` are the eigenvalues of ``A`` in the order returned by
    the complex Schur factorization; ``base_ref`` is the terminal constant,
    so the ``G0`` coordinates vanish as well.
    """
    _require_unitary(R)
    if R.n == 0:
        return Chart("complex", (), R.D)
    T, Z = linalg.schur(R.A.astype(complex), output="complex")
    pairs, G0 = _peel(R.D, R.C @ Z, _ct(Z) @ R.B, T, [1] * R.n)
    return Chart("complex", tuple(pairs), G0)


def _real_schur_blocks(T: np.ndarray) -> list[int]:
    sizes, i, n = [], 0, T.shape[0]
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            sizes.append(2)
            i += 2
        else:
            sizes.append(1)
            i += 1
    return sizes


def adapted_chart_real(R: BalancedRealization) -> Chart:
    """Real chart (blocks of size 1 or 2) in which real ``R`` has zero parameters."""
    if R.max_imag() > 0:
        raise LosslessError("real atlas requires a real realization")
    _require_unitary(R)
    Rr = R.real_part()
    if R.n == 0:
        return Chart("real", (), Rr.D.real)
    T, Z = linalg.schur(Rr.A.real, output="real")
    sizes = _real_schur_blocks(T)
    pairs, G0 = _peel(Rr.D.real, Rr.C.real @ Z, Z.T @ Rr.B.real, T, sizes)
    pairs = [OutputNormalPair(pr.U.real, pr.W.real) for pr in pairs]
    return Chart("real", tuple(pairs), G0.real)


def adapted_chart_mutual(R: BalancedRealization) -> Chart:
    """Single-pair chart ``(U, W) = (C, A)``; its Stein solution is ``Q = I``."""
    _require_unitary(R)
    pair = OutputNormalPair(R.C, R.A)
    enc = _encode(R, pair)
    return Chart("mutual", (pair,), enc.G0)


def adapted_chart(R: BalancedRealization, kind: str) -> Chart:
    try:
        builder = {"complex": adapted_chart_complex, "real": adapted_chart_real,
                   "mutual": adapted_chart_mutual}[kind]
    except KeyError:
        raise ValueError(f"unknown atlas kind {kind!r}") from None
    return builder(R)


@dataclass(frozen=True)
class MembershipReport:
    in_domain: bool
    quality: float
    step: int | None = None
    message: str = ""


def chart_membership(R: BalancedRealization, chart: Chart) -> MembershipReport:
    """Whether ``R`` lies in the domain of ``chart`` and how well.

    Mutual charts: ``quality = 1 / cond(Q)`` with ``Q`` the solution of
    ``Q - A* Q W = C* U``; the function is in the domain when ``Q`` is
    invertible (``cond(Q) < 1e8``).  Sequential charts: ``quality`` is the
    smallest eigenvalue over all Stein solutions ``P_j``.
    """
    if R.n != chart.n or R.p != chart.p:
        raise DimensionError(f"chart (p={chart.p}, n={chart.n}) does not match "
                             f"realization (p={R.p}, n={R.n})")
    if chart.kind == "mutual":
        pair = chart.pairs[0]
        Q = solve_stein_sylvester(R.A, pair.W, _ct(R.C) @ pair.U)
        cond = np.linalg.cond(Q)
        quality = 0.0 if not np.isfinite(cond) else 1.0 / cond
        ok = bool(np.isfinite(cond) and cond < MUTUAL_COND_MAX)
        if ok:
            try:
                chart.coords_from_g0(_encode(R, pair).G0)
            except LosslessError as exc:
                return MembershipReport(False, quality, 0, str(exc))
        return MembershipReport(ok, quality, None if ok else 1,
                                "" if ok else f"cond(Q) = {cond:.3e}")
    try:
        records, G0 = schur_algorithm(R, chart)
    except OutOfDomainError as exc:
        return MembershipReport(False, exc.quality, exc.step, str(exc))
    quality = min((rec.min_eigenvalue for rec in records), default=1.0)
    try:
        chart.coords_from_g0(G0)
    except LosslessError as exc:
        return MembershipReport(False, quality, 0, str(exc))
    return MembershipReport(True, quality)


class MutualEncoding(NamedTuple):
    V: np.ndarray
    G0: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    residual: float


def _encode(R: BalancedRealization, pair: OutputNormalPair) -> MutualEncoding:
    V, Q = interpolation_value(R, pair)
    if not np.isfinite(np.linalg.cond(Q)) or np.linalg.cond(Q) >= MUTUAL_COND_MAX:
        raise OutOfDomainError("Q is singular: function outside the mutual chart",
                               step=1, quality=1.0 / np.linalg.cond(Q))
    try:
        data = NudelmanData.create(pair.W, pair.U, V)
    except InadmissibleDataError as exc:
        raise OutOfDomainError(str(exc), step=1, quality=exc.min_eigenvalue) from exc
    up = tau_map_with_root(data, Q, tol=1e-8)
    M = _ct(up.Umat) @ R.matrix @ up.Vmat
    p = R.p
    G0 = M[:p, :p]
    expected = np.eye(M.shape[0], dtype=complex)
    expected[:p, :p] = G0
    return MutualEncoding(V, G0, Q, data.P, float(np.linalg.norm(M - expected)))


def mutual_encode(R: BalancedRealization, chart: Chart) -> MutualEncoding:
    """Encode ``R`` by ``(V, G0)`` in a single-pair chart.

    ``Q`` solves ``Q - A* Q W = C* U``, ``V = D* U + B* Q W`` and the unitary
    pair is built with the root ``Q`` of ``P = Q* Q``, so that
    ``R = Umat diag(G0, I) Vmat*`` holds in the basis of ``R`` itself.
    """
    if chart.kind != "mutual":
        raise ValueError("mutual_encode needs a mutual chart")
    if R.n != chart.n or R.p != chart.p:
        raise DimensionError("chart and realization sizes differ")
    return _encode(R, chart.pairs[0])


def mutual_decode(chart: Chart, V, G0) -> BalancedRealization:
    """Canonical realization ``Umat diag(G0, I) Vmat*`` of the data ``(V, G0)``."""
    if chart.kind != "mutual":
        raise ValueError("mutual_decode needs a mutual chart")
    pair = chart.pairs[0]
    try:
        data = NudelmanData.create(pair.W, pair.U, V)
    except InadmissibleDataError as exc:
        raise OutOfDomainError(str(exc), step=1, quality=exc.min_eigenvalue) from exc
    return forward_step(BalancedRealization.constant(G0), tau_map(data))


def chart_switch(coords: ChartCoordinates, source: Chart, target: Chart) -> ChartCoordinates:
    """Re-express ``coords`` of ``source`` in ``target`` (synthesize, then analyze)."""
    if source.n != target.n or source.p != target.p:
        raise DimensionError("charts have different degree or size")
    if source.real != target.real:
        raise ValueError("cannot switch between real and complex atlases")
    return analyze(synthesize(coords, source), target)


def omega_of_chart(pair: OutputNormalPair) -> BalancedRealization:
    """Lossless function ``X + U (zI - W)^{-1} Y`` with realization matrix ``[[X, U], [Y, W]]``."""
    X, Y = xy_blocks(pair.U, pair.W)
    return BalancedRealization(pair.W, Y, pair.U, X)


def potapov_factor_eval(pair: OutputNormalPair, z: complex) -> np.ndarray:
    """``I - (z - 1) U (zI - W)^{-1} (I - W*)^{-1} U*`` evaluated directly."""
    U, W = pair.U, pair.W
    d = W.shape[0]
    inner = np.linalg.solve(z * np.eye(d) - W, np.linalg.solve(np.eye(d) - _ct(W), _ct(U)))
    return np.eye(U.shape[0]) - (z - 1) * U @ inner


@dataclass(frozen=True, eq=False)
class PotapovFactorization:
    """``G = factors[0] @ factors[1] @ ... @ G0`` (``factors[0]`` is ``B_l``)."""

    factors: list
    G0: np.ndarray
    chart: Chart

    def __call__(self, z: complex) -> np.ndarray:
        out = self.G0
        for f in reversed(self.factors):
            out = f(z) @ out
        return out


def potapov_factorize(R: BalancedRealization, kind: str = "complex") -> PotapovFactorization:
    """Factor ``G`` into elementary lossless factors of its adapted chart.

    In an adapted chart every step has ``V = 0``, the step's LFT reduces to
    left multiplication by the function of the pair, hence
    ``G = B_l ... B_1 G0``.
    """
    chart = adapted_chart(R, kind)
    factors = [omega_of_chart(pr) for pr in reversed(chart.pairs)]
    return PotapovFactorization(factors, chart.base_ref, chart)
