"""Least-squares fit of a lossless function to point samples.

The search runs over chart coordinates with a BFGS quasi-Newton method and
central finite-difference gradients.  After every accepted step the chart
quality is checked; below ``q_min`` the iterate is re-centered in its own
adapted chart, where its coordinates are zero again.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .atlas import adapted_chart
from .charts import Chart, ChartCoordinates
from .errors import LosslessError, OutOfDomainError, SingularEvaluationError
from .numcore import spectral_radius
from .schur import BalancedRealization, random_lossless, synthesize_records

log = logging.getLogger(__name__)


@dataclass
class FitProblem:
    """Samples ``F_k`` of the target at points ``z_k`` plus optimizer settings."""

    points: np.ndarray
    values: np.ndarray
    n: int
    atlas: str = "complex"
    max_iters: int = 500
    h: float = 1e-6
    q_min: float = 0.1
    seed: int = 0
    target: float = 0.0
    init: BalancedRealization | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex).ravel()
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim == 2:
            self.values = self.values[:, :, None]
        if self.values.shape[0] != self.points.size or self.values.shape[1] != self.values.shape[2]:
            raise ValueError("values must have shape (len(points), p, p)")

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def validate(self) -> "FitProblem":
        r = np.abs(self.points)
        if np.any(r < 1 - 1e-12) or np.any(r > 10):
            raise ValueError("sample points must satisfy 1 <= |z| <= 10")
        if np.unique(np.round(self.points, 12)).size != self.points.size:
            raise ValueError("sample points must be pairwise distinct")
        if self.n < 0:
            raise ValueError("degree must be >= 0")
        if self.atlas not in ("complex", "real", "mutual"):
            raise ValueError(f"unknown atlas {self.atlas!r}")
        if self.init is not None and (self.init.n != self.n or self.init.p != self.p):
            raise ValueError("initial realization does not match (p, n)")
        return self

    def objective(self, R: BalancedRealization) -> float:
        diff = R.evaluate(self.points) - self.values
        return float(np.sum(np.abs(diff) ** 2))


@dataclass
class FitResult:
    realization: BalancedRealization
    chart: Chart
    objective: float
    iterations: int
    switches: int
    status: str
    history: list = field(default_factory=list)


def _chart_quality(chart: Chart, records) -> float:
    eigs = [rec.min_eigenvalue for rec in records]
    if not eigs:
        return 1.0
    if chart.kind == "mutual":
        # canonical form: Q = P^{1/2}, so cond(Q) = sqrt(cond(P))
        w = np.linalg.eigvalsh(records[0].P)
        return float(np.sqrt(w[0] / w[-1]))
    return float(min(eigs))


class _Evaluator:
    def __init__(self, problem: FitProblem, chart: Chart):
        self.problem = problem
        self.chart = chart
        self.count = 0

    def __call__(self, x: np.ndarray) -> float:
        self.count += 1
        try:
            R, _ = synthesize_records(ChartCoordinates.from_vector(x, self.chart), self.chart)
        except (OutOfDomainError, SingularEvaluationError, np.linalg.LinAlgError):
            return np.inf
        return self.problem.objective(R)

    def realize(self, x):
        return synthesize_records(ChartCoordinates.from_vector(x, self.chart), self.chart)

    def gradient(self, x: np.ndarray, h: float) -> np.ndarray:
        g = np.empty_like(x)
        for i in range(x.size):
            hi = h * max(1.0, abs(x[i]))
            e = np.zeros_like(x)
            e[i] = hi
            fp, fm = self(x + e), self(x - e)
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise OutOfDomainError("finite-difference stencil left the chart domain")
            g[i] = (fp - fm) / (2 * hi)
        return g


def _initial_realization(problem: FitProblem) -> BalancedRealization:
    if problem.init is not None:
        return problem.init
    real = problem.atlas == "real"
    if problem.n == 0:
        # polar factor of the first sample
        U, _, Vh = np.linalg.svd(problem.values[0])
        D = U @ Vh
        return BalancedRealization.constant(D.real if real else D)
    return random_lossless(problem.p, problem.n, problem.seed, real=real)


def fit(problem: FitProblem, callback: Callable[[dict], None] | None = None) -> FitResult:
    """Minimize ``sum_k ||G(z_k) - F_k||_F^2`` over lossless ``G`` of degree ``n``.

    ``callback`` receives one dict per log record (iterations and chart
    switches).  Deterministic for a fixed problem.  ``status`` is one of
    ``target``, ``stationary``, ``stagnated``, ``max_iters`` or
    ``domain_failure``; the last means no chart could be re-centered at the
    iterate, which is then returned as the best point found.
    """
    problem.validate()
    history: list[dict] = []

    def emit(rec):
        history.append(rec)
        log.debug(" ".join(f"{k}={v}" for k, v in rec.items()))
        if callback is not None:
            callback(rec)

    R = _initial_realization(problem)
    chart = adapted_chart(R, problem.atlas)
    ev = _Evaluator(problem, chart)
    x = np.zeros(chart.dimension())
    f = ev(x)
    if not np.isfinite(f):
        raise LosslessError("initial point is outside its own adapted chart")
    H = np.eye(x.size)
    g = ev.gradient(x, problem.h)
    switches = 0
    status = "max_iters"
    emit({"iter": 0, "objective": f, "grad": float(np.linalg.norm(g)), "chart": switches})
    it = 0
    for it in range(1, problem.max_iters + 1):
        if f <= problem.target:
            status = "target"
            it -= 1
            break
        if not np.any(g):
            status = "stationary"
            it -= 1
            break
        d = -H @ g
        slope = float(g @ d)
        if slope >= 0:
            H = np.eye(x.size)
            d, slope = -g, -float(g @ g)
        step, accepted = 1.0, False
        for _ in range(60):
            x_new = x + step * d
            f_new = ev(x_new)
            if np.isfinite(f_new) and f_new <= f + 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted or f_new >= f:
            status = "stagnated"
            it -= 1
            break
        try:
            g_new = ev.gradient(x_new, problem.h)
        except OutOfDomainError:
            g_new = None
        if g_new is not None:
            s, y = x_new - x, g_new - g
            sy = float(s @ y)
            if sy > 1e-300:
                if it == 1 or np.allclose(H, np.eye(x.size)):
                    H = np.eye(x.size) * sy / float(y @ y)
                rho = 1.0 / sy
                V = np.eye(x.size) - rho * np.outer(s, y)
                H = V @ H @ V.T + rho * np.outer(s, s)
        x, f = x_new, f_new
        R, records = ev.realize(x)
        quality = _chart_quality(chart, records)
        emit({"iter": it, "objective": f, "step": step,
              "grad": float(np.linalg.norm(g_new)) if g_new is not None else float("nan"),
              "quality": quality})
        if g_new is None or quality < problem.q_min:
            try:
                new_chart = adapted_chart(R, problem.atlas)
                new_ev = _Evaluator(problem, new_chart)
                x0 = np.zeros(new_chart.dimension())
                f0 = new_ev(x0)
                g = new_ev.gradient(x0, problem.h)
            except (LosslessError, np.linalg.LinAlgError) as exc:
                # typically a pole reaching the unit circle: keep the last iterate
                emit({"event": "switch_failed", "iter": it, "quality": quality,
                      "spectral_radius": spectral_radius(R.A) if R.n else 0.0,
                      "reason": type(exc).__name__})
                status = "domain_failure"
                break
            chart, ev, x, f = new_chart, new_ev, x0, f0
            H = np.eye(x.size)
            switches += 1
            emit({"event": "chart_switch", "iter": it, "quality": quality, "objective": f})
        else:
            g = g_new
    R, _ = ev.realize(x)
    return FitResult(R, chart, f, it, switches, status, history)


def sample_problem(G: BalancedRealization, samples: int = 64, radius: float = 1.0,
                   **settings) -> FitProblem:
    """Problem whose data are exact samples of ``G`` at equispaced circle points."""
    z = radius * np.exp(2j * np.pi * (np.arange(samples) + 0.5) / samples)
    return FitProblem(z, G.evaluate(z), G.n, **settings)


def perturbed_start(G: BalancedRealization, atlas: str, scale: float, seed) -> BalancedRealization:
    """A function near ``G``: random coordinates of size ``scale`` in ``G``'s adapted chart."""
    rng = np.random.default_rng(seed)
    chart = adapted_chart(G, atlas)
    x = scale * rng.standard_normal(chart.dimension())
    R, _ = synthesize_records(ChartCoordinates.from_vector(x, chart), chart)
    return R
