import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def stein_series(L, R, rhs, tol=1e-17, max_doublings=60):
    """Oracle: ``sum_k L^k rhs R^k`` summed by doubling.

    After ``j`` doublings the partial sum holds ``2^j`` terms, so spectral
    radii very close to 1 stay affordable.
    """
    total = np.asarray(rhs, dtype=complex).copy()
    L, R = np.asarray(L, dtype=complex), np.asarray(R, dtype=complex)
    for _ in range(max_doublings):
        tail = L @ total @ R
        total = total + tail
        if np.linalg.norm(tail) <= tol * max(1.0, np.linalg.norm(total)):
            return total
        L, R = L @ L, R @ R
    raise RuntimeError("series did not converge")


def sample_points(rng, k, rmin=1.05, rmax=2.0):
    """Points off the unit circle, away from poles inside the disk."""
    return rng.uniform(rmin, rmax, k) * np.exp(2j * np.pi * rng.uniform(size=k))


def transfer_gap(R1, R2, z):
    """Largest entrywise difference between two transfer functions at ``z``."""
    return float(np.max(np.abs(R1.evaluate(z) - R2.evaluate(z))))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for line in results:
        terminalreporter.write_line(line)
