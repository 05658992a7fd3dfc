import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from isoq import experiments, selection
from isoq.shapes import FourierCoeffs, from_fourier, normalize_volume

settings.register_profile(
    "isoq", deadline=None, derandomize=True, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("isoq")

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = sorted(config.stash.get(ACCEPTANCE_KEY, []))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in lines:
        terminalreporter.write_line(line)


@pytest.fixture
def acceptance_line(request):
    """Record ``(criterion, passed, detail)`` for the end-of-run summary."""
    def record(key: str, passed: bool, detail: str) -> None:
        line = f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}"
        request.config.stash[ACCEPTANCE_KEY].append((key, line))
        print(line)
    return record


def bumpy(modes: dict, n: int | None = None):
    return normalize_volume(from_fourier(FourierCoeffs.from_modes(modes), n=n))


@pytest.fixture(scope="session")
def recovery_run():
    """The K = 8 recovery sequence over targets 0.2, 0.1, 0.05, timed."""
    t0 = time.perf_counter()
    seq = selection.recovery_sequence([0.2, 0.1, 0.05], K=8)
    return seq, time.perf_counter() - t0


@pytest.fixture(scope="session")
def linearized_12():
    t0 = time.perf_counter()
    value, coeffs = experiments.minimize_asymptotic(12)
    return value, coeffs, time.perf_counter() - t0


@pytest.fixture(scope="session")
def linearized_13():
    return experiments.minimize_asymptotic(13)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
