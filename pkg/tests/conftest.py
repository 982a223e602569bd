"""Shared Monte Carlo batches and the acceptance summary."""

import inspect
import time

import pytest

from secmimo import default_config
from secmimo.harness import run_trials

SEED = 2024

# points used by several tests are simulated once at their largest size and
# every smaller request takes a prefix (trial i is the same in both)
_FULL = {(): (500, True),
         (("N_t", 64), ("T", 512)): (500, False),
         (("N_t", 256), ("T", 2048)): (500, False)}
_cache = {}
SIM_SECONDS = {}
ACCEPTANCE_LINES = []
_DEFAULTS = {k: v.default for k, v in
             inspect.signature(default_config).parameters.items()}


def batch_key(**overrides):
    """Cache key; overrides equal to the defaults are dropped."""
    return tuple(sorted((k, v) for k, v in overrides.items()
                        if _DEFAULTS.get(k) != v))


def batch_for(trials, mfan=False, **overrides):
    """``(cfg, batch)`` at the default operating point with ``overrides``."""
    key = batch_key(**overrides)
    cfg = default_config(**overrides)
    hit = _cache.get(key)
    if hit is None or hit.trials < trials or (mfan and hit.mfan is None):
        n, mf = _FULL.get(key, (trials, mfan))
        t0 = time.perf_counter()
        hit = run_trials(cfg, max(n, trials), SEED, mfan=mf or mfan)
        SIM_SECONDS[key] = time.perf_counter() - t0
        _cache[key] = hit
    return cfg, hit.head(trials)


@pytest.fixture(scope="session")
def batches():
    return batch_for


@pytest.fixture(scope="session")
def sim_seconds():
    return SIM_SECONDS


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
