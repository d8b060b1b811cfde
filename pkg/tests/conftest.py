import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dynadapt import AbsoluteLoss, Box, Environment
from dynadapt.harness.environments import EnvironmentSpec, build_environment

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def abs_env(thetas, lo=0.0, hi=1.0):
    """1-D absolute losses |w - theta_t| on [lo, hi] (unscaled)."""
    box = Box(lo, hi, 1)
    th = np.asarray(thetas, dtype=np.float64).reshape(-1, 1)
    return Environment(box, tuple(AbsoluteLoss(x) for x in th), 1.0, minimizers=th.copy())


def env(kind, T, seed=0, **kw):
    return build_environment(EnvironmentSpec(kind, T, seed=seed, **kw))


@pytest.fixture
def make_env():
    return env


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LOG: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
