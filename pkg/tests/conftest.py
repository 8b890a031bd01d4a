import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_vector(rng, d, ties=False):
    """Gaussian vector; with `ties`, magnitudes are drawn from a tiny pool and some entries zeroed."""
    if ties:
        w = rng.choice([0.0, 0.5, 1.0, 2.0], size=d) * rng.choice([-1.0, 1.0], size=d)
    else:
        w = rng.standard_normal(d) * rng.exponential(1.0, size=d)
    return w


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
