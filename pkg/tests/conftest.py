import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from expcal.metrics import LabeledLogits

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GOLDEN = __import__("pathlib").Path(__file__).parent / "golden"


def random_logits(seed, n=200, K=5, scale=3.0, signal=1.5):
    """Noisy logits whose true-class column gets a boost, so accuracy lies well above 1/K."""
    rng = np.random.default_rng(seed)
    z = scale * rng.standard_normal((n, K))
    y = rng.integers(0, K, n)
    z[np.arange(n), y] += signal * scale
    return LabeledLogits(z, y)


@st.composite
def labeled_logits(draw, max_n=40, max_K=6):
    n = draw(st.integers(1, max_n))
    K = draw(st.integers(2, max_K))
    z = draw(arrays(np.float64, (n, K), elements=st.floats(-20, 20, allow_nan=False)))
    y = draw(arrays(np.int64, (n,), elements=st.integers(0, K - 1)))
    return LabeledLogits(z, y)


@pytest.fixture
def golden():
    return GOLDEN


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
