import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_config(rng, k=8, spread=1.0):
    """A well-conditioned random configuration: jittered polygon."""
    theta = np.sort(rng.uniform(0, 2 * np.pi, k))
    r = 1 + 0.3 * rng.standard_normal(k)
    X = np.column_stack([r * np.cos(theta), r * np.sin(theta)]) * spread
    return X + 0.1 * rng.standard_normal((k, 2))


def well_conditioned(X, ratio=1e-2, min_gap=1e-2):
    Xc = X - X.mean(axis=0)
    s = np.linalg.svd(Xc, compute_uv=False)
    if s[0] == 0 or s[-1] < ratio * s[0]:
        return False
    d = np.linalg.norm(X[:, None] - X[None], axis=-1)
    return d[np.triu_indices(len(X), 1)].min() > min_gap * s[0]


configs = arrays(np.float64, (6, 2), elements=st.floats(-3, 3, allow_nan=False)).filter(well_conditioned)
angles = st.floats(0, 2 * np.pi, allow_nan=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
