import numpy as np
import pytest

from nbodygeom.core import Configuration, ConfigurationState, center


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_masses(rng, n, low=0.1, high=10.0):
    return rng.uniform(low, high, n)


def random_config(rng, n, d=3, masses=None):
    m = random_masses(rng, n) if masses is None else np.asarray(masses, float)
    return Configuration(rng.normal(size=(n, d)), m)


def random_centered(rng, n, d=3, masses=None):
    return center(random_config(rng, n, d, masses))[0]


def random_state(rng, n, d=3):
    cfg = random_config(rng, n, d)
    return ConfigurationState(cfg, rng.normal(size=(n, d)))


def random_orthogonal(rng, k):
    q, r = np.linalg.qr(rng.normal(size=(k, k)))
    return q * np.sign(np.diag(r))


def rel_err(a, b):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    scale = max(np.max(np.abs(b), initial=0.0), 1e-300)
    return float(np.max(np.abs(a - b), initial=0.0) / scale)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.split(".")[0]), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
