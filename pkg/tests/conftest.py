import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bcfkit import FitSDModel, PoleTerm

settings.register_profile(
    "bcfkit", deadline=None, max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("bcfkit")


def table_model():
    """Damped-mode fit with n = 5 and three poles."""
    return FitSDModel(5, (PoleTerm(1.27e4, (183 + 9.17j, 67.6 + 178j, 1.76 + 11.1j)),))


@pytest.fixture
def damped_model():
    return table_model()


def random_model(rng, n=None, max_poles=3, max_terms=2):
    """A random valid model with poles in [5, 300] x [5, 150] cm^-1."""
    n = int(rng.choice([1, 3, 5])) if n is None else n
    k_min = max(1, (n - 1) // 2)
    terms = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        k = int(rng.integers(k_min, max(k_min, max_poles) + 1))
        poles = tuple(complex(rng.uniform(5, 300), rng.uniform(5, 150)) for _ in range(k))
        terms.append(PoleTerm(float(10 ** rng.uniform(0, 3)), poles))
    model = FitSDModel(n, tuple(terms))
    # normalize so that max J is about 100 cm^-1 on the positive axis
    w = np.geomspace(0.1, 3000, 2000)
    return model.scaled(100.0 / np.max(model(w)))


_CRITERIA = pytest.StashKey[dict]()
N_CRITERIA = 12


@pytest.fixture
def criterion(request):
    """``record(k, ok, detail)`` stores one acceptance result and asserts it."""
    results = request.config.stash.setdefault(_CRITERIA, {})

    def record(k, ok, detail):
        results[k] = (bool(ok), detail)
        assert ok, f"AC{k}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_CRITERIA, None)
    if results is None:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for k in range(1, N_CRITERIA + 1):
        ok, detail = results.get(k, (False, "not evaluated (test errored or was deselected)"))
        terminalreporter.write_line(f"AC{k} {'PASS' if ok else 'FAIL'} {detail}")
