import numpy as np
import pytest
from hypothesis import settings

from splitdirac.harness.cache import default_cache_dir
from splitdirac.spectral import make_grid

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# criterion id -> (passed, detail), filled by tests/test_acceptance.py
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid64():
    return make_grid(-8, 8, 64)


@pytest.fixture(scope="session")
def cache_dir():
    """Reference cache shared by the acceptance tests: $SPLITDIRAC_CACHE_DIR, else ~/.cache/splitdirac."""
    return str(default_cache_dir())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE_RESULTS, key=lambda c: int(c.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {cid}: {detail}")
