import numpy as np
import pytest
from hypothesis import settings

from macshaping.constellation import build_xor_classes, make_pam

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture(scope="session")
def pam16():
    return make_pam(4)


@pytest.fixture(scope="session")
def x16(pam16):
    return build_xor_classes(pam16)


@pytest.fixture(scope="session")
def x4():
    return build_xor_classes(make_pam(2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance verdict lines -------------------------------------------------------

_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion and return the flag."""
    lines = request.config.stash[_VERDICTS]

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        lines.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
