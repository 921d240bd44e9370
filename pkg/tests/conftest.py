import numpy as np
import pytest

from stabstbc.stabilizer import build_code


@pytest.fixture(scope="session")
def code():
    return build_code()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit(rng, size=None):
    shape = (2,) if size is None else (size, 2)
    s = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return s / np.linalg.norm(s, axis=-1, keepdims=True)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one acceptance line; it is printed in the terminal summary."""

    def record(criterion, ok, detail, report_only=False):
        tag = ("PASS" if ok else "FAIL") + (" (report only)" if report_only else "")
        line = f"{tag} criterion {criterion}: {detail}"
        _VERDICTS.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
