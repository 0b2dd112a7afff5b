import numpy as np
import pytest

from rmtstap.scene import RadarConfig, build_scene


@pytest.fixture(scope="session")
def table1_v150():
    return build_scene(RadarConfig(velocity_mps=150.0))


@pytest.fixture(scope="session")
def table1_v300():
    return build_scene(RadarConfig(velocity_mps=300.0))


@pytest.fixture(scope="session")
def small_scene():
    """NK = 16 scene for cheap exact checks."""
    return build_scene(RadarConfig(n_elements=4, n_pulses=4, n_patches=91))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, n, psd=False):
    B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return B @ B.conj().T if psd else B + B.conj().T


# -- acceptance report ----------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and not report.failed:
        return
    number, summary = mark.args
    measured = "; ".join(str(v) for k, v in report.user_properties if k == "measured")
    if measured:
        summary = f"{summary} [{measured}]"
    prev = _CRITERIA.get(number, (None, None))[0]
    status = "PASS" if report.passed else "FAIL"
    if prev != "FAIL":
        _CRITERIA[number] = (status, summary)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, summary = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {summary}")
