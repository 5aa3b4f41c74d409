from __future__ import annotations

import pytest

from qmargulis.code_builder import GeneratorSets, build_2bga
from qmargulis.finite_group import GroupSpec
from qmargulis.girth_search import SearchConfig, get_generators


@pytest.fixture(scope="session")
def margulis240():
    code, _ = get_generators(GroupSpec.sl2(5), SearchConfig(target_girth=6, rng_seed=4))
    return code


@pytest.fixture(scope="session")
def bb72():
    code, _ = get_generators(GroupSpec.product(6, 6), SearchConfig(target_girth=6, rng_seed=0))
    return code


@pytest.fixture(scope="session")
def sl23_code():
    return build_2bga(GroupSpec.sl2(3), GeneratorSets([1, 5, 9], [2, 7, 13]))


@pytest.fixture(scope="session")
def tiny_code():
    """Cyclic group of order 2 with A = {0, 1}, B = {0}: a 4-qubit audit fixture."""
    return build_2bga(GroupSpec.cyclic(2), GeneratorSets([0, 1], [0]), strict=False)


# -- acceptance report ---------------------------------------------------------

_CRITERIA: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA.setdefault(marker.args[0], []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status = "PASS" if all(_CRITERIA[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status} ({len(_CRITERIA[n])} checks)")
