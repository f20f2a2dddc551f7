"""Shared fixtures and reporting hooks.

Session-scoped transfer builds are cached here because several test modules
lean on the same small disks.  Tests marked `slow` (multi-minute exact runs)
are skipped unless RUN_SLOW=1 is set in the environment.

After the run, one PASS/FAIL line per acceptance criterion is printed so the
acceptance status is readable without scrolling through the full log.
"""

import os

import pytest

from dominotwist.region import parse_disk, rectangle
from dominotwist.transfer import build_transfer


@pytest.fixture(scope="session")
def d12():
    return parse_disk("##")


@pytest.fixture(scope="session")
def d22():
    return rectangle(2, 2)


@pytest.fixture(scope="session")
def d23():
    return rectangle(2, 3)


@pytest.fixture(scope="session")
def d44():
    return rectangle(4, 4)


@pytest.fixture(scope="session")
def ell6():
    return parse_disk("#.\n##\n##\n#.")


@pytest.fixture(scope="session")
def ts12(d12):
    return build_transfer(d12)


@pytest.fixture(scope="session")
def ts22(d22):
    return build_transfer(d22)


@pytest.fixture(scope="session")
def ts23(d23):
    return build_transfer(d23)


@pytest.fixture(scope="session")
def ts44(d44):
    return build_transfer(d44)


@pytest.fixture(scope="session")
def spectral23(ts23):
    from dominotwist.stats import spectral_report

    return spectral_report(ts23)


def pytest_collection_modifyitems(config, items):
    if os.environ.get("RUN_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="multi-minute exact run; set RUN_SLOW=1 to include")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call":
        _ACCEPTANCE[name] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.skipped:
        _ACCEPTANCE[name] = "SKIP"
    elif report.when == "setup" and report.failed:
        _ACCEPTANCE[name] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]:4s}  {name}")
