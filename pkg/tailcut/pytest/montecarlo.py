import os
import zlib
from typing import Optional

import pytest
from _pytest.config import Config, PytestPluginManager
from _pytest.config.argparsing import Parser
from _pytest.fixtures import SubRequest
from _pytest.nodes import Item
from _pytest.reports import TestReport
from _pytest.runner import CallInfo
from pluggy import Result

from tailcut.simulation.distributions import DEFAULT_SEED, SeedSpec
from tailcut.theory.checks import CheckAssertionError
from tailcut.theory.report import render_report


def montecarlo_enabled(config: Config) -> bool:
    return os.environ.get("TAILCUT_MONTECARLO") == "1" or config.getoption("montecarlo")


@pytest.hookimpl
def pytest_configure(config: Config):
    config.addinivalue_line(
        "markers", "montecarlo: acceptance-size Monte-Carlo test, run with --montecarlo"
    )


@pytest.hookimpl
def pytest_addoption(parser: Parser, pluginmanager: PytestPluginManager):
    parser.addoption("--montecarlo", action="store_true", help="run acceptance-size simulations")


@pytest.hookimpl
def pytest_collection_modifyitems(config: Config, items: list[Item]):
    if montecarlo_enabled(config):
        return
    skip = pytest.mark.skip(reason="Monte-Carlo acceptance test, enable with --montecarlo")
    for item in items:
        if item.get_closest_marker("montecarlo"):
            item.add_marker(skip)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item: Item, call: CallInfo[None]) -> Optional[TestReport]:
    result: Result = yield
    report: TestReport = result.get_result()

    if call.excinfo is not None and isinstance(call.excinfo.value, CheckAssertionError):
        err: CheckAssertionError = call.excinfo.value
        report.longrepr = "\n".join([str(render_report(r)) for r in err.result if not r])
    return report


@pytest.fixture(scope="function")
def mc_seed(request: SubRequest) -> SeedSpec:
    """A seed stream of its own for every test, stable across runs."""
    return SeedSpec(DEFAULT_SEED, zlib.crc32(request.node.nodeid.encode("utf-8")))
