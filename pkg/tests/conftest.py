import sys

import pytest

from pekeris.pipeline import PipelineConfig, perimetric_operator
from pekeris.spectral import derived_recurrence


@pytest.fixture(scope="session")
def perimetric():
    return perimetric_operator(PipelineConfig(interaction=True))


@pytest.fixture(scope="session")
def perimetric_free():
    return perimetric_operator(PipelineConfig(interaction=False))


@pytest.fixture(scope="session")
def rec():
    return derived_recurrence(True)


@pytest.fixture(scope="session")
def rec_free():
    return derived_recurrence(False)


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path_factory, monkeypatch):
    monkeypatch.setenv("PEKERIS_CACHE_DIR", str(tmp_path_factory.getbasetemp() / "cache"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
