
import pytest

from twinbeam import chain
from twinbeam.scenario import Scenario


@pytest.fixture(autouse=True)
def _no_env_seed(monkeypatch):
    monkeypatch.delenv("TWINBEAM_SEED", raising=False)


@pytest.fixture(scope="session")
def scenario():
    return Scenario.load("paper_fig1")


@pytest.fixture(scope="session")
def opo_cfg(scenario):
    return chain.opo(scenario)


@pytest.fixture(scope="session")
def paper_bench(scenario):
    """Full Monte-Carlo bench run on the shipped scenario (computed once)."""
    from twinbeam import noise_bench as nb

    model, settings, band, f_an = chain.bench(scenario, scenario.seed)
    return model, settings, nb.run_bench(model, settings, band=band, analysis_frequency=f_an)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
