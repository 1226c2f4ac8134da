import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from permit_cmra.cost_model import CostParams, GoodSpec  # noqa: E402


@pytest.fixture
def two_goods():
    def make(cap0=2, cap1=2):
        return (GoodSpec(0, "GHG", "kgCO2e", cap0), GoodSpec(1, "NutrientRunoff", "kgNe", cap1))

    return make


@pytest.fixture
def default_bidders():
    return (
        CostParams((2.0, 5.0), (0.05, 0.70), 0.5, 0.1),
        CostParams((2.0, 5.0), (0.05, 0.70), 0.1, 0.1),
    )


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
