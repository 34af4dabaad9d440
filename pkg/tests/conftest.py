from pathlib import Path

import pytest

from sizecapm.data import save_french_deciles, write_fred_series
from sizecapm.synthetic import synthetic_panel

DATA = Path(__file__).parent / "data"


@pytest.fixture
def fixture_dir():
    return DATA


@pytest.fixture(scope="session")
def synthetic_files(tmp_path_factory):
    """A synthetic 405-month panel written in the on-disk input formats."""
    root = tmp_path_factory.mktemp("synthetic")
    panel = synthetic_panel(seed=11)
    save_french_deciles(panel.deciles, root / "deciles")
    write_fred_series(root / "vix.csv", panel.vix)
    write_fred_series(root / "tb3.csv", panel.riskfree)
    return root, panel
