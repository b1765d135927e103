import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from lexverify.cases import load_fsc_fixture  # noqa: E402
from lexverify.solver import default_config  # noqa: E402

FIXTURES = REPO / "fixtures"


@pytest.fixture(scope="session")
def fsc():
    return load_fsc_fixture()


@pytest.fixture(scope="session")
def solver_cfg():
    return default_config()


@pytest.fixture()
def store_dir(tmp_path):
    return tmp_path / "store"
