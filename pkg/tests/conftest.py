import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
REPO_ROOT = TESTS_DIR.parent
DEMO_DIR = REPO_ROOT / "demo"
GOLDEN_D1 = TESTS_DIR / "data" / "golden_d1"

if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

from cascom import load_kb  # noqa: E402


@pytest.fixture(scope="session")
def d1():
    return load_kb(DEMO_DIR / "d1.skb")


@pytest.fixture(scope="session")
def d2():
    return load_kb(DEMO_DIR / "d2.skb")


@pytest.fixture(scope="session")
def d1_path():
    return DEMO_DIR / "d1.skb"


@pytest.fixture(scope="session")
def d2_path():
    return DEMO_DIR / "d2.skb"


@pytest.fixture(scope="session")
def comfort_script_path():
    return DEMO_DIR / "comfort-script.json"


@pytest.fixture(scope="session")
def golden_d1_dir():
    return GOLDEN_D1
