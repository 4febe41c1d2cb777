import pathlib
import sys

import pytest

TESTS = pathlib.Path(__file__).parent
sys.path.insert(0, str(TESTS))

FIXTURES = TESTS.parent / "fixtures"


@pytest.fixture
def fixtures() -> pathlib.Path:
    return FIXTURES


@pytest.fixture
def wocao_entry():
    from helpers import wocao_entry_tree

    return wocao_entry_tree()
