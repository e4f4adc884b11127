import sys
from pathlib import Path

import pytest

# Make the sibling oracles module importable regardless of invocation dir.
sys.path.insert(0, str(Path(__file__).parent))

from leveldiv import load_smb_level


@pytest.fixture(scope="session")
def mario_1_1():
    return load_smb_level("mario-1-1")


@pytest.fixture(scope="session")
def smb_data_dir():
    import leveldiv.corpus as corpus

    return Path(corpus.__file__).parent / "data" / "smb"
