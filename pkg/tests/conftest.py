import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from core.materials import MaterialParameters, PRESETS  # noqa: E402


@pytest.fixture
def preset_params():
    def _get(name: str) -> MaterialParameters:
        return PRESETS[name]['params']
    return _get
