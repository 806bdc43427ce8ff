import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from iceentropy import _accel  # noqa: E402

FROZEN = json.loads((Path(__file__).parent / "data" / "frozen_oracles.json").read_text())

BACKENDS = ["numba", "numpy"] if _accel.HAVE_NUMBA else ["numpy"]


@pytest.fixture(scope="session")
def frozen():
    return FROZEN


@pytest.fixture(params=BACKENDS)
def mc_backend(request):
    return request.param
