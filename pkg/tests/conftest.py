import sys
from pathlib import Path

import numpy as np
import pytest

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "data"

sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_path(rng, alphabet_size, min_segments=2, max_segments=6,
                min_duration=0.05, max_duration=0.5):
    from liessm import PiecewisePath

    k = int(rng.integers(min_segments, max_segments + 1))
    symbols = rng.integers(0, alphabet_size, size=k).tolist()
    durations = rng.uniform(min_duration, max_duration, size=k).tolist()
    return PiecewisePath(tuple(zip(symbols, durations)))
