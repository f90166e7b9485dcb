import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure local src/ is on the import path for tests without installation
ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from robustcrt.model import NoiseSpec, build_moduli, observe, sample_instance  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_instance():
    """Factory for (moduli, truth, observation) with the simulation defaults."""

    def _make(n=2, snr=math.inf, seed=0, l_min=2, count=None):
        generator = np.random.default_rng(seed)
        noise = NoiseSpec(snr_db=snr)
        ms = build_moduli(n, 100.0, count=count, l_min=l_min).with_noise(noise)
        gt = sample_instance(ms, n, generator)
        obs = observe(gt, ms, noise, generator)
        return ms, gt, obs

    return _make


@pytest.fixture
def same_clusters():
    """Whether two assignments group observations identically up to cluster labels."""

    def _same(K_a, K_b):
        cols_a = sorted(tuple(col) for col in np.asarray(K_a).T.tolist())
        cols_b = sorted(tuple(col) for col in np.asarray(K_b).T.tolist())
        return cols_a == cols_b

    return _same
