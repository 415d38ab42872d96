import numpy as np
import pytest

from cvsuperpose.config import RunConfig
from cvsuperpose.fock_core import TruncationPolicy, TwoModeState


@pytest.fixture
def policy():
    return TruncationPolicy(n_max=30, tail_tol=1e-12, auto_grow=True)


@pytest.fixture
def config(tmp_path):
    return RunConfig(n_max=30, grid_s=5, grid_r=4, out_dir=str(tmp_path / "results"))


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def random_state(rng):
    def make(shape=(6, 6)):
        coeffs = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        return TwoModeState(coeffs / np.linalg.norm(coeffs), normalized=True)

    return make
