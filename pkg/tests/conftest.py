import numpy as np
import pytest

from pfc.mesh import R_SUP, TimeMesh, mesh_from_ratios


def random_s1_mesh(rng: np.random.Generator, n_max: int = 64,
                   n_min: int = 1, ratio_hi: float = 3.5) -> TimeMesh:
    """Random mesh with all adjacent ratios inside the S1 range."""
    n = int(rng.integers(n_min, n_max + 1))
    tau1 = float(rng.uniform(1e-3, 1.0))
    ratios = rng.uniform(0.05, ratio_hi, size=n - 1)
    assert ratio_hi < R_SUP
    return mesh_from_ratios(tau1, ratios)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
