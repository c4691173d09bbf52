import numpy as np
import pytest

from stegkit import srm


@pytest.fixture(scope="session")
def kernel_table():
    """The high-pass kernel table as exported by the embedding toolkit."""
    return srm.export_kernel_table()


@pytest.fixture(scope="session")
def toy_covers():
    """Synthetic textured 64x64 covers: per-image flat base plus noise."""
    rng = np.random.default_rng(7)
    base = rng.integers(40, 200, (60, 1, 1))
    return np.clip(base + rng.normal(0, 25, (60, 64, 64)), 0, 255).astype(np.uint8)
