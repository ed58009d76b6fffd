import numpy as np
import pytest


@pytest.fixture
def step_image():
    """Clean two-region scene: uniform blue sky rows 0..19, dark ground below."""
    img = np.zeros((48, 64, 3), dtype=np.uint8)
    img[:20] = (100, 140, 220)
    img[20:] = (50, 40, 30)
    truth = np.zeros((48, 64), dtype=bool)
    truth[:20] = True
    return img, truth


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
