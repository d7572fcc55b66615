import numpy as np
import pytest

from pioner.backbones import SyntheticAdapter
from pioner.types import PatchGrid


def make_grid(rows, cols, dim, patch_size=10, seed=0, attention=None, data=None):
    rng = np.random.default_rng(seed)
    if data is None:
        data = rng.normal(size=(rows, cols, dim))
    return PatchGrid(
        rows=rows,
        cols=cols,
        dim=dim,
        data=data,
        source_resolution=(rows * patch_size, cols * patch_size),
        patch_size=patch_size,
        attention=attention,
    )


class CountingAdapter(SyntheticAdapter):
    """Synthetic adapter that counts encode_image calls."""

    def __init__(self, **kw):
        super().__init__(**kw)
        self.encode_calls = 0

    def encode_image(self, image):
        self.encode_calls += 1
        return super().encode_image(image)


@pytest.fixture
def tiny_adapter():
    return SyntheticAdapter(embedding_dim=8, patch_size=14, input_resolution=56)


@pytest.fixture
def rgb_image():
    rng = np.random.default_rng(7)
    return rng.integers(0, 255, (90, 120, 3), dtype=np.uint8)


def save_png(array, path):
    from PIL import Image

    Image.fromarray(array, "RGB").save(path)
    return path
