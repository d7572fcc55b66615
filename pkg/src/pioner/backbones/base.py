"""Adapter interface over vision-language encoders."""
from __future__ import annotations

import io
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from ..errors import BackboneError, CapabilityError, ValidationError
from ..types import PatchGrid

ImageLike = Union[str, Path, bytes, Image.Image, np.ndarray]


class BackboneAdapter(ABC):
    """A loaded vision(-language) encoder producing patch grids.

    Adapters are immutable after load; encode calls are thread-safe.
    """

    name: str
    patch_size: int
    input_resolution: int
    embedding_dim: int
    has_attention: bool = False
    has_text_encoder: bool = False

    def _check_geometry(self) -> None:
        if self.input_resolution % self.patch_size != 0:
            raise BackboneError(
                f"input resolution {self.input_resolution} not divisible by "
                f"patch size {self.patch_size}"
            )
        if self.embedding_dim < 1:
            raise BackboneError("embedding dimension must be >= 1")

    @property
    def grid_side(self) -> int:
        return self.input_resolution // self.patch_size

    @abstractmethod
    def encode_image(self, image: ImageLike) -> PatchGrid:
        """Encode an image into its dense patch grid."""

    def encode_text(self, text: str) -> np.ndarray:
        raise CapabilityError(f"adapter {self.name!r} has no text encoder")


def decode_image(image: ImageLike) -> Image.Image:
    """Decode anything image-like into an RGB PIL image."""
    try:
        if isinstance(image, Image.Image):
            return image.convert("RGB")
        if isinstance(image, np.ndarray):
            if image.ndim != 3 or image.shape[2] != 3:
                raise BackboneError(f"expected an (H, W, 3) array, got {image.shape}")
            return Image.fromarray(np.asarray(image, dtype=np.uint8), "RGB")
        if isinstance(image, (bytes, bytearray)):
            return Image.open(io.BytesIO(image)).convert("RGB")
        if isinstance(image, (str, Path)):
            return Image.open(image).convert("RGB")
    except BackboneError:
        raise
    except Exception as e:
        raise BackboneError(f"cannot decode image: {e}") from e
    raise BackboneError(f"unsupported image input type {type(image)!r}")


def resize_to_square(img: Image.Image, resolution: int) -> np.ndarray:
    """Bilinear resize to resolution x resolution; aspect ratio not preserved."""
    resized = img.resize((resolution, resolution), Image.BILINEAR)
    return np.asarray(resized, dtype=np.float32) / 255.0


def require_nonempty_text(text: str) -> str:
    if not isinstance(text, str) or not text.strip():
        raise ValidationError("text must be nonempty")
    return text
