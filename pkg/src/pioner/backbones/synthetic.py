"""Deterministic synthetic adapter for desk-scale tests and demos.

Patch embeddings are a fixed seeded projection of cheap color statistics
(mean RGB plus 2x2 sub-patch means, with a constant bias channel), so the
same pixels always give the same grid. Text embeddings are a seeded
hashing bag-of-words projection: texts sharing words land closer in the
embedding space, which is enough semantic structure for smoke tests.
"""
from __future__ import annotations

import hashlib
import re

import numpy as np

from ..types import PatchGrid
from .base import BackboneAdapter, ImageLike, decode_image, require_nonempty_text, resize_to_square

_N_FEATURES = 16  # 1 bias + 3 mean RGB + 4 quadrants x 3 channels
_HASH_SLOTS = 4  # buckets each token spreads over

_WORD = re.compile(r"\w+")


class SyntheticAdapter(BackboneAdapter):
    def __init__(
        self,
        embedding_dim: int = 64,
        patch_size: int = 14,
        input_resolution: int = 518,
        seed: int = 12061984,
    ):
        self.name = "synthetic"
        self.embedding_dim = int(embedding_dim)
        self.patch_size = int(patch_size)
        self.input_resolution = int(input_resolution)
        self.has_attention = True
        self.has_text_encoder = True
        self.seed = int(seed)
        self._check_geometry()
        rng = np.random.default_rng(self.seed)
        self._proj = rng.standard_normal((_N_FEATURES, self.embedding_dim)).astype(np.float32)
        self._proj.flags.writeable = False

    def encode_image(self, image: ImageLike) -> PatchGrid:
        pixels = resize_to_square(decode_image(image), self.input_resolution)
        n, p = self.grid_side, self.patch_size
        patches = pixels.reshape(n, p, n, p, 3).transpose(0, 2, 1, 3, 4)  # (n, n, p, p, 3)
        feats = np.empty((n, n, _N_FEATURES), dtype=np.float32)
        feats[..., 0] = 1.0
        feats[..., 1:4] = patches.mean(axis=(2, 3))
        half = p // 2
        quads = (
            patches[:, :, :half, :half],
            patches[:, :, :half, half:],
            patches[:, :, half:, :half],
            patches[:, :, half:, half:],
        )
        for q, quad in enumerate(quads):
            feats[..., 4 + 3 * q : 7 + 3 * q] = quad.mean(axis=(2, 3))
        data = feats @ self._proj
        norms = np.linalg.norm(data, axis=2)
        attention = norms if norms.any() else np.ones_like(norms)
        return PatchGrid(
            rows=n,
            cols=n,
            dim=self.embedding_dim,
            data=data,
            source_resolution=(self.input_resolution, self.input_resolution),
            patch_size=p,
            attention=attention,
        )

    def encode_text(self, text: str) -> np.ndarray:
        tokens = _WORD.findall(require_nonempty_text(text).lower())
        if not tokens:
            require_nonempty_text("")  # no word-like content
        vec = np.zeros(self.embedding_dim, dtype=np.float64)
        for token in tokens:
            digest = hashlib.blake2b(
                token.encode("utf-8"), digest_size=4 * _HASH_SLOTS, salt=b"pioner-txt"
            ).digest()
            for k in range(_HASH_SLOTS):
                chunk = digest[4 * k : 4 * k + 4]
                idx = int.from_bytes(chunk[:3], "little") % self.embedding_dim
                sign = 1.0 if chunk[3] & 1 else -1.0
                vec[idx] += sign
        vec /= len(tokens)
        return vec.astype(np.float32)
