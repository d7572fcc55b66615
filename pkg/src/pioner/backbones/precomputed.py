"""Adapter serving grids precomputed offline into PIONGRID1 archives."""
from __future__ import annotations

from pathlib import Path
from typing import Union

from ..errors import BackboneError
from ..types import PatchGrid
from .base import BackboneAdapter
from .gridfile import load_grid

SUFFIX = ".piongrid"


class PrecomputedAdapter(BackboneAdapter):
    """Looks up archives by image stem: ``<root>/<image stem>.piongrid``.

    ``encode_image`` only accepts path-like references (the pixels were
    consumed offline when the archives were written).
    """

    def __init__(self, root: Union[str, Path]):
        self.name = "precomputed"
        self.root = Path(root)
        self.has_text_encoder = False
        archives = sorted(self.root.glob(f"*{SUFFIX}"))
        if not archives:
            raise BackboneError(f"no {SUFFIX} archives under {self.root}")
        probe = load_grid(archives[0])
        self.patch_size = probe.patch_size
        self.embedding_dim = probe.dim
        self.input_resolution = probe.rows * probe.patch_size
        self.has_attention = probe.attention is not None
        self._check_geometry()

    def encode_image(self, image) -> PatchGrid:
        if not isinstance(image, (str, Path)):
            raise BackboneError(
                "precomputed adapter resolves images by path; got raw pixels"
            )
        stem = Path(image).stem
        path = self.root / f"{stem}{SUFFIX}"
        if not path.exists():
            raise BackboneError(f"no precomputed grid for {stem!r} under {self.root}")
        return load_grid(path)
