"""End-to-end region captioning: encode once, caption many regions."""
from __future__ import annotations

from typing import Optional, Tuple, Union

from ..backbones.base import BackboneAdapter, decode_image
from ..backbones.precomputed import PrecomputedAdapter
from ..errors import CheckpointError
from ..gap import MemoryBank, passthrough, project
from ..regions import aggregate, select_patches
from ..types import Caption, PatchGrid, PatchSelection, RegionSpec
from .checkpoint import DecoderCheckpoint
from .generation import DEFAULT_MAX_LEN, generate


class CaptionPipeline:
    """Composes backbone, region aggregation, gap mitigation, and decoding.

    The patch grid for an image is computed once by :meth:`encode`; any
    number of regions can then be captioned against it via
    :meth:`caption_grid` without another backbone pass.
    """

    def __init__(
        self,
        adapter: BackboneAdapter,
        checkpoint: DecoderCheckpoint,
        bank: Optional[MemoryBank] = None,
        aggregation: str = "uniform",
        strategy: str = "greedy",
        beam_width: int = 4,
        max_len: int = DEFAULT_MAX_LEN,
    ):
        if checkpoint.mitigation_mode == "memory" and bank is None:
            raise CheckpointError(
                "checkpoint was trained for memory projection; a memory bank is required"
            )
        if bank is not None and bank.dim != checkpoint.prefix_dim:
            raise CheckpointError(
                f"bank dim {bank.dim} != checkpoint prefix dim {checkpoint.prefix_dim}"
            )
        if adapter.embedding_dim != checkpoint.prefix_dim:
            raise CheckpointError(
                f"adapter dim {adapter.embedding_dim} != checkpoint prefix dim "
                f"{checkpoint.prefix_dim}"
            )
        self.adapter = adapter
        self.checkpoint = checkpoint
        self.bank = bank
        self.aggregation = aggregation
        self.strategy = strategy
        self.beam_width = beam_width
        self.max_len = max_len

    def encode(self, image, image_size: Optional[Tuple[int, int]] = None):
        """Encode an image once; returns (grid, original (width, height))."""
        if isinstance(self.adapter, PrecomputedAdapter):
            grid = self.adapter.encode_image(image)
            if image_size is None:
                h, w = grid.source_resolution
                image_size = (w, h)
            return grid, image_size
        pixels = decode_image(image)
        grid = self.adapter.encode_image(pixels)
        return grid, image_size or pixels.size

    def caption_grid(
        self,
        grid: PatchGrid,
        image_size: Optional[Tuple[int, int]],
        spec: RegionSpec,
        aggregation: Optional[str] = None,
        return_selection: bool = False,
    ) -> Union[Caption, Tuple[Caption, PatchSelection]]:
        selection = select_patches(spec, grid, image_size=image_size)
        embedding = aggregate(selection, grid, mode=aggregation or self.aggregation)
        if self.bank is not None:
            prefix = project(embedding.vector, self.bank)
        else:
            prefix = passthrough(embedding.vector)
        caption = generate(
            prefix,
            self.checkpoint,
            strategy=self.strategy,
            beam_width=self.beam_width,
            max_len=self.max_len,
        )
        if return_selection:
            return caption, selection
        return caption

    def caption_image(
        self,
        image,
        spec: RegionSpec,
        aggregation: Optional[str] = None,
        image_size: Optional[Tuple[int, int]] = None,
    ) -> Caption:
        grid, size = self.encode(image, image_size=image_size)
        return self.caption_grid(grid, size, spec, aggregation=aggregation)
