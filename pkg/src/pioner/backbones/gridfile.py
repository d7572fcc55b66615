"""Binary grid archive ("PIONGRID1"): lets inference cores exchange patch grids.

Layout, all integers little-endian u32 unless noted:

    magic     9 bytes  b"PIONGRID1"
    rows, cols, dim, patch_size, src_h, src_w, flags, name_len
    name      name_len bytes, utf-8
    payload   rows*cols*dim float32, row-major (row, col, dim)
    attention rows*cols float32, present iff flags bit 0 is set
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import FormatError
from ..types import PatchGrid

MAGIC = b"PIONGRID1"
_HEADER = struct.Struct("<8I")
_FLAG_ATTENTION = 1


def save_grid(grid: PatchGrid, path: Union[str, Path], name: str = "") -> None:
    """Write ``grid`` to ``path``; :func:`load_grid` restores it bit-exactly."""
    name_bytes = name.encode("utf-8")
    flags = _FLAG_ATTENTION if grid.attention is not None else 0
    h, w = grid.source_resolution
    header = _HEADER.pack(
        grid.rows, grid.cols, grid.dim, grid.patch_size, h, w, flags, len(name_bytes)
    )
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(header)
        f.write(name_bytes)
        f.write(np.ascontiguousarray(grid.data, dtype="<f4").tobytes())
        if grid.attention is not None:
            f.write(np.ascontiguousarray(grid.attention, dtype="<f4").tobytes())


def load_grid(path: Union[str, Path]) -> PatchGrid:
    with open(path, "rb") as f:
        blob = f.read()
    return grid_from_bytes(blob)


def grid_from_bytes(blob: bytes) -> PatchGrid:
    if len(blob) < len(MAGIC) + _HEADER.size:
        raise FormatError("grid archive truncated before header")
    if blob[: len(MAGIC)] != MAGIC:
        raise FormatError("bad grid archive magic")
    rows, cols, dim, patch_size, src_h, src_w, flags, name_len = _HEADER.unpack_from(
        blob, len(MAGIC)
    )
    offset = len(MAGIC) + _HEADER.size
    if len(blob) < offset + name_len:
        raise FormatError("grid archive truncated inside name")
    name = blob[offset : offset + name_len].decode("utf-8")
    offset += name_len
    payload_len = rows * cols * dim * 4
    attention_len = rows * cols * 4 if flags & _FLAG_ATTENTION else 0
    expected = offset + payload_len + attention_len
    if len(blob) != expected:
        raise FormatError(
            f"grid archive length {len(blob)} does not match header ({expected} expected)"
        )
    data = np.frombuffer(blob, dtype="<f4", count=rows * cols * dim, offset=offset)
    data = data.reshape(rows, cols, dim)
    attention = None
    if flags & _FLAG_ATTENTION:
        attention = np.frombuffer(
            blob, dtype="<f4", count=rows * cols, offset=offset + payload_len
        ).reshape(rows, cols)
    try:
        return PatchGrid(
            rows=rows,
            cols=cols,
            dim=dim,
            data=data,
            source_resolution=(src_h, src_w),
            patch_size=patch_size,
            attention=attention,
        )
    except Exception as e:
        raise FormatError(f"grid archive holds an invalid grid: {e}") from e
