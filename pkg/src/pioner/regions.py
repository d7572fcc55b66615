"""Region-to-patch selection and weighted aggregation over a patch grid.

Region coordinates arrive in original-image pixel space and are rescaled
to the grid's source resolution here. Flat patch index = row * cols + col.
"""
from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np

from .errors import (
    DegenerateWeightError,
    EmptySelectionError,
    ModeError,
    ValidationError,
)
from .types import PatchGrid, PatchSelection, RegionEmbedding, RegionSpec

AGGREGATION_MODES = ("uniform", "gaussian", "attention")


def select_patches(
    spec: RegionSpec,
    grid: PatchGrid,
    image_size: Optional[Tuple[int, int]] = None,
) -> PatchSelection:
    """Map a region spec to the multiset of patch indices it covers.

    ``image_size`` is the original (width, height) the coordinates refer
    to; when omitted, coordinates are taken to be in the grid's own
    source-resolution space. Weights are uniform over the multiset, so a
    patch covered by k boxes (or swept k times by a trace) carries k
    times the mass of a once-covered patch.
    """
    src_h, src_w = grid.source_resolution
    if image_size is None:
        orig_w, orig_h = float(src_w), float(src_h)
    else:
        orig_w, orig_h = float(image_size[0]), float(image_size[1])
        if orig_w <= 0 or orig_h <= 0:
            raise ValidationError(f"bad image size {image_size}")

    if spec.kind == "image":
        indices = list(range(grid.n_patches))
    elif spec.kind == "patch":
        if spec.row >= grid.rows or spec.col >= grid.cols:
            raise ValidationError(
                f"patch ({spec.row}, {spec.col}) outside {grid.rows}x{grid.cols} grid"
            )
        indices = [spec.row * grid.cols + spec.col]
    elif spec.kind == "box":
        indices = _box_indices(spec.box, grid, orig_w, orig_h)
        if not indices:
            raise EmptySelectionError(f"box {spec.box} overlaps no patch cell")
    elif spec.kind == "box_set":
        indices = []
        for box in spec.boxes:
            hit = _box_indices(box, grid, orig_w, orig_h)
            if not hit:
                raise EmptySelectionError(f"box {box} overlaps no patch cell")
            indices.extend(hit)
    elif spec.kind == "trace":
        indices = [_point_index(x, y, grid, orig_w, orig_h) for x, y in spec.points]
    else:  # pragma: no cover - RegionSpec validates kinds
        raise ValidationError(f"unknown region kind {spec.kind!r}")

    return PatchSelection.uniform(indices, region_kind=spec.kind)


def _box_indices(box, grid: PatchGrid, orig_w: float, orig_h: float) -> list:
    """Cells whose rescaled geometric overlap with the box is strictly positive."""
    src_h, src_w = grid.source_resolution
    x0, y0, x1, y1 = box
    # multiply before dividing: exact for integer coordinates, so a box that
    # only touches a cell boundary never leaks into the neighboring cell
    x0, x1 = x0 * src_w / orig_w, x1 * src_w / orig_w
    y0, y1 = y0 * src_h / orig_h, y1 * src_h / orig_h
    p = grid.patch_size
    # candidate cell ranges; the strict-overlap test below prunes touching-only cells
    c_lo = max(0, int(math.floor(x0 / p)))
    c_hi = min(grid.cols - 1, int(math.ceil(x1 / p)) - 1)
    r_lo = max(0, int(math.floor(y0 / p)))
    r_hi = min(grid.rows - 1, int(math.ceil(y1 / p)) - 1)
    out = []
    for r in range(r_lo, r_hi + 1):
        for c in range(c_lo, c_hi + 1):
            ow = min(x1, (c + 1) * p) - max(x0, c * p)
            oh = min(y1, (r + 1) * p) - max(y0, r * p)
            if ow > 0 and oh > 0:
                out.append(r * grid.cols + c)
    return out


def _point_index(x, y, grid: PatchGrid, orig_w, orig_h) -> int:
    src_h, src_w = grid.source_resolution
    # clamp stray points into the canvas instead of dropping them
    x = min(max(x, 0.0), orig_w)
    y = min(max(y, 0.0), orig_h)
    c = min(grid.cols - 1, int(x * src_w / orig_w / grid.patch_size))
    r = min(grid.rows - 1, int(y * src_h / orig_h / grid.patch_size))
    return r * grid.cols + c


def gaussian_weights(rows: int, cols: int) -> np.ndarray:
    """Center-weighted (rows, cols) weight grid, normalized to sum 1.

    Patch (a, b) coordinates are linearly spaced over [-1, 1]^2 with the
    top-left patch at (-1, -1) and the bottom-right at (1, 1); the
    unnormalized weight is exp(-(a^2 + b^2)).
    """
    if rows < 1 or cols < 1:
        raise ValidationError("gaussian weights need rows >= 1 and cols >= 1")
    a = _axis_coords(rows)[:, None]
    b = _axis_coords(cols)[None, :]
    w = np.exp(-(a**2 + b**2))
    return w / w.sum()


def _axis_coords(n: int) -> np.ndarray:
    # a single row/column sits at the center; the factor cancels anyway
    return np.zeros(1) if n == 1 else np.linspace(-1.0, 1.0, n)


def aggregate(
    selection: PatchSelection,
    grid: PatchGrid,
    mode: str = "uniform",
) -> RegionEmbedding:
    """Convex combination of the selected patch vectors.

    uniform: mean over the multiset (duplicates count); gaussian: valid
    only when the selection is one full rectangle of distinct contiguous
    patches, weighted in the rectangle's own [-1, 1]^2 frame; attention:
    weights proportional to the grid's attention map over the selection.
    """
    if mode not in AGGREGATION_MODES:
        raise ModeError(f"unknown aggregation mode {mode!r}")
    selection.check_bounds(grid.n_patches)

    idx = np.asarray(selection.indices, dtype=np.int64)
    if mode == "uniform":
        weights = np.full(len(idx), 1.0 / len(idx))
    elif mode == "gaussian":
        weights = _gaussian_selection_weights(idx, grid)
    else:
        if grid.attention is None:
            raise ModeError("attention aggregation requires a grid attention map")
        att = grid.attention.reshape(-1).astype(np.float64)
        weights = att[idx]
        mass = weights.sum()
        if mass <= 0:
            raise DegenerateWeightError("attention mass over the selection is zero")
        weights = weights / mass

    # fixed ascending-index order with compensated summation: permuting the
    # selection cannot change the result
    order = np.argsort(idx, kind="stable")
    vectors = grid.flat().astype(np.float64)[idx[order]]
    out = _kahan_combine(vectors, weights[order])
    kind = selection.region_kind or "custom"
    return RegionEmbedding(vector=out, provenance=(kind, mode))


def _gaussian_selection_weights(idx: np.ndarray, grid: PatchGrid) -> np.ndarray:
    rows_sel = idx // grid.cols
    cols_sel = idx % grid.cols
    r0, r1 = int(rows_sel.min()), int(rows_sel.max())
    c0, c1 = int(cols_sel.min()), int(cols_sel.max())
    height, width = r1 - r0 + 1, c1 - c0 + 1
    # unique indices filling their bounding rectangle exactly <=> a full rectangle
    if len(np.unique(idx)) != len(idx) or len(idx) != height * width:
        raise ModeError(
            "gaussian aggregation applies only to one full rectangle of patches "
            "(whole image or a single box)"
        )
    grid_w = gaussian_weights(height, width)
    return grid_w[rows_sel - r0, cols_sel - c0]


def _kahan_combine(vectors: np.ndarray, weights: np.ndarray) -> np.ndarray:
    total = np.zeros(vectors.shape[1], dtype=np.float64)
    comp = np.zeros_like(total)
    for vec, w in zip(vectors, weights):
        term = w * vec - comp
        candidate = total + term
        comp = (candidate - total) - term
        total = candidate
    return total
