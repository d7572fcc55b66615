"""Core domain types: patch grids, region specs, selections, embeddings, captions.

All types are immutable after construction and safe to share across threads.
Numpy-backed fields are marked read-only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError

REGION_KINDS = ("image", "patch", "box", "box_set", "trace")

WEIGHT_SUM_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PatchGrid:
    """Dense grid of patch embeddings for one image.

    ``data`` has shape (rows, cols, dim). ``source_resolution`` is the
    (height, width) in pixels the image was resized to before encoding,
    and always equals (rows * patch_size, cols * patch_size).
    ``attention`` is an optional (rows, cols) nonnegative map summarizing
    the backbone's last-layer attention.
    """

    rows: int
    cols: int
    dim: int
    data: np.ndarray
    source_resolution: Tuple[int, int]
    patch_size: int
    attention: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1 or self.dim < 1:
            raise ValidationError("grid dims must be >= 1")
        data = np.asarray(self.data, dtype=np.float32)
        if data.shape != (self.rows, self.cols, self.dim):
            raise ValidationError(
                f"data shape {data.shape} != {(self.rows, self.cols, self.dim)}"
            )
        if not np.isfinite(data).all():
            raise ValidationError("grid data contains non-finite values")
        if self.patch_size < 1:
            raise ValidationError("patch_size must be >= 1")
        h, w = self.source_resolution
        if (h, w) != (self.rows * self.patch_size, self.cols * self.patch_size):
            raise ValidationError(
                "source_resolution must equal (rows*patch_size, cols*patch_size)"
            )
        object.__setattr__(self, "data", _readonly(data))
        object.__setattr__(self, "source_resolution", (int(h), int(w)))
        if self.attention is not None:
            att = np.asarray(self.attention, dtype=np.float32)
            if att.shape != (self.rows, self.cols):
                raise ValidationError("attention shape must be (rows, cols)")
            if not np.isfinite(att).all() or (att < 0).any():
                raise ValidationError("attention entries must be finite and >= 0")
            if not (att > 0).any():
                raise ValidationError("attention must have at least one positive entry")
            object.__setattr__(self, "attention", _readonly(att))

    @property
    def n_patches(self) -> int:
        return self.rows * self.cols

    def flat(self) -> np.ndarray:
        """Patch vectors as an (rows*cols, dim) view; index = row*cols + col."""
        return self.data.reshape(self.rows * self.cols, self.dim)

    def vector(self, index: int) -> np.ndarray:
        if not 0 <= index < self.n_patches:
            raise ValidationError(f"patch index {index} out of grid")
        return self.flat()[index]


def _check_finite_pair(name, x, y):
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValidationError(f"{name} coordinates must be finite")


@dataclass(frozen=True)
class RegionSpec:
    """Tagged union over region kinds.

    Coordinates are always in original-image pixel space; rescaling to the
    backbone grid happens at selection time.
    """

    kind: str
    row: Optional[int] = None
    col: Optional[int] = None
    box: Optional[Tuple[float, float, float, float]] = None
    boxes: Optional[Tuple[Tuple[float, float, float, float], ...]] = None
    points: Optional[Tuple[Tuple[float, float], ...]] = None

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ValidationError(f"unknown region kind {self.kind!r}")
        if self.kind == "patch":
            if self.row is None or self.col is None:
                raise ValidationError("patch region requires row and col")
            if self.row < 0 or self.col < 0:
                raise ValidationError("patch row/col must be >= 0")
        elif self.kind == "box":
            object.__setattr__(self, "box", _valid_box(self.box))
        elif self.kind == "box_set":
            if not self.boxes:
                raise ValidationError("box_set must contain at least one box")
            object.__setattr__(
                self, "boxes", tuple(_valid_box(b) for b in self.boxes)
            )
        elif self.kind == "trace":
            if not self.points:
                raise ValidationError("trace must contain at least one point")
            pts = []
            for p in self.points:
                x, y = float(p[0]), float(p[1])
                _check_finite_pair("trace", x, y)
                pts.append((x, y))
            object.__setattr__(self, "points", tuple(pts))

    @staticmethod
    def image() -> "RegionSpec":
        return RegionSpec(kind="image")

    @staticmethod
    def patch(row: int, col: int) -> "RegionSpec":
        return RegionSpec(kind="patch", row=int(row), col=int(col))

    @staticmethod
    def from_box(x0, y0, x1, y1) -> "RegionSpec":
        return RegionSpec(kind="box", box=(x0, y0, x1, y1))

    @staticmethod
    def box_set(boxes: Sequence[Sequence[float]]) -> "RegionSpec":
        return RegionSpec(kind="box_set", boxes=tuple(tuple(b) for b in boxes))

    @staticmethod
    def trace(points: Sequence[Sequence[float]]) -> "RegionSpec":
        return RegionSpec(kind="trace", points=tuple(tuple(p) for p in points))


def _valid_box(b) -> Tuple[float, float, float, float]:
    if b is None or len(b) != 4:
        raise ValidationError("box must be (x0, y0, x1, y1)")
    x0, y0, x1, y1 = (float(v) for v in b)
    _check_finite_pair("box", x0, y0)
    _check_finite_pair("box", x1, y1)
    if not (x0 < x1 and y0 < y1):
        raise ValidationError(f"degenerate box {(x0, y0, x1, y1)}: need x0 < x1 and y0 < y1")
    return (x0, y0, x1, y1)


@dataclass(frozen=True)
class PatchSelection:
    """Ordered multiset of flat patch indices with parallel aggregation weights.

    Duplicates are permitted (traces, overlapping box sets) and carry
    independent weight entries. Weights are nonnegative and sum to 1.
    """

    indices: Tuple[int, ...]
    weights: Tuple[float, ...]
    region_kind: Optional[str] = None

    def __post_init__(self):
        if not self.indices:
            raise ValidationError("selection must be nonempty")
        if len(self.indices) != len(self.weights):
            raise ValidationError("indices and weights must be parallel")
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise ValidationError("patch indices must be >= 0")
        w = tuple(float(x) for x in self.weights)
        if any(x < 0 or not math.isfinite(x) for x in w):
            raise ValidationError("weights must be finite and nonnegative")
        total = math.fsum(w)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"weights sum to {total}, expected 1")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.indices)

    @staticmethod
    def uniform(indices: Sequence[int], region_kind: Optional[str] = None) -> "PatchSelection":
        n = len(indices)
        if n == 0:
            raise ValidationError("selection must be nonempty")
        return PatchSelection(
            indices=tuple(int(i) for i in indices),
            weights=(1.0 / n,) * n,
            region_kind=region_kind,
        )

    def check_bounds(self, n_patches: int) -> None:
        if any(i >= n_patches for i in self.indices):
            raise ValidationError("selection index out of grid")


@dataclass(frozen=True)
class RegionEmbedding:
    """A region's embedding: convex combination of selected patch vectors."""

    vector: np.ndarray
    provenance: Tuple[str, str] = ("custom", "uniform")  # (region kind, aggregation mode)

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float64)
        if v.ndim != 1:
            raise ValidationError("region embedding must be a 1-d vector")
        if not np.isfinite(v).all():
            raise ValidationError("region embedding has non-finite entries")
        object.__setattr__(self, "vector", _readonly(v))

    @property
    def dim(self) -> int:
        return int(self.vector.shape[0])


@dataclass(frozen=True)
class Caption:
    """Generated caption text with its token ids and optional log-probability."""

    text: str
    token_ids: Tuple[int, ...] = ()
    score: Optional[float] = None
    empty: bool = field(default=False)  # set when generation produced nothing usable

    def __post_init__(self):
        object.__setattr__(self, "token_ids", tuple(int(t) for t in self.token_ids))
        if not self.text and not self.empty:
            raise ValidationError("caption text is empty but not flagged empty")
