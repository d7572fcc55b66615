"""Parsing and serialization for the region-spec/v1 JSON schema.

A region document is a JSON object with a ``kind`` field:

    {"kind": "image"}
    {"kind": "patch", "row": 3, "col": 7}
    {"kind": "box", "box": [x0, y0, x1, y1]}
    {"kind": "box_set", "boxes": [[x0, y0, x1, y1], ...]}
    {"kind": "trace", "points": [[x, y], ...]}

An optional ``"version": "region-spec/v1"`` field is accepted and emitted;
any other version string is rejected.
"""
from __future__ import annotations

import json
from typing import Any, Dict, Union

from .errors import SchemaError, ValidationError
from .types import REGION_KINDS, RegionSpec

SCHEMA_VERSION = "region-spec/v1"


def parse_region_spec(doc: Union[str, Dict[str, Any]]) -> RegionSpec:
    """Parse a region-spec/v1 document (JSON text or already-decoded object)."""
    if isinstance(doc, str):
        try:
            obj = json.loads(doc)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e}") from e
    else:
        obj = doc
    if not isinstance(obj, dict):
        raise SchemaError("region spec must be a JSON object")
    version = obj.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported region-spec version {version!r}")
    kind = obj.get("kind")
    if kind is None:
        raise SchemaError("region spec is missing 'kind'")
    if kind not in REGION_KINDS:
        raise SchemaError(f"unknown region kind {kind!r}")

    if kind == "image":
        return RegionSpec.image()
    if kind == "patch":
        row, col = _require(obj, kind, "row"), _require(obj, kind, "col")
        if not (isinstance(row, int) and isinstance(col, int)):
            raise ValidationError("patch row/col must be integers")
        return RegionSpec.patch(row, col)
    if kind == "box":
        return RegionSpec(kind="box", box=_numeric_list(_require(obj, kind, "box"), 4))
    if kind == "box_set":
        boxes = _require(obj, kind, "boxes")
        if not isinstance(boxes, list):
            raise SchemaError("'boxes' must be a list")
        return RegionSpec(kind="box_set", boxes=tuple(_numeric_list(b, 4) for b in boxes))
    # trace
    points = _require(obj, "trace", "points")
    if not isinstance(points, list):
        raise SchemaError("'points' must be a list")
    return RegionSpec(kind="trace", points=tuple(_numeric_list(p, 2) for p in points))


def serialize_region_spec(spec: RegionSpec, include_version: bool = False) -> str:
    """Serialize to the canonical JSON document; inverse of :func:`parse_region_spec`."""
    obj: Dict[str, Any] = {"kind": spec.kind}
    if include_version:
        obj = {"version": SCHEMA_VERSION, "kind": spec.kind}
    if spec.kind == "patch":
        obj["row"], obj["col"] = spec.row, spec.col
    elif spec.kind == "box":
        obj["box"] = list(spec.box)
    elif spec.kind == "box_set":
        obj["boxes"] = [list(b) for b in spec.boxes]
    elif spec.kind == "trace":
        obj["points"] = [list(p) for p in spec.points]
    return json.dumps(obj, separators=(",", ":"))


def _require(obj: Dict[str, Any], kind: str, key: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{kind} region spec is missing {key!r}")
    return obj[key]


def _numeric_list(values: Any, length: int) -> tuple:
    if not isinstance(values, (list, tuple)) or len(values) != length:
        raise SchemaError(f"expected a list of {length} numbers, got {values!r}")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(f"expected a number, got {v!r}")
        out.append(float(v))
    return tuple(out)
