"""Converters from upstream public annotation formats to the task JSONL.

These cover the documented subsets of the upstream files; anything beyond
that subset is ignored. Each converter returns the number of samples
written.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Union


def convert_vg_regions(src: Union[str, Path], out: Union[str, Path]) -> int:
    """Visual-Genome-style region descriptions -> dense task JSONL.

    Expects a JSON list of ``{"id"|"image_id", "regions": [{"image_id",
    "region_id"?, "x", "y", "width", "height", "phrase"}]}``.
    """
    with open(src, "r", encoding="utf-8") as f:
        images = json.load(f)
    n = 0
    with open(out, "w", encoding="utf-8") as f:
        for entry in images:
            image_id = entry.get("id", entry.get("image_id"))
            for region in entry.get("regions", []):
                x, y = region["x"], region["y"]
                w, h = region["width"], region["height"]
                if w <= 0 or h <= 0:
                    continue
                rid = region.get("region_id", n)
                obj = {
                    "id": f"vg-{image_id}-{rid}",
                    "image": str(region.get("image", f"{image_id}.jpg")),
                    "references": [str(region["phrase"])],
                    "region": {"kind": "box", "box": [x, y, x + w, y + h]},
                }
                f.write(json.dumps(obj, separators=(",", ":")) + "\n")
                n += 1
    return n


def convert_karpathy_split(
    src: Union[str, Path], out: Union[str, Path], split: str = "test"
) -> int:
    """Karpathy-style caption splits -> image task JSONL.

    Expects ``{"images": [{"filename", "split", "filepath"?,
    "sentences": [{"raw"}]}]}``.
    """
    with open(src, "r", encoding="utf-8") as f:
        doc = json.load(f)
    n = 0
    with open(out, "w", encoding="utf-8") as f:
        for img in doc.get("images", []):
            if img.get("split") != split:
                continue
            refs = [s["raw"] for s in img.get("sentences", []) if s.get("raw")]
            if not refs:
                continue
            rel = Path(img.get("filepath", "")) / img["filename"]
            obj = {
                "id": f"img-{img.get('imgid', n)}",
                "image": str(rel),
                "references": refs,
                "region": {"kind": "image"},
            }
            f.write(json.dumps(obj, separators=(",", ":")) + "\n")
            n += 1
    return n


def convert_entity_regions(src: Union[str, Path], out: Union[str, Path]) -> int:
    """Entity-grounded controlled captions -> region-set task JSONL.

    Expects a JSON list of ``{"image", "caption", "boxes": [[x0, y0, x1,
    y1], ...]}`` (the grouped-per-caption form of the entity datasets).
    """
    with open(src, "r", encoding="utf-8") as f:
        entries = json.load(f)
    n = 0
    with open(out, "w", encoding="utf-8") as f:
        for entry in entries:
            boxes = [list(map(float, b)) for b in entry.get("boxes", [])]
            boxes = [b for b in boxes if b[0] < b[2] and b[1] < b[3]]
            if not boxes or not entry.get("caption"):
                continue
            obj = {
                "id": f"ent-{n}",
                "image": str(entry["image"]),
                "references": [str(entry["caption"])],
                "region": {"kind": "box_set", "boxes": boxes},
            }
            f.write(json.dumps(obj, separators=(",", ":")) + "\n")
            n += 1
    return n
