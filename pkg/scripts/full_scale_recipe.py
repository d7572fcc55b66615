#!/usr/bin/env python3
"""Offline full-scale reproduction recipe. NOT run in CI.

Target: COCO image-captioning CIDEr near 69.2 with uniform aggregation and
near 88.5 with attention weighting (tolerance +-5), using:

  * a real DINOv2-based language-aligned backbone (patch 14, input 518,
    exposing patch embeddings, last-layer attention, and a text encoder),
  * a memory bank of the ~500k COCO train captions (tau = 0.01),
  * the reference decoder schedule: 4 layers, 4 heads, AdamW with weight
    decay 0.01, 10 epochs, lr 1e-5, batch 64, memory-mode training.

Prerequisites (downloaded outside this sandbox):
  - COCO train captions as one caption per line: coco_train_captions.txt
  - Karpathy split file: dataset_coco.json + the COCO test images
  - a backbone checkpoint importable through `--backbone-module`, a python
    module exposing `load_adapter() -> BackboneAdapter`

Usage:
  python3 scripts/full_scale_recipe.py \
      --backbone-module my_backbones.talk2dino \
      --captions coco_train_captions.txt \
      --karpathy dataset_coco.json --images /data/coco \
      --workdir runs/full-scale
"""
from __future__ import annotations

import argparse
import importlib
import sys
from pathlib import Path

TARGETS = {"uniform": 69.2, "attention": 88.5}
TOLERANCE = 5.0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--backbone-module", required=True,
                        help="module exposing load_adapter() for the real backbone")
    parser.add_argument("--captions", required=True, help="COCO train captions, one per line")
    parser.add_argument("--karpathy", required=True, help="Karpathy dataset_coco.json")
    parser.add_argument("--images", required=True, help="COCO images root")
    parser.add_argument("--workdir", default="runs/full-scale")
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--lr", type=float, default=1e-5)
    parser.add_argument("--batch", type=int, default=64)
    args = parser.parse_args()

    from pioner.decoder import CaptionPipeline, TrainSpec, save_checkpoint, train
    from pioner.gap import build_memory
    from pioner.harness import convert_karpathy_split, pipeline_runner, run_task

    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)

    try:
        adapter = importlib.import_module(args.backbone_module).load_adapter()
    except Exception as e:
        print(f"cannot load real backbone from {args.backbone_module!r}: {e}", file=sys.stderr)
        print("this recipe needs a downloaded DINOv2-based language-aligned model;", file=sys.stderr)
        print("wrap it in a BackboneAdapter and expose load_adapter().", file=sys.stderr)
        return 1

    captions = [ln.strip() for ln in Path(args.captions).read_text().splitlines() if ln.strip()]
    print(f"building memory bank over {len(captions)} captions (tau=0.01)")
    bank = build_memory(captions, adapter, tau=0.01, out_path=workdir / "coco.pionmem")

    print(f"training decoder: {args.epochs} epochs, lr {args.lr}, batch {args.batch}")
    spec = TrainSpec(
        corpus=tuple(captions),
        epochs=args.epochs,
        lr=args.lr,
        weight_decay=0.01,
        batch_size=args.batch,
        mitigation="memory",
        seed=0,
        deterministic=False,  # full-scale run prefers speed over bit-reproducibility
        d_model=768,
        n_layer=4,
        n_head=4,
    )
    ckpt = train(spec, adapter)
    save_checkpoint(ckpt, workdir / "decoder.pt")

    dataset = workdir / "coco_image_test.jsonl"
    n = convert_karpathy_split(args.karpathy, dataset, split="test")
    print(f"evaluating on {n} Karpathy test images")

    images_root = Path(args.images)
    results = {}
    for mode, target in TARGETS.items():
        pipeline = CaptionPipeline(adapter, ckpt, bank=bank, aggregation=mode)
        encoder, captioner = pipeline_runner(pipeline)

        def rooted_encoder(image_ref, size_hint, _enc=encoder):
            return _enc(str(images_root / image_ref), size_hint)

        report = run_task(
            "image", dataset, rooted_encoder, captioner,
            report_path=workdir / f"report-{mode}.json",
            dump_path=workdir / f"dump-{mode}.jsonl",
        )
        cider = report.metrics["cider_d"]
        results[mode] = cider
        status = "OK" if abs(cider - target) <= TOLERANCE else "OUT OF BAND"
        print(f"{mode:>10}: CIDEr {cider:.1f} (target {target} +- {TOLERANCE}) {status}")

    return 0 if all(abs(results[m] - t) <= TOLERANCE for m, t in TARGETS.items()) else 2


if __name__ == "__main__":
    sys.exit(main())
