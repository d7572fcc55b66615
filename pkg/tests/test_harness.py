import json

import numpy as np
import pytest

from pioner.errors import DatasetError
from pioner.harness import (
    convert_entity_regions,
    convert_karpathy_split,
    convert_vg_regions,
    load_dataset,
    run_task,
)
from pioner.types import Caption

from .conftest import CountingAdapter, save_png


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row) + "\n")
    return str(path)


def dense_rows(image="img0.png", n=3):
    return [
        {
            "id": f"s{i}",
            "image": image,
            "references": [f"reference text number {i}"],
            "region": {"kind": "box", "box": [i * 5, i * 5, i * 5 + 20, i * 5 + 20]},
        }
        for i in range(n)
    ]


def echo_runner():
    """Encoder/captioner pair: stub grid, caption = first reference."""

    def encoder(image_ref, size_hint):
        return object(), size_hint

    def captioner(sample, grid, size):
        return Caption(text=sample.references[0])

    return encoder, captioner


def test_loader_three_samples(tmp_path):
    path = write_jsonl(tmp_path / "d.jsonl", dense_rows())
    reader = load_dataset("dense", path)
    samples = list(reader)
    assert len(samples) == 3
    assert reader.skipped == []
    assert samples[0].region.kind == "box"


def test_loader_skips_degenerate_box(tmp_path):
    rows = dense_rows()
    rows[1]["region"]["box"] = [10, 30, 20, 10]  # y0 > y1
    path = write_jsonl(tmp_path / "d.jsonl", rows)
    reader = load_dataset("dense", path)
    samples = list(reader)
    assert len(samples) == 2
    assert len(reader.skipped) == 1
    assert reader.skipped[0].record == "s1"


def test_loader_kind_task_mismatch(tmp_path):
    rows = dense_rows()
    rows[0]["region"] = {"kind": "trace", "points": [[1, 1]]}
    path = write_jsonl(tmp_path / "d.jsonl", rows)
    reader = load_dataset("dense", path)
    assert len(list(reader)) == 2
    assert "does not match task" in reader.skipped[0].reason


def test_loader_missing_file(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset("dense", tmp_path / "nope.jsonl")


def test_loader_unknown_task(tmp_path):
    path = write_jsonl(tmp_path / "d.jsonl", dense_rows())
    with pytest.raises(DatasetError):
        load_dataset("panoptic", path)


def test_run_task_single_encode_for_multi_region_image(tmp_path, rgb_image):
    img_path = save_png(rgb_image, tmp_path / "img0.png")
    rows = dense_rows(image=str(img_path), n=3)
    dataset = write_jsonl(tmp_path / "d.jsonl", rows)
    adapter = CountingAdapter(embedding_dim=8, patch_size=14, input_resolution=56)

    def encoder(image_ref, size_hint):
        grid = adapter.encode_image(image_ref)
        return grid, size_hint

    def captioner(sample, grid, size):
        return Caption(text=sample.references[0])

    report = run_task("dense", dataset, encoder, captioner)
    assert adapter.encode_calls == 1
    assert report.n_samples == 3


def test_run_task_echo_scores_ten(tmp_path):
    dataset = write_jsonl(tmp_path / "d.jsonl", dense_rows())
    encoder, captioner = echo_runner()
    report = run_task("dense", dataset, encoder, captioner)
    assert report.metrics["cider_d"] == pytest.approx(10.0, abs=1e-6)
    assert report.metrics["bleu4"] == pytest.approx(1.0, abs=1e-9)
    assert report.metrics["rouge_l"] == pytest.approx(1.0, abs=1e-9)
    assert report.metrics["dense_map"] == pytest.approx(1.0)


def test_run_task_empty_dataset(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    encoder, captioner = echo_runner()
    with pytest.raises(DatasetError):
        run_task("dense", str(path), encoder, captioner)


def test_run_task_failures_become_empty_captions(tmp_path):
    dataset = write_jsonl(tmp_path / "d.jsonl", dense_rows())
    encoder, _ = echo_runner()

    def flaky(sample, grid, size):
        if sample.id == "s1":
            raise RuntimeError("decode exploded")
        return Caption(text=sample.references[0])

    report = run_task("dense", dataset, encoder, flaky)
    assert report.failures == 1
    assert report.n_samples == 3
    assert report.per_sample[1]["candidate"] == ""


def test_run_task_deterministic_report(tmp_path):
    dataset = write_jsonl(tmp_path / "d.jsonl", dense_rows())
    encoder, captioner = echo_runner()
    a = run_task("dense", dataset, encoder, captioner, config_snapshot={"seed": 1})
    b = run_task("dense", dataset, encoder, captioner, config_snapshot={"seed": 1})
    assert a.to_json() == b.to_json()


def test_run_task_dump_rows_match(tmp_path):
    rows = dense_rows()
    rows.append({"id": "bad", "image": "", "references": ["x"], "region": {"kind": "box", "box": [0, 0, 1, 1]}})
    dataset = write_jsonl(tmp_path / "d.jsonl", rows)
    dump = tmp_path / "dump.jsonl"
    encoder, captioner = echo_runner()
    report = run_task("dense", dataset, encoder, captioner, dump_path=dump)
    assert report.skipped == 1
    lines = [ln for ln in dump.read_text().splitlines() if ln.strip()]
    assert len(lines) == report.n_samples


def test_run_task_parallel_matches_serial(tmp_path, rgb_image):
    img_a = save_png(rgb_image, tmp_path / "a.png")
    img_b = save_png(rgb_image[::-1].copy(), tmp_path / "b.png")
    rows = dense_rows(image=str(img_a), n=3) + [
        {**row, "id": row["id"] + "b", "image": str(img_b)} for row in dense_rows(n=3)
    ]
    dataset = write_jsonl(tmp_path / "d.jsonl", rows)
    encoder, captioner = echo_runner()
    serial = run_task("dense", dataset, encoder, captioner, jobs=1)
    parallel = run_task("dense", dataset, encoder, captioner, jobs=4)
    assert serial.metrics == parallel.metrics
    assert [r["id"] for r in serial.per_sample] == [r["id"] for r in parallel.per_sample]


def test_report_table_renders(tmp_path):
    dataset = write_jsonl(tmp_path / "d.jsonl", dense_rows())
    encoder, captioner = echo_runner()
    report = run_task("dense", dataset, encoder, captioner, report_path=tmp_path / "r.json")
    table = report.table()
    assert "cider_d" in table
    body = json.loads((tmp_path / "r.json").read_text())
    assert body["n_samples"] == 3


# --- converters ---------------------------------------------------------------

def test_convert_vg_regions(tmp_path):
    src = tmp_path / "vg.json"
    src.write_text(
        json.dumps(
            [
                {
                    "id": 7,
                    "regions": [
                        {"image_id": 7, "x": 1, "y": 2, "width": 10, "height": 5, "phrase": "a dog"},
                        {"image_id": 7, "x": 0, "y": 0, "width": 0, "height": 5, "phrase": "bad"},
                    ],
                }
            ]
        )
    )
    out = tmp_path / "dense.jsonl"
    assert convert_vg_regions(src, out) == 1
    reader = load_dataset("dense", out)
    samples = list(reader)
    assert samples[0].references == ("a dog",)
    assert samples[0].region.box == (1.0, 2.0, 11.0, 7.0)


def test_convert_karpathy(tmp_path):
    src = tmp_path / "k.json"
    src.write_text(
        json.dumps(
            {
                "images": [
                    {"filename": "x.jpg", "split": "test", "imgid": 1,
                     "sentences": [{"raw": "a cat"}, {"raw": "the cat"}]},
                    {"filename": "y.jpg", "split": "train", "imgid": 2,
                     "sentences": [{"raw": "skip me"}]},
                ]
            }
        )
    )
    out = tmp_path / "img.jsonl"
    assert convert_karpathy_split(src, out, split="test") == 1
    samples = list(load_dataset("image", out))
    assert samples[0].references == ("a cat", "the cat")


def test_convert_entities(tmp_path):
    src = tmp_path / "e.json"
    src.write_text(
        json.dumps(
            [
                {"image": "z.jpg", "caption": "a man and a dog", "boxes": [[0, 0, 5, 5], [3, 3, 9, 9]]},
                {"image": "w.jpg", "caption": "", "boxes": [[0, 0, 5, 5]]},
            ]
        )
    )
    out = tmp_path / "rs.jsonl"
    assert convert_entity_regions(src, out) == 1
    samples = list(load_dataset("region-set", out))
    assert len(samples[0].region.boxes) == 2
