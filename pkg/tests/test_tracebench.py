import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pioner.errors import LLMError, ValidationError
from pioner.harness import load_dataset
from pioner.tracebench import (
    RecordedLLMClient,
    TokenBucket,
    build_benchmark,
    build_prompt,
    load_narratives,
    parse_narrative,
    parse_rewrite,
    rewrite_caption,
    split_by_sentence,
    trim_trace,
    write_benchmark,
)
from pioner.tracebench.narratives import TracePoint

DOG_SENTENCE = "In this picture I can observe a dog running on the land."
DOG_CAPTION = "A dog runs on the land."
BLUR_SENTENCE = "The background is blurred."

FIGURE_FIXTURES = {
    DOG_SENTENCE: "{" + DOG_CAPTION + "}",
    "I can observe water and grass on the ground.": "{Water and grass on the ground.}",
    BLUR_SENTENCE: "{<INVALID>}",
}


def narrative(image_id="img1", n_sentences=3, points_per=10):
    utts = []
    traces = [[]]
    t = 0.0
    texts = [DOG_SENTENCE, "I can observe water and grass on the ground.", BLUR_SENTENCE]
    for k in range(n_sentences):
        start = t
        for j in range(points_per):
            traces[0].append({"x": 10.0 * k + j, "y": 5.0 * k + j, "t": t})
            t += 0.1
        utts.append({"utterance": texts[k % 3], "start_time": start, "end_time": t - 0.05})
        t += 0.5  # inter-sentence gap: points there belong to no sentence
    return {"image_id": image_id, "timed_caption": utts, "traces": traces}


def test_split_one_sentence_keeps_all_points():
    rec = parse_narrative(narrative(n_sentences=1))
    pieces = split_by_sentence(rec)
    assert len(pieces) == 1
    assert len(pieces[0][1]) == 10


def test_split_two_sentences_disjoint_windows():
    rec = parse_narrative(narrative(n_sentences=2))
    pieces = split_by_sentence(rec)
    assert len(pieces) == 2
    ids = [[p.t for p in sub] for _, sub in pieces]
    assert set(ids[0]).isdisjoint(ids[1])
    assert all(len(sub) == 10 for _, sub in pieces)


def test_point_between_sentences_belongs_to_neither():
    obj = {
        "image_id": "x",
        "timed_caption": [
            {"utterance": "First one.", "start_time": 0.0, "end_time": 1.0},
            {"utterance": "Second one.", "start_time": 2.0, "end_time": 3.0},
        ],
        "traces": [[{"x": 1, "y": 1, "t": 0.5}, {"x": 2, "y": 2, "t": 1.5}, {"x": 3, "y": 3, "t": 2.5}]],
    }
    pieces = split_by_sentence(parse_narrative(obj))
    assert [len(sub) for _, sub in pieces] == [1, 1]


def test_split_preserves_order():
    rec = parse_narrative(narrative(n_sentences=2, points_per=7))
    for _, sub in split_by_sentence(rec):
        ts = [p.t for p in sub]
        assert ts == sorted(ts)


def test_multi_segment_sentences_group_until_terminal():
    obj = {
        "image_id": "x",
        "timed_caption": [
            {"utterance": "In this picture", "start_time": 0.0, "end_time": 0.4},
            {"utterance": "there is a dog.", "start_time": 0.4, "end_time": 1.0},
            {"utterance": "Water on the ground.", "start_time": 1.2, "end_time": 2.0},
        ],
        "traces": [[{"x": 0, "y": 0, "t": 0.2}, {"x": 1, "y": 1, "t": 0.7}, {"x": 2, "y": 2, "t": 1.5}]],
    }
    pieces = split_by_sentence(parse_narrative(obj))
    assert pieces[0][0] == "In this picture there is a dog."
    assert len(pieces[0][1]) == 2
    assert len(pieces[1][1]) == 1


def test_trim_100_points():
    pts = [TracePoint(float(i), 0.0, float(i)) for i in range(100)]
    kept = trim_trace(pts)
    assert len(kept) == 70
    assert kept[0].x == 15 and kept[-1].x == 84


def test_trim_single_point():
    pts = [TracePoint(1.0, 2.0, 0.0)]
    assert trim_trace(pts) == pts


def test_trim_six_points_keeps_all():
    pts = [TracePoint(float(i), 0.0, float(i)) for i in range(6)]
    assert len(trim_trace(pts)) == 6


@given(st.integers(1, 200))
def test_trim_rule_arithmetic(L):
    pts = [TracePoint(float(i), 0.0, float(i)) for i in range(L)]
    kept = trim_trace(pts)
    k = (15 * L) // 100
    assert len(kept) == L - 2 * k
    assert kept == pts[k : L - k]
    # contiguity: trimmed points are a slice of the input
    xs = [p.x for p in kept]
    assert xs == list(range(int(xs[0]), int(xs[0]) + len(xs)))


def test_decreasing_timestamps_rejected():
    obj = narrative()
    obj["traces"][0][3]["t"] = -1.0
    with pytest.raises(ValidationError):
        parse_narrative(obj)


# --- rewriting ------------------------------------------------------------

def test_prompt_substitution():
    prompt = build_prompt(DOG_SENTENCE)
    assert prompt.endswith(DOG_SENTENCE + "\n")
    assert "<INPUT CAPTION>" not in prompt
    assert "Wrap each in `{}` and add nothing else" in prompt


def test_figure_examples():
    llm = RecordedLLMClient(FIGURE_FIXTURES)
    assert rewrite_caption(DOG_SENTENCE, llm) == DOG_CAPTION
    assert rewrite_caption(BLUR_SENTENCE, llm) is None


def test_parse_braced_echo():
    llm = RecordedLLMClient({}, default="{X}")
    assert rewrite_caption("anything at all", llm) == "X"


def test_parse_takes_first_braced_span():
    assert parse_rewrite("noise {A cat.} trailing {B dog.}") == "A cat."


def test_unparseable_output_retries_then_fails():
    llm = RecordedLLMClient({}, default="no braces here")
    with pytest.raises(LLMError):
        rewrite_caption("a sentence", llm, retries=2)
    assert llm.calls == 3


# --- benchmark assembly -----------------------------------------------------

def test_build_benchmark_counts(tmp_path):
    llm = RecordedLLMClient(FIGURE_FIXTURES)
    records = [parse_narrative(narrative("imgA")), parse_narrative(narrative("imgB"))]
    out = tmp_path / "trace.jsonl"
    samples, stats = build_benchmark(records, llm, out_path=out)
    assert stats.records == 2
    assert stats.sentences == 6
    assert stats.valid == 4  # dog + water per record; blur INVALID
    assert stats.invalid == 2
    assert stats.discarded_images == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 4


def test_all_invalid_image_discarded(tmp_path):
    llm = RecordedLLMClient({}, default="{<INVALID>}")
    records = [parse_narrative(narrative("imgA", n_sentences=2))]
    samples, stats = build_benchmark(records, llm)
    assert stats.valid == 0
    assert stats.discarded_images == 1


def test_llm_failure_marks_discarded(tmp_path):
    llm = RecordedLLMClient({DOG_SENTENCE: "{" + DOG_CAPTION + "}"}, default="garbage")
    records = [parse_narrative(narrative("imgA"))]
    samples, stats = build_benchmark(records, llm, retries=0)
    assert stats.llm_failures == 2
    assert stats.valid == 1
    statuses = {s.status for s in samples}
    assert "discarded_error" in statuses


def test_benchmark_deterministic(tmp_path):
    llm = RecordedLLMClient(FIGURE_FIXTURES)
    records = [parse_narrative(narrative("imgA"))]
    out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    build_benchmark(records, llm, out_path=out1)
    build_benchmark([parse_narrative(narrative("imgA"))], llm, out_path=out2)
    assert out1.read_bytes() == out2.read_bytes()


def test_benchmark_roundtrips_through_harness(tmp_path):
    llm = RecordedLLMClient(FIGURE_FIXTURES)
    records = [parse_narrative(narrative("imgA"))]
    out = tmp_path / "trace.jsonl"
    build_benchmark(records, llm, out_path=out)
    reader = load_dataset("trace", out)
    loaded = list(reader)
    assert reader.skipped == []
    assert len(loaded) == 2
    assert loaded[0].region.kind == "trace"
    assert loaded[0].references == (DOG_CAPTION,)


def test_load_narratives_jsonl(tmp_path):
    path = tmp_path / "n.jsonl"
    with open(path, "w") as f:
        f.write(json.dumps(narrative("imgA")) + "\n")
        f.write(json.dumps(narrative("imgB")) + "\n")
    records = list(load_narratives(path))
    assert [r.image_id for r in records] == ["imgA", "imgB"]


def test_token_bucket_limits_rate():
    clock_value = [0.0]

    bucket = TokenBucket(rate=10.0, burst=1, clock=lambda: clock_value[0])
    assert bucket.acquire() == 0.0  # burst token
    # next acquire needs 0.1 s of refill; advance the clock past it
    clock_value[0] = 0.2
    assert bucket.acquire() == 0.0
