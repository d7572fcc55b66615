"""Independent brute-force oracles used to cross-check the package.

Everything here is deliberately written from the definitions, with plain
loops and its own geometry, and must stay independent of the code paths
it checks.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from typing import List, Sequence, Tuple

import numpy as np


# ---------------------------------------------------------------------------
# region aggregation from first principles
# ---------------------------------------------------------------------------

def cell_box_in_original(r, c, patch, src_h, src_w, orig_w, orig_h):
    """Patch cell bounds mapped back into original-image coordinates."""
    x0 = c * patch * orig_w / src_w
    x1 = (c + 1) * patch * orig_w / src_w
    y0 = r * patch * orig_h / src_h
    y1 = (r + 1) * patch * orig_h / src_h
    return x0, y0, x1, y1


def box_cells(box, rows, cols, patch, src_h, src_w, orig_w, orig_h) -> List[int]:
    """Cells with strictly positive overlap, tested in original-image space."""
    bx0, by0, bx1, by1 = box
    out = []
    for r in range(rows):
        for c in range(cols):
            cx0, cy0, cx1, cy1 = cell_box_in_original(
                r, c, patch, src_h, src_w, orig_w, orig_h
            )
            if min(bx1, cx1) - max(bx0, cx0) > 0 and min(by1, cy1) - max(by0, cy0) > 0:
                out.append(r * cols + c)
    return out


def point_cell(x, y, rows, cols, patch, src_h, src_w, orig_w, orig_h) -> int:
    x = min(max(x, 0.0), orig_w)
    y = min(max(y, 0.0), orig_h)
    c = min(cols - 1, int((x * src_w / orig_w) // patch))
    r = min(rows - 1, int((y * src_h / orig_h) // patch))
    return r * cols + c


def brute_force_embedding(spec, grid, image_size=None) -> np.ndarray:
    """v_S computed naively from the task definitions."""
    rows, cols, patch = grid.rows, grid.cols, grid.patch_size
    src_h, src_w = grid.source_resolution
    if image_size is None:
        orig_w, orig_h = float(src_w), float(src_h)
    else:
        orig_w, orig_h = float(image_size[0]), float(image_size[1])
    vectors = [np.asarray(grid.flat()[i], dtype=np.float64) for i in range(rows * cols)]

    if spec.kind == "image":
        total = np.zeros(grid.dim)
        for v in vectors:
            total = total + v
        return total / len(vectors)
    if spec.kind == "patch":
        return vectors[spec.row * cols + spec.col].copy()
    if spec.kind == "box":
        cells = box_cells(spec.box, rows, cols, patch, src_h, src_w, orig_w, orig_h)
        total = np.zeros(grid.dim)
        for i in cells:
            total = total + vectors[i]
        return total / len(cells)
    if spec.kind == "box_set":
        total = np.zeros(grid.dim)
        denom = 0
        for box in spec.boxes:
            cells = box_cells(box, rows, cols, patch, src_h, src_w, orig_w, orig_h)
            denom += len(cells)
            for i in cells:
                total = total + vectors[i]
        return total / denom
    if spec.kind == "trace":
        total = np.zeros(grid.dim)
        for x, y in spec.points:
            total = total + vectors[
                point_cell(x, y, rows, cols, patch, src_h, src_w, orig_w, orig_h)
            ]
        return total / len(spec.points)
    raise AssertionError(f"oracle got unknown kind {spec.kind}")


# ---------------------------------------------------------------------------
# caption metric oracles
# ---------------------------------------------------------------------------

def oracle_tokenize(text: str) -> List[str]:
    return re.sub(r"[^\w\s]", " ", text.lower()).split()


def oracle_ngrams(tokens: Sequence[str], n: int) -> List[Tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def oracle_cider_d(records) -> Tuple[float, List[float]]:
    """CIDEr-D via dense TF-IDF vectors over an explicit global vocabulary."""
    n_orders, sigma = 4, 6.0
    tokenized = [
        (oracle_tokenize(r.candidate), [oracle_tokenize(t) for t in r.references])
        for r in records
    ]
    vocab = [set() for _ in range(n_orders)]
    for _, refs in tokenized:
        for ref in refs:
            for n in range(1, n_orders + 1):
                vocab[n - 1].update(oracle_ngrams(ref, n))
    for cand, _ in tokenized:
        for n in range(1, n_orders + 1):
            vocab[n - 1].update(oracle_ngrams(cand, n))
    index = [{g: i for i, g in enumerate(sorted(v))} for v in vocab]

    # document frequency: number of records with the ngram in any reference
    df = [np.zeros(len(ix)) for ix in index]
    for _, refs in tokenized:
        seen = [set() for _ in range(n_orders)]
        for ref in refs:
            for n in range(1, n_orders + 1):
                seen[n - 1].update(oracle_ngrams(ref, n))
        for n in range(n_orders):
            for g in seen[n]:
                df[n][index[n][g]] += 1
    log_n = math.log(len(records))

    def tfidf(tokens):
        vecs = []
        for n in range(1, n_orders + 1):
            vec = np.zeros(len(index[n - 1]))
            for g, c in Counter(oracle_ngrams(tokens, n)).items():
                vec[index[n - 1][g]] = c * (log_n - math.log(max(1.0, df[n - 1][index[n - 1][g]])))
            vecs.append(vec)
        return vecs

    per_record = []
    for cand, refs in tokenized:
        cv = tfidf(cand)
        sims = []
        for ref in refs:
            rv = tfidf(ref)
            acc = 0.0
            for n in range(n_orders):
                num = float(np.minimum(cv[n], rv[n]) @ rv[n])
                denom = float(np.linalg.norm(cv[n]) * np.linalg.norm(rv[n]))
                acc += (num / denom if denom > 0 else 0.0)
            penalty = math.exp(-((len(cand) - len(ref)) ** 2) / (2 * sigma**2))
            sims.append(acc / n_orders * penalty)
        per_record.append(10.0 * sum(sims) / len(sims))
    return sum(per_record) / len(per_record), per_record


def oracle_bleu4(records) -> float:
    clipped = np.zeros(4)
    totals = np.zeros(4)
    c_len, r_len = 0, 0
    for rec in records:
        cand = oracle_tokenize(rec.candidate)
        refs = [oracle_tokenize(t) for t in rec.references]
        c_len += len(cand)
        best = None
        for ref in refs:
            key = (abs(len(ref) - len(cand)), len(ref))
            if best is None or key < best:
                best = key
        r_len += best[1]
        for n in range(1, 5):
            cgrams = Counter(oracle_ngrams(cand, n))
            totals[n - 1] += sum(cgrams.values())
            for g, c in cgrams.items():
                allowed = max(
                    (Counter(oracle_ngrams(ref, n))[g] for ref in refs), default=0
                )
                clipped[n - 1] += min(c, allowed)
    if c_len == 0 or (totals == 0).any() or (clipped == 0).any():
        return 0.0
    precision = float(np.exp(np.mean(np.log(clipped / totals))))
    bp = 1.0 if c_len > r_len else math.exp(1 - r_len / c_len)
    return bp * precision


def oracle_lcs(a: Sequence[str], b: Sequence[str]) -> int:
    """LCS length via full quadratic table (plain construction)."""
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return table[len(a)][len(b)]


def oracle_rouge_l(records) -> float:
    beta_sq = 1.2
    scores = []
    for rec in records:
        cand = oracle_tokenize(rec.candidate)
        precs, recs = [0.0], [0.0]
        for t in rec.references:
            ref = oracle_tokenize(t)
            lcs = oracle_lcs(cand, ref)
            if cand:
                precs.append(lcs / len(cand))
            if ref:
                recs.append(lcs / len(ref))
        p, r = max(precs), max(recs)
        scores.append(((1 + beta_sq) * p * r) / (r + beta_sq * p) if p and r else 0.0)
    return sum(scores) / len(scores)
