"""Mean-opinion-score ingestion and aggregation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from ..errors import BadHeader, BadRecord, DuplicateRating, Empty, ScoreOutOfRange

HEADER = ["rater_id", "image_id", "method_id", "score"]
SCORE_MIN, SCORE_MAX = 1, 5


@dataclass(frozen=True)
class MosRecord:
    rater_id: str
    image_id: str
    method_id: str
    score: int


def ingest_mos(data) -> list[MosRecord]:
    """Parse and validate a ratings CSV; rejects duplicate
    (rater, image, method) rows and out-of-range scores."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.reader(io.StringIO(data))
    try:
        header = next(reader)
    except StopIteration:
        raise BadHeader("empty file") from None
    if [h.strip() for h in header] != HEADER:
        raise BadHeader(f"expected header {','.join(HEADER)}, got {','.join(header)}")
    records: list[MosRecord] = []
    seen: set = set()
    for row_no, row in enumerate(reader, start=2):
        if not row or row == [""]:
            continue
        if len(row) != 4:
            raise BadRecord(f"row {row_no}: expected 4 fields, got {len(row)}")
        rater, image, method, score_text = (field.strip() for field in row)
        if not rater or not image or not method:
            raise BadRecord(f"row {row_no}: empty id field")
        try:
            score = int(score_text)
        except ValueError:
            raise ScoreOutOfRange(f"row {row_no}: score {score_text!r} is not an integer") from None
        if not SCORE_MIN <= score <= SCORE_MAX:
            raise ScoreOutOfRange(f"row {row_no}: score {score} outside [{SCORE_MIN}, {SCORE_MAX}]")
        key = (rater, image, method)
        if key in seen:
            raise DuplicateRating(f"row {row_no}: duplicate rating {key}")
        seen.add(key)
        records.append(MosRecord(rater, image, method, score))
    return records


def export_mos_csv(records) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for r in records:
        writer.writerow([r.rater_id, r.image_id, r.method_id, r.score])
    return out.getvalue()


@dataclass
class MosAggregate:
    per_image_method: dict   # (image_id, method_id) -> (mean, n)
    per_method: dict         # method_id -> dict(mean, sd, n, q1, median, q3)
    method_scores: dict      # method_id -> list[int], pooled for testing


def aggregate_mos(records) -> MosAggregate:
    """Arithmetic means per (image, method) and per method; the pooled
    per-method samples are kept for significance testing."""
    records = list(records)
    if not records:
        raise Empty("no MOS records")
    by_pair: dict = {}
    by_method: dict = {}
    for r in records:
        by_pair.setdefault((r.image_id, r.method_id), []).append(r.score)
        by_method.setdefault(r.method_id, []).append(r.score)
    per_image_method = {
        key: (float(np.mean(scores)), len(scores))
        for key, scores in sorted(by_pair.items())
    }
    per_method = {}
    method_scores = {}
    for method, scores in sorted(by_method.items()):
        arr = np.asarray(scores, dtype=np.float64)
        q1, median, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
        per_method[method] = {
            "mean": float(arr.mean()),
            "sd": float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
            "n": int(arr.size),
            "q1": float(q1),
            "median": float(median),
            "q3": float(q3),
        }
        method_scores[method] = list(scores)
    return MosAggregate(per_image_method, per_method, method_scores)
