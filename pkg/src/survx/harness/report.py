"""Aggregated metric-vs-MOS comparison report.

The report is a plain dict with deterministic field ordering so its JSON
serialization is byte-stable; a validator checks the schema invariants
(p-values in [0,1], correlations in [-1,1], consistent ids).
"""

from __future__ import annotations

import csv
import io
import json
import math
from itertools import combinations

from ..errors import IdMismatch
from .mos import MosAggregate
from .stats import correlate, mann_whitney_u, welch_ttest

DEFAULT_ALPHA = 0.001

# metrics where a smaller value means better quality
LOWER_IS_BETTER = frozenset({"mse", "fid"})


def _finite_or_none(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _rank_methods(means: dict, lower_better: bool) -> list:
    """Best-first method ranking; lexicographic tiebreak keeps it stable."""
    return [m for m, _ in sorted(means.items(),
                                 key=lambda kv: (kv[1] if lower_better else -kv[1], kv[0]))]


def build_report(mos: MosAggregate, metric_tables: dict,
                 latency: dict | None = None,
                 alpha: float = DEFAULT_ALPHA) -> dict:
    """Assemble the evaluation report.

    metric_tables: metric name -> {(image_id, method_id): value}.
    Every (image, method) pair scored by a metric must have MOS coverage.
    """
    mos_methods = sorted(mos.per_method)
    for metric, table in sorted(metric_tables.items()):
        for (image_id, method_id) in table:
            if (image_id, method_id) not in mos.per_image_method:
                raise IdMismatch(
                    f"{metric}: pair ({image_id}, {method_id}) has no MOS ratings")

    pairwise = []
    for a, b in combinations(mos_methods, 2):
        sa = mos.method_scores[a]
        sb = mos.method_scores[b]
        w = welch_ttest(sa, sb)
        mw = mann_whitney_u(sa, sb)
        mean_a = mos.per_method[a]["mean"]
        mean_b = mos.per_method[b]["mean"]
        direction = f"{a}>{b}" if mean_a > mean_b else (f"{b}>{a}" if mean_b > mean_a else "tie")
        pairwise.append({
            "method_a": a,
            "method_b": b,
            "welch": {"t": w.t, "df": w.df, "p": w.p, "reject": w.p < alpha},
            "mann_whitney": {"u": mw.u, "p": mw.p, "reject": mw.p < alpha},
            "direction": direction,
            "one_sided_p": w.p / 2.0,
        })

    mos_method_means = {m: mos.per_method[m]["mean"] for m in mos_methods}
    mos_ranking = _rank_methods(mos_method_means, lower_better=False)

    correlations = {}
    metric_rankings = {}
    for metric, table in sorted(metric_tables.items()):
        xs, ys = [], []
        for (image_id, method_id), value in sorted(table.items()):
            xs.append(value)
            ys.append(mos.per_image_method[(image_id, method_id)][0])
        try:
            pearson, spearman = correlate(xs, ys)
            correlations[metric] = {
                "pearson": _finite_or_none(pearson),
                "spearman": _finite_or_none(spearman),
                "n": len(xs),
            }
        except Exception:
            correlations[metric] = {"pearson": None, "spearman": None, "n": len(xs)}
        by_method: dict = {}
        for (image_id, method_id), value in table.items():
            by_method.setdefault(method_id, []).append(value)
        means = {m: sum(v) / len(v) for m, v in by_method.items()}
        ranking = _rank_methods(means, metric in LOWER_IS_BETTER)
        metric_rankings[metric] = {
            "ranking": ranking,
            "method_means": {m: _finite_or_none(v) for m, v in sorted(means.items())},
            "matches_mos": ranking == [m for m in mos_ranking if m in ranking],
        }

    return {
        "alpha": alpha,
        "methods": {m: dict(mos.per_method[m]) for m in mos_methods},
        "mos_ranking": mos_ranking,
        "pairwise": pairwise,
        "correlations": correlations,
        "metric_rankings": metric_rankings,
        "latency": {
            name: {"median_s": row["median_s"], "iqr_s": row["iqr_s"]}
            for name, row in sorted((latency or {}).items())
        },
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def report_from_json(text: str) -> dict:
    return json.loads(text)


def report_to_csv(report: dict) -> str:
    """Flat section,key,value rows for spreadsheet use."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["section", "key", "value"])
    w.writerow(["config", "alpha", report["alpha"]])
    for m, stats in report["methods"].items():
        for k in ("mean", "sd", "n", "q1", "median", "q3"):
            w.writerow(["method", f"{m}.{k}", stats[k]])
    w.writerow(["mos", "ranking", ">".join(report["mos_ranking"])])
    for row in report["pairwise"]:
        tag = f"{row['method_a']}_vs_{row['method_b']}"
        w.writerow(["welch", f"{tag}.t", row["welch"]["t"]])
        w.writerow(["welch", f"{tag}.p", row["welch"]["p"]])
        w.writerow(["welch", f"{tag}.reject", row["welch"]["reject"]])
        w.writerow(["mann_whitney", f"{tag}.u", row["mann_whitney"]["u"]])
        w.writerow(["mann_whitney", f"{tag}.p", row["mann_whitney"]["p"]])
        w.writerow(["mann_whitney", f"{tag}.reject", row["mann_whitney"]["reject"]])
    for metric, row in report["correlations"].items():
        w.writerow(["correlation", f"{metric}.pearson", row["pearson"]])
        w.writerow(["correlation", f"{metric}.spearman", row["spearman"]])
    for metric, row in report["metric_rankings"].items():
        w.writerow(["ranking", f"{metric}", ">".join(row["ranking"])])
        w.writerow(["ranking", f"{metric}.matches_mos", row["matches_mos"]])
    for name, row in report["latency"].items():
        w.writerow(["latency", f"{name}.median_s", row["median_s"]])
        w.writerow(["latency", f"{name}.iqr_s", row["iqr_s"]])
    return out.getvalue()


def method_distributions_csv(report: dict) -> str:
    """Per-method distribution summary suitable for external plotting."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["method_id", "mean", "sd", "n", "q1", "median", "q3"])
    for m, stats in report["methods"].items():
        w.writerow([m, stats["mean"], stats["sd"], stats["n"],
                    stats["q1"], stats["median"], stats["q3"]])
    return out.getvalue()


def validate_report(report: dict) -> list:
    """Schema check; returns a list of problems (empty means valid)."""
    problems = []

    def need(cond, msg):
        if not cond:
            problems.append(msg)

    for key in ("alpha", "methods", "mos_ranking", "pairwise",
                "correlations", "metric_rankings", "latency"):
        need(key in report, f"missing top-level key {key!r}")
    if problems:
        return problems
    need(0.0 < report["alpha"] < 1.0, "alpha outside (0, 1)")
    for m, stats in report["methods"].items():
        for k in ("mean", "sd", "n", "q1", "median", "q3"):
            need(k in stats, f"method {m} missing {k}")
        if "n" in stats:
            need(stats["n"] >= 1, f"method {m} has n < 1")
    need(sorted(report["mos_ranking"]) == sorted(report["methods"]),
         "mos_ranking is not a permutation of the method set")
    for row in report["pairwise"]:
        for test in ("welch", "mann_whitney"):
            p = row[test]["p"]
            need(0.0 <= p <= 1.0, f"{test} p={p} outside [0,1]")
            need(row[test]["reject"] == (p < report["alpha"]),
                 f"{test} reject flag inconsistent with alpha")
    for metric, row in report["correlations"].items():
        for k in ("pearson", "spearman"):
            v = row[k]
            if v is not None:
                need(-1.0 <= v <= 1.0, f"{metric} {k}={v} outside [-1,1]")
    for metric, row in report["metric_rankings"].items():
        need(set(row["ranking"]) <= set(report["methods"]),
             f"{metric} ranking mentions unknown methods")
    return problems
