"""On-disk stage artifacts. Every file is plain CSV with a fixed layout."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from shillcure.errors import ConsistencyError, ParseError, SchemaError
from shillcure.features import FEATURES
from shillcure.ingestion import format_number
from shillcure.partitioning import SubsetStats, duration_label

CLEAN_BIDS = "bids_clean.csv"
INSTANCES = "instances.csv"
PARTITIONED = "instances_partitioned.csv"
STATS = "stats.csv"
OPTK = "optk.csv"
SWEEP_CHOICE = "sweep.csv"
LABELED = "labeled.csv"
SUMMARY = "summary.csv"
PARTIAL_MARKER = ".partial"

LABELED_COLUMNS = ("auction_id", "bidder_id") + FEATURES + ("duration_days", "cluster_id", "label")
SUMMARY_COLUMNS = ("partition", "auctions", "instances", "clusters", "rp", "alpha", "normal", "suspicious")


def optk_curve_name(days) -> str:
    return f"optk_{duration_label(days)}.csv"


def sweep_grid_name(days) -> str:
    return f"sweep_{duration_label(days)}.csv"


def clusters_name(days) -> str:
    return f"clusters_{duration_label(days)}.csv"


def cluster_summary_name(days) -> str:
    return f"cluster_summary_{duration_label(days)}.csv"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def read_rows(path: Path, required=()) -> list[dict]:
    """Rows of a CSV as dicts, skipping ``#`` comment lines."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: missing header")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: header lacks column(s) {', '.join(missing)}")
        return list(reader)


def parse_days(text: str):
    try:
        d = float(text)
    except ValueError:
        raise ParseError(0, f"bad duration {text!r}") from None
    return int(d) if d.is_integer() else d


def write_stats(path: Path, stats: dict, digits: int | None = None) -> None:
    """Pattern means and STDs per subset; one column per subset."""
    fmt = (lambda v: f"{v:.{digits}f}") if digits is not None else format_number
    keys = list(stats)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["pattern"] + [duration_label(k) for k in keys])
        for i, name in enumerate(FEATURES):
            w.writerow([f"mean_{name}"] + [fmt(stats[k].per_feature_mean[i]) for k in keys])
        w.writerow(["avg_means"] + [fmt(stats[k].avg_means) for k in keys])
        for i, name in enumerate(FEATURES):
            w.writerow([f"std_{name}"] + [fmt(stats[k].per_feature_std[i]) for k in keys])
        w.writerow(["avg_stds"] + [fmt(stats[k].avg_stds) for k in keys])


def read_stats(path: Path) -> dict:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "pattern":
        raise SchemaError(f"{path}: not a stats file")
    keys = [parse_days(h.rstrip("d")) for h in rows[0][1:]]
    table = {r[0]: [float(v) for v in r[1:]] for r in rows[1:]}
    try:
        out = {}
        for j, k in enumerate(keys):
            means = [table[f"mean_{f}"][j] for f in FEATURES]
            stds = [table[f"std_{f}"][j] for f in FEATURES]
            out[k] = SubsetStats.from_rows(means, stds)
    except KeyError as exc:
        raise SchemaError(f"{path}: missing row {exc}") from None
    return out


def write_optk(path: Path, results: dict) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["duration_days", "best_k", "best_score"])
        for days, res in results.items():
            w.writerow([format_number(days), res.best_k, format_number(res.best_score)])


def read_optk(path: Path) -> dict:
    return {
        parse_days(r["duration_days"]): int(r["best_k"])
        for r in read_rows(path, ("duration_days", "best_k"))
    }


def write_curve(path: Path, scores: dict, best_k: int) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        fh.write(f"# best_k={best_k}\n")
        w.writerow(["k", "score"])
        for k, s in scores.items():
            w.writerow([k, format_number(s)])


def read_curve(path: Path) -> dict:
    return {int(r["k"]): float(r["score"]) for r in read_rows(path, ("k", "score"))}


def write_sweep_grid(path: Path, result, note: str) -> None:
    width = max((len(r.sizes) for r in result.rows), default=0)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {note}\n")
        w = _writer(fh)
        w.writerow(["rp", "alpha"] + [f"size_{i}" for i in range(1, width + 1)] + ["score", "chosen"])
        for r in result.rows:
            sizes = [str(s) for s in r.sizes] + [""] * (width - len(r.sizes))
            score = "" if r.error else format_number(r.score)
            w.writerow([r.rp, format_number(r.alpha)] + sizes + [score, int(r.chosen)])


def read_sweep_grid(path: Path) -> list[dict]:
    return read_rows(path, ("rp", "alpha", "score", "chosen"))


def write_sweep_choice(path: Path, choices: dict) -> None:
    """``choices`` maps duration to (rp, alpha, cell seed)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["duration_days", "rp", "alpha", "seed"])
        for days, (rp, alpha, seed) in choices.items():
            w.writerow([format_number(days), rp, format_number(alpha), seed])


def read_sweep_choice(path: Path) -> dict:
    return {
        parse_days(r["duration_days"]): (int(r["rp"]), float(r["alpha"]), int(r["seed"]))
        for r in read_rows(path, ("duration_days", "rp", "alpha", "seed"))
    }


def write_clusters(path: Path, instances, cluster_ids) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["auction_id", "bidder_id", "cluster_id"])
        for inst, c in zip(instances, cluster_ids):
            w.writerow([inst.auction_id, inst.bidder_id, int(c)])


def read_clusters(path: Path, instances) -> np.ndarray:
    """Cluster id per instance, aligned to ``instances``."""
    rows = read_rows(path, ("auction_id", "bidder_id", "cluster_id"))
    lookup = {(r["auction_id"], r["bidder_id"]): int(r["cluster_id"]) for r in rows}
    try:
        return np.array([lookup[(i.auction_id, i.bidder_id)] for i in instances], dtype=int)
    except KeyError as exc:
        raise ConsistencyError(f"{path}: no cluster for instance {exc}") from None


def write_cluster_summary(path: Path, clusters) -> None:
    dim = len(clusters[0].centroid) if clusters else len(FEATURES)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["cluster_id", "size"] + [f"centroid_{i}" for i in range(dim)])
        for i, c in enumerate(clusters):
            w.writerow([i, c.size] + [f"{v:.6f}" for v in c.centroid])


def write_labeled(path: Path, labeled) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(LABELED_COLUMNS)
        for r in labeled.rows:
            w.writerow(
                [r.auction_id, r.bidder_id]
                + [f"{v:.6f}" for v in r.features]
                + [format_number(r.duration_days), r.cluster_id, r.label]
            )


def summary_table(labeled) -> list[list[str]]:
    """Per-subset rows in the summary layout, plus a total row."""
    rows = []
    for s in labeled.summary:
        rows.append([
            duration_label(s.duration_days), s.auctions, s.instances, s.clusters,
            "NA" if s.rp is None else s.rp,
            "NA" if s.alpha is None else format_number(s.alpha),
            s.normal, s.suspicious,
        ])
    tot = [sum(r[i] for r in rows) for i in (1, 2, 3, 6, 7)]
    rows.append(["Total", tot[0], tot[1], tot[2], "NA", "NA", tot[3], tot[4]])
    return rows


def write_summary(path: Path, labeled) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        w.writerows(summary_table(labeled))


def read_summary(path: Path) -> list[dict]:
    return read_rows(path, SUMMARY_COLUMNS)


def check_summary_identity(rows: list[dict]) -> None:
    """Normal + suspicious must equal instances on every row, totals included."""
    body = [r for r in rows if r["partition"] != "Total"]
    for r in rows:
        n, s, inst = int(r["normal"]), int(r["suspicious"]), int(r["instances"])
        if n + s != inst:
            raise ConsistencyError(f"partition {r['partition']}: {n} + {s} != {inst}")
    total = [r for r in rows if r["partition"] == "Total"]
    if total:
        t = total[0]
        for col in ("auctions", "instances", "clusters", "normal", "suspicious"):
            if sum(int(r[col]) for r in body) != int(t[col]):
                raise ConsistencyError(f"total {col} does not match the partition rows")
