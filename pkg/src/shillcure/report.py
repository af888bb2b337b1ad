"""Render stage artifacts as report tables and figures under ``<out>/reports``."""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from pathlib import Path

from shillcure import artifacts as art
from shillcure.errors import ConsistencyError
from shillcure.features import FEATURES
from shillcure.labeling import decision_line
from shillcure.partitioning import duration_label

log = logging.getLogger(__name__)

REPORT_DIR = "reports"
PATTERN_STATS = "pattern_stats.csv"
PARAM_SWEEP = "param_sweep.csv"
LABELING_SUMMARY = "labeling_summary.csv"
SILHOUETTE_CURVES = "silhouette_curves.csv"


def _subset_files(out: Path, prefix: str) -> dict:
    found = {}
    for path in out.glob(f"{prefix}_*d.csv"):
        found[art.parse_days(path.stem[len(prefix) + 1:-1])] = path
    return {d: found[d] for d in sorted(found)}


def _write(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def report(out_dir, figures: bool = True) -> dict:
    """Write every report whose inputs exist; returns ``{name: path}``.

    Missing inputs are skipped with a notice naming the stage that produces
    them. Raises :class:`ConsistencyError` when nothing can be reported or
    when the summary counts do not add up.
    """
    out = Path(out_dir)
    rep = out / REPORT_DIR
    fig_dir = rep / "figures"
    produced: dict = {}
    notices = []

    stats = None
    if (out / art.STATS).exists():
        rep.mkdir(parents=True, exist_ok=True)
        stats = art.read_stats(out / art.STATS)
        art.write_stats(rep / PATTERN_STATS, stats, digits=4)
        with (rep / PATTERN_STATS).open("a", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerow(
                ["decision_line"] + [f"{decision_line(s):.4f}" for s in stats.values()]
            )
        produced[PATTERN_STATS] = rep / PATTERN_STATS
    else:
        notices.append("pattern statistics skipped: run the 'partition' stage")

    curves = _subset_files(out, "optk")
    if curves:
        rep.mkdir(parents=True, exist_ok=True)
        best = art.read_optk(out / art.OPTK) if (out / art.OPTK).exists() else {}
        rows = []
        for days, path in curves.items():
            scores = art.read_curve(path)
            b = best.get(days)
            rows.extend([duration_label(days), k, f"{s:.6f}", int(k == b)] for k, s in scores.items())
            if figures and scores and b in scores:
                fig_dir.mkdir(parents=True, exist_ok=True)
                from shillcure.plotting import silhouette_curve
                silhouette_curve(fig_dir / f"silhouette_{duration_label(days)}.png", scores, b,
                                 title=f"{duration_label(days)} subset")
        _write(rep / SILHOUETTE_CURVES, ["partition", "k", "score", "best"], rows)
        produced[SILHOUETTE_CURVES] = rep / SILHOUETTE_CURVES
    else:
        notices.append("silhouette curves skipped: run the 'optk' stage")

    grids = _subset_files(out, "sweep")
    if grids:
        rep.mkdir(parents=True, exist_ok=True)
        parsed = {d: art.read_sweep_grid(p) for d, p in grids.items()}
        width = max(
            (sum(1 for c in r if c.startswith("size_") and r[c]) for rows in parsed.values() for r in rows),
            default=0,
        )
        rows = []
        for days, grid_rows in parsed.items():
            for r in grid_rows:
                sizes = [r.get(f"size_{i}", "") or "" for i in range(1, width + 1)]
                rows.append([duration_label(days), r["rp"], r["alpha"]] + sizes + [r["score"], r["chosen"]])
        _write(rep / PARAM_SWEEP, ["partition", "rp", "alpha"] + [f"size_{i}" for i in range(1, width + 1)]
               + ["score", "chosen"], rows)
        produced[PARAM_SWEEP] = rep / PARAM_SWEEP
    else:
        notices.append("parameter sweep skipped: run the 'sweep' stage")

    if (out / art.SUMMARY).exists():
        rep.mkdir(parents=True, exist_ok=True)
        summary = art.read_summary(out / art.SUMMARY)
        art.check_summary_identity(summary)
        names = [r["partition"] for r in summary]
        body = [[field] + [r[field] for r in summary] for field in art.SUMMARY_COLUMNS[1:]]
        _write(rep / LABELING_SUMMARY, ["partition"] + names, body)
        produced[LABELING_SUMMARY] = rep / LABELING_SUMMARY
        if figures and stats is not None and (out / art.LABELED).exists():
            _decision_figures(out, stats, fig_dir)
    else:
        notices.append("labeling summary skipped: run the 'label' stage")

    if figures and stats:
        fig_dir.mkdir(parents=True, exist_ok=True)
        from shillcure.plotting import pattern_profile
        pattern_profile(fig_dir / "pattern_profile.png", stats)

    for note in notices:
        log.warning(note)
    if not produced:
        raise ConsistencyError("nothing to report: run the 'partition' stage first")
    return produced


def _decision_figures(out: Path, stats: dict, fig_dir: Path) -> None:
    from shillcure.plotting import decision_chart

    sums = defaultdict(lambda: defaultdict(lambda: [0.0, 0]))
    for r in art.read_rows(out / art.LABELED, art.LABELED_COLUMNS):
        days = art.parse_days(r["duration_days"])
        acc = sums[days][int(r["cluster_id"])]
        acc[0] += sum(float(r[f]) for f in FEATURES)
        acc[1] += 1
    fig_dir.mkdir(parents=True, exist_ok=True)
    for days in sorted(sums):
        if days not in stats:
            continue
        ids = sorted(sums[days])
        means = [sums[days][c][0] / (len(FEATURES) * sums[days][c][1]) for c in ids]
        sizes = [sums[days][c][1] for c in ids]
        decision_chart(fig_dir / f"decision_{duration_label(days)}.png", means, sizes,
                       decision_line(stats[days]), title=f"{duration_label(days)} subset")
