"""Stage orchestration: ingest, features, partition, optk, sweep, cluster, label.

Each stage reads its inputs from, and writes its outputs to, one working
directory, so any stage can be rerun on its own from persisted artifacts.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from shillcure import artifacts as art
from shillcure.config import ConfigError, PipelineConfig
from shillcure.cure import CureParams, cure_cluster, labels_from_clusters
from shillcure.errors import ConsistencyError, DataError, ShillCureError
from shillcure.features import compute_instances, read_instances_csv, write_instances_csv
from shillcure.ingestion import SECONDS_PER_DAY, CleanDataset, format_number, parse_bids_csv, preprocess, write_bids_csv
from shillcure.labeling import LabeledDataset, label_dataset
from shillcure.partitioning import compute_stats, partition_by_days, partition_by_duration
from shillcure.silhouette import KSweepResult, optimal_k
from shillcure.sweep import CRITERION_NOTE, sweep_params

log = logging.getLogger(__name__)


class StageError(ShillCureError):
    """A pipeline stage failed; carries the stage, the subset and the cause."""

    def __init__(self, stage: str, cause: BaseException, subset=None):
        where = f" (subset {format_number(subset)}d)" if subset is not None else ""
        super().__init__(f"stage '{stage}'{where} failed: {cause}")
        self.stage = stage
        self.subset = subset
        self.cause = cause


def subset_seed(master: int, days) -> int:
    """Seed for one duration subset, independent of every other subset."""
    key = int(round(float(days) * SECONDS_PER_DAY))
    return int(np.random.SeedSequence([int(master), key]).generate_state(1)[0])


def _out(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- ingest / features / partition ------------------------------------------

def stage_ingest(input_path, out_dir) -> CleanDataset:
    dataset = preprocess(parse_bids_csv(input_path))
    write_bids_csv(_out(out_dir) / art.CLEAN_BIDS, dataset.records)
    log.info("ingest: %d records in %d auctions", len(dataset.records), dataset.n_auctions)
    return dataset


def _load_clean(path) -> CleanDataset:
    return preprocess(parse_bids_csv(path))


def stage_features(out_dir, bids_path=None, dataset: CleanDataset | None = None):
    out = _out(out_dir)
    if dataset is None:
        dataset = _load_clean(bids_path or out / art.CLEAN_BIDS)
    instances = compute_instances(dataset)
    write_instances_csv(out / art.INSTANCES, instances)
    log.info("features: %d instances", len(instances))
    return instances


def stage_partition(out_dir, instances_path=None, bids_path=None, dataset=None, instances=None):
    """Split instances by duration, write the partitioned file and subset stats.

    Durations come from a ``duration_days`` column of the instance file when
    present, otherwise from the bid log.
    """
    out = _out(out_dir)
    extra = {}
    if instances is None:
        instances, extra = read_instances_csv(instances_path or out / art.INSTANCES)
    if "duration_days" in extra:
        subsets = partition_by_days(instances, extra["duration_days"])
    else:
        if dataset is None:
            bids = Path(bids_path) if bids_path else out / art.CLEAN_BIDS
            if not bids.exists():
                raise DataError("instances carry no duration_days column and no bid log is available")
            dataset = _load_clean(bids)
        subsets = partition_by_duration(instances, dataset)
    stats = {d: compute_stats(s) for d, s in subsets.items()}
    ordered = [inst for s in subsets.values() for inst in s.instances]
    days = [format_number(d) for d, s in subsets.items() for _ in s.instances]
    write_instances_csv(out / art.PARTITIONED, ordered, {"duration_days": days})
    art.write_stats(out / art.STATS, stats)
    log.info("partition: %s", ", ".join(f"{s.label}={len(s.instances)}" for s in subsets.values()))
    return subsets, stats


def load_subsets(out_dir, only=None) -> dict:
    instances, extra = read_instances_csv(Path(out_dir) / art.PARTITIONED)
    if "duration_days" not in extra:
        raise DataError(f"{art.PARTITIONED} lacks the duration_days column")
    subsets = partition_by_days(instances, extra["duration_days"])
    if only is not None:
        subsets = {d: s for d, s in subsets.items() if d in set(only)}
    return subsets


# -- per-subset model selection and clustering --------------------------------

def choose_k(points, cfg: PipelineConfig, seed: int) -> KSweepResult:
    """Silhouette sweep; a subset with too few distinct points becomes one cluster."""
    n_distinct = len(np.unique(points, axis=0))
    if n_distinct < cfg.k_min:
        log.warning("%d distinct point(s): keeping a single cluster", n_distinct)
        return KSweepResult(scores={}, best_k=max(1, n_distinct), best_score=float("nan"))
    return optimal_k(points, cfg.k_min, cfg.k_max, seed=seed)


def stage_optk(out_dir, cfg: PipelineConfig, subsets=None) -> dict:
    out = _out(out_dir)
    subsets = subsets if subsets is not None else load_subsets(out)
    results = {}
    for days, subset in subsets.items():
        try:
            res = choose_k(subset.matrix(), cfg, subset_seed(cfg.seed, days))
        except ShillCureError as exc:
            raise StageError("optk", exc, days) from exc
        results[days] = res
        art.write_curve(out / art.optk_curve_name(days), res.scores, res.best_k)
        log.info("optk %s: k=%d (silhouette %.4f)", subset.label, res.best_k, res.best_score)
    art.write_optk(out / art.OPTK, results)
    return results


def _sweep_one(points, target_k, cfg: PipelineConfig, seed: int):
    return sweep_params(points, target_k, cfg.grid(), seed=seed, min_size=cfg.min_cluster_size,
                        base=cfg.cure_base(target_k))


def _write_sweep(out: Path, days, result) -> None:
    art.write_sweep_grid(out / art.sweep_grid_name(days), result,
                         CRITERION_NOTE.format(min_size=result.min_size))


def _cell_seed(cfg: PipelineConfig, seed: int, rp: int, alpha: float) -> int:
    cells = cfg.grid().cells()
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(len(cells))]
    return seeds[cells.index((rp, alpha))]


def stage_sweep(out_dir, cfg: PipelineConfig, subsets=None, ks=None) -> dict:
    out = _out(out_dir)
    subsets = subsets if subsets is not None else load_subsets(out)
    ks = ks if ks is not None else art.read_optk(out / art.OPTK)
    results, choices = {}, {}
    for days, subset in subsets.items():
        if days not in ks:
            raise StageError("sweep", ConsistencyError("no chosen k; run 'optk' first"), days)
        seed = subset_seed(cfg.seed, days)
        try:
            res = _sweep_one(subset.matrix(), ks[days], cfg, seed)
        except ShillCureError as exc:
            raise StageError("sweep", exc, days) from exc
        results[days] = res
        choices[days] = (res.rp, res.alpha, _cell_seed(cfg, seed, res.rp, res.alpha))
        _write_sweep(out, days, res)
    art.write_sweep_choice(out / art.SWEEP_CHOICE, choices)
    return results


def _write_clusters(out: Path, days, subset, clusters) -> np.ndarray:
    ids = labels_from_clusters(clusters, len(subset.instances))
    art.write_clusters(out / art.clusters_name(days), subset.instances, ids)
    art.write_cluster_summary(out / art.cluster_summary_name(days), clusters)
    return ids


def stage_cluster(out_dir, cfg: PipelineConfig, subsets=None, k=None, rp=None, alpha=None) -> dict:
    """CURE per subset with the swept parameters; ``k``/``rp``/``alpha`` override them."""
    out = _out(out_dir)
    subsets = subsets if subsets is not None else load_subsets(out)
    ks = art.read_optk(out / art.OPTK) if (out / art.OPTK).exists() else {}
    choices = art.read_sweep_choice(out / art.SWEEP_CHOICE) if (out / art.SWEEP_CHOICE).exists() else {}
    result = {}
    for days, subset in subsets.items():
        target = k if k is not None else ks.get(days)
        if target is None:
            raise StageError("cluster", ConsistencyError("no cluster count; run 'optk' or pass --k"), days)
        c_rp, c_alpha, c_seed = choices.get(days, (cfg.reps[0], cfg.alphas[0], subset_seed(cfg.seed, days)))
        base = cfg.cure_base(target)
        params = CureParams(
            num_reps=rp if rp is not None else c_rp,
            alpha=alpha if alpha is not None else c_alpha,
            target_k=target,
            sample_fraction=base.sample_fraction,
            outlier_elimination=base.outlier_elimination,
            outlier_min_size=base.outlier_min_size,
        )
        try:
            clusters = cure_cluster(subset.matrix(), params, seed=c_seed)
        except ShillCureError as exc:
            raise StageError("cluster", exc, days) from exc
        result[days] = (params, _write_clusters(out, days, subset, clusters))
    return result


def stage_label(out_dir, subsets=None, stats=None, clusterings=None, params=None) -> LabeledDataset:
    out = _out(out_dir)
    subsets = subsets if subsets is not None else load_subsets(out)
    if stats is None:
        stats = art.read_stats(out / art.STATS)
    if clusterings is None:
        clusterings = {}
        for days, subset in subsets.items():
            path = out / art.clusters_name(days)
            if not path.exists():
                raise StageError("label", ConsistencyError(f"{path.name} missing; run 'cluster' first"), days)
            clusterings[days] = art.read_clusters(path, subset.instances)
    if params is None and (out / art.SWEEP_CHOICE).exists():
        params = {d: (rp, a) for d, (rp, a, _) in art.read_sweep_choice(out / art.SWEEP_CHOICE).items()}
    try:
        labeled = label_dataset(subsets, clusterings, stats, params)
    except ShillCureError as exc:
        raise StageError("label", exc) from exc
    art.write_labeled(out / art.LABELED, labeled)
    art.write_summary(out / art.SUMMARY, labeled)
    normal, suspicious = labeled.totals()
    log.info("label: %d normal, %d suspicious", normal, suspicious)
    return labeled


# -- end to end ------------------------------------------------------------

def _subset_branch(points, cfg: PipelineConfig, seed: int):
    ksel = choose_k(points, cfg, seed)
    sweep = _sweep_one(points, ksel.best_k, cfg, seed)
    return ksel, sweep


def run_all(cfg: PipelineConfig) -> LabeledDataset:
    """Run every stage and write all artifacts and reports to ``cfg.output_dir``.

    A ``.partial`` marker sits in the output directory until the run
    completes; on failure it records the failing stage.
    """
    from shillcure.report import report

    cfg.validate()
    if cfg.input is None:
        raise ConfigError("an input file is required")
    out = _out(cfg.output_dir)
    marker = out / art.PARTIAL_MARKER
    marker.write_text("running\n", encoding="utf-8")
    stage = "ingest"
    started = time.perf_counter()
    try:
        if cfg.input_kind == "bids":
            dataset = stage_ingest(cfg.input, out)
            stage = "features"
            stage_features(out, dataset=dataset)
            stage = "partition"
            # later stages see the persisted feature values, as a single-stage rerun would
            subsets, stats = stage_partition(out, dataset=dataset)
        else:
            instances, extra = read_instances_csv(cfg.input)
            write_instances_csv(out / art.INSTANCES, instances, extra)
            stage = "partition"
            subsets, stats = stage_partition(out, instances_path=out / art.INSTANCES)

        stage = "optk"
        keys = list(subsets)
        seeds = [subset_seed(cfg.seed, d) for d in keys]
        mats = [subsets[d].matrix() for d in keys]
        if cfg.jobs > 1 and len(keys) > 1:
            with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
                futures = [pool.submit(_subset_branch, m, cfg, s) for m, s in zip(mats, seeds)]
                branches = []
                for d, f in zip(keys, futures):
                    try:
                        branches.append(f.result())
                    except ShillCureError as exc:
                        raise StageError("optk/sweep", exc, d) from exc
        else:
            branches = []
            for d, m, s in zip(keys, mats, seeds):
                try:
                    branches.append(_subset_branch(m, cfg, s))
                except ShillCureError as exc:
                    raise StageError("optk/sweep", exc, d) from exc

        ksel = {d: b[0] for d, b in zip(keys, branches)}
        for d, res in ksel.items():
            art.write_curve(out / art.optk_curve_name(d), res.scores, res.best_k)
        art.write_optk(out / art.OPTK, ksel)

        stage = "sweep"
        choices, clusterings, params = {}, {}, {}
        for d, seed, (res_k, sw) in zip(keys, seeds, branches):
            _write_sweep(out, d, sw)
            choices[d] = (sw.rp, sw.alpha, _cell_seed(cfg, seed, sw.rp, sw.alpha))
            params[d] = (sw.rp, sw.alpha)
        art.write_sweep_choice(out / art.SWEEP_CHOICE, choices)

        stage = "cluster"
        for d, (_, sw) in zip(keys, branches):
            clusterings[d] = _write_clusters(out, d, subsets[d], sw.clusters)

        stage = "label"
        labeled = stage_label(out, subsets, stats, clusterings, params)

        stage = "report"
        report(out, figures=cfg.figures)
    except StageError as exc:
        marker.write_text(f"stage: {exc.stage}\nsubset: {exc.subset}\ncause: {exc.cause}\n", encoding="utf-8")
        raise
    except (ShillCureError, OSError, ValueError) as exc:
        marker.write_text(f"stage: {stage}\nsubset: None\ncause: {exc}\n", encoding="utf-8")
        if isinstance(exc, DataError):
            raise
        raise StageError(stage, exc) from exc
    marker.unlink()
    log.info("run finished in %.1f s", time.perf_counter() - started)
    return labeled
