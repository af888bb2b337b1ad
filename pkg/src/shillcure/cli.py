"""Command-line entry point.

Every verb works on one output directory. ``run`` chains all stages;
the single-stage verbs read what earlier stages left there.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 stage failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from shillcure import __version__
from shillcure import pipeline as pl
from shillcure.config import ConfigError, apply_overrides, load_config
from shillcure.errors import DataError, DomainError, ShillCureError
from shillcure.features import read_instances_csv
from shillcure.ingestion import write_bids_csv
from shillcure.partitioning import partition_by_days

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_STAGE = 0, 2, 3, 4

log = logging.getLogger("shillcure")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", type=Path, help="input file for this stage")
    p.add_argument("--output-dir", type=Path, help="working directory for artifacts")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--config", type=Path, help="YAML config file; flags override it")
    p.add_argument("--k-min", type=int)
    p.add_argument("--k-max", type=int)
    p.add_argument("--reps", help="comma-separated representative counts, e.g. 5,10")
    p.add_argument("--alphas", help="comma-separated shrinking factors, e.g. 0.1,0.05")
    p.add_argument("--jobs", type=int, help="worker processes for per-subset work")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shillcure",
        description="Shill-bidding features, CURE clustering and cluster labeling.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("synth", help="generate a synthetic bid log")
    _common(p)
    p.add_argument("--auctions", type=int, help="number of auctions")
    p.add_argument("--shill-fraction", type=float, help="share of auctions with a shill")
    p.add_argument("--full-scale", action="store_true",
                   help="807 auctions / 6321 instances over five durations")

    p = sub.add_parser("ingest", help="parse and clean a bid-log CSV")
    _common(p)

    p = sub.add_parser("features", help="compute the eight metrics per (auction, bidder)")
    _common(p)

    p = sub.add_parser("partition", help="split instances by duration and compute stats")
    _common(p)
    p.add_argument("--bids", type=Path, help="bid log supplying auction durations")

    p = sub.add_parser("optk", help="choose the cluster count per subset by silhouette")
    _common(p)

    p = sub.add_parser("sweep", help="grid-search CURE's RP and alpha per subset")
    _common(p)

    p = sub.add_parser("cluster", help="run CURE per subset")
    _common(p)
    p.add_argument("--k", type=int, help="cluster count for every subset")
    p.add_argument("--alpha", type=float, help="shrinking factor override")
    p.add_argument("--rp", type=int, help="representative count override")

    p = sub.add_parser("label", help="label clusters against the decision line")
    _common(p)

    p = sub.add_parser("run", help="run every stage end to end")
    _common(p)
    p.add_argument("--input-kind", choices=("bids", "instances"))
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("report", help="render report tables and figures from artifacts")
    _common(p)
    p.add_argument("--no-figures", action="store_true")
    return parser


def _config(args):
    cfg = load_config(args.config)
    overrides = {
        "input": args.input,
        "output_dir": args.output_dir,
        "seed": args.seed,
        "k_min": args.k_min,
        "k_max": args.k_max,
        "reps": args.reps,
        "alphas": args.alphas,
        "jobs": args.jobs,
        "input_kind": getattr(args, "input_kind", None),
    }
    if getattr(args, "no_figures", False):
        overrides["figures"] = False
    return apply_overrides(cfg, overrides)


def _subsets(cfg):
    """Subsets from ``--input`` (a partitioned instance file) or the output directory."""
    if cfg.input is None:
        return pl.load_subsets(cfg.output_dir)
    instances, extra = read_instances_csv(cfg.input)
    if "duration_days" not in extra:
        raise DataError(f"{cfg.input}: needs a duration_days column; run 'partition' first")
    return partition_by_days(instances, extra["duration_days"])


def _dispatch(args) -> None:
    from shillcure.synthetic import SyntheticConfig, generate_synthetic, full_scale_config

    cfg = _config(args)
    out = cfg.output_dir
    verb = args.verb

    if verb == "synth":
        cfg.validate()
        if args.full_scale:
            gen = full_scale_config()
            if cfg.synthetic:
                gen = SyntheticConfig.from_mapping({**gen.__dict__, **cfg.synthetic})
        else:
            gen = SyntheticConfig.from_mapping(cfg.synthetic)
        extra = {}
        if args.auctions is not None:
            extra["n_auctions"] = args.auctions
        if args.shill_fraction is not None:
            extra["shill_fraction"] = args.shill_fraction
        if extra:
            gen = SyntheticConfig.from_mapping({**gen.__dict__, **extra})
        dataset = generate_synthetic(gen, cfg.seed)
        out.mkdir(parents=True, exist_ok=True)
        write_bids_csv(out / "bids.csv", dataset.records)
        print(f"wrote {len(dataset.records)} bids in {dataset.n_auctions} auctions to {out / 'bids.csv'}")
        return

    if verb == "ingest":
        if cfg.input is None:
            raise ConfigError("--input is required")
        ds = pl.stage_ingest(cfg.input, out)
        print(f"{len(ds.records)} clean records, {ds.n_auctions} auctions")
    elif verb == "features":
        inst = pl.stage_features(out, bids_path=cfg.input)
        print(f"{len(inst)} instances")
    elif verb == "partition":
        subsets, _ = pl.stage_partition(out, instances_path=cfg.input, bids_path=args.bids)
        for s in subsets.values():
            print(f"{s.label}\t{len(s.instances)}")
    elif verb == "optk":
        cfg.validate()
        for days, res in pl.stage_optk(out, cfg, _subsets(cfg)).items():
            print(f"{days}d\tk={res.best_k}\tsilhouette={res.best_score:.4f}")
    elif verb == "sweep":
        cfg.validate()
        for days, res in pl.stage_sweep(out, cfg, _subsets(cfg)).items():
            print(f"{days}d\trp={res.rp}\talpha={res.alpha:g}")
    elif verb == "cluster":
        cfg.validate()
        for days, (params, ids) in pl.stage_cluster(out, cfg, _subsets(cfg), k=args.k, rp=args.rp, alpha=args.alpha).items():
            print(f"{days}d\tk={params.target_k}\trp={params.num_reps}\talpha={params.alpha:g}")
    elif verb == "label":
        labeled = pl.stage_label(out, _subsets(cfg))
        normal, suspicious = labeled.totals()
        print(f"normal={normal}\tsuspicious={suspicious}")
    elif verb == "run":
        labeled = pl.run_all(cfg)
        normal, suspicious = labeled.totals()
        print(f"normal={normal}\tsuspicious={suspicious}\toutput={out}")
    elif verb == "report":
        from shillcure.report import report

        for name, path in report(out, figures=cfg.figures).items():
            print(f"{name}\t{path}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except pl.StageError as exc:
        code = EXIT_DATA if isinstance(exc.cause, DataError) else EXIT_STAGE
        print(f"error: {exc}", file=sys.stderr)
        return code
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ShillCureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
