"""Pipeline configuration: a nested YAML file, overridden by CLI flags.

Example::

    input: bids.csv
    input_kind: bids          # bids | instances
    output_dir: out
    seed: 7
    jobs: 1
    k_sweep:
      k_min: 2
      k_max: 20
    cure:
      reps: [5, 10]
      alphas: [0.1, 0.05, 0.01, 0.001]
      min_cluster_size: 5
      sample_fraction: 1.0
      outlier_elimination: false
      outlier_min_size: 3
    report:
      figures: true
    synthetic:               # used by ``synth``
      n_auctions: 200
      shill_fraction: 0.2
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from shillcure.cure import CureParams
from shillcure.errors import DomainError, ShillCureError
from shillcure.sweep import DEFAULT_ALPHAS, DEFAULT_MIN_SIZE, DEFAULT_RPS, SweepGrid

INPUT_KINDS = ("bids", "instances")


class ConfigError(ShillCureError):
    """Configuration is missing, unreadable or invalid."""


@dataclass
class PipelineConfig:
    input: Path | None = None
    input_kind: str = "bids"
    output_dir: Path = Path("out")
    seed: int | None = None
    k_min: int = 2
    k_max: int = 20
    reps: tuple = DEFAULT_RPS
    alphas: tuple = DEFAULT_ALPHAS
    min_cluster_size: int = DEFAULT_MIN_SIZE
    sample_fraction: float = 1.0
    outlier_elimination: bool = False
    outlier_min_size: int = 3
    figures: bool = True
    jobs: int = 1
    synthetic: dict = field(default_factory=dict)

    def validate(self, need_seed: bool = True) -> "PipelineConfig":
        if need_seed and self.seed is None:
            raise ConfigError("a seed is required (--seed or 'seed:' in the config file)")
        if self.input_kind not in INPUT_KINDS:
            raise ConfigError(f"input_kind must be one of {INPUT_KINDS}")
        if not 2 <= self.k_min <= self.k_max:
            raise ConfigError("k range must satisfy 2 <= k_min <= k_max")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        try:
            self.grid()
            self.cure_base()
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def grid(self) -> SweepGrid:
        return SweepGrid(tuple(int(r) for r in self.reps), tuple(float(a) for a in self.alphas))

    def cure_base(self, target_k: int = 1) -> CureParams:
        return CureParams(
            target_k=target_k,
            sample_fraction=self.sample_fraction,
            outlier_elimination=self.outlier_elimination,
            outlier_min_size=self.outlier_min_size,
        )


_SECTIONS = {
    "k_sweep": ("k_min", "k_max"),
    "cure": ("reps", "alphas", "min_cluster_size", "sample_fraction", "outlier_elimination", "outlier_min_size"),
    "report": ("figures",),
}


def load_config(path: str | Path | None) -> PipelineConfig:
    """Read a YAML config file; ``None`` gives the defaults."""
    cfg = PipelineConfig()
    if path is None:
        return cfg
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    flat = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: '{key}' must be a mapping")
            for sub, v in value.items():
                if sub not in _SECTIONS[key]:
                    raise ConfigError(f"{path}: unknown option {key}.{sub}")
                flat[sub] = v
        else:
            flat[key] = value
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(flat) - known
    if unknown:
        raise ConfigError(f"{path}: unknown option(s) {', '.join(sorted(unknown))}")
    return apply_overrides(cfg, flat)


def apply_overrides(cfg: PipelineConfig, values: dict) -> PipelineConfig:
    """Set every non-None entry of ``values`` on ``cfg``, coercing types."""
    for key, value in values.items():
        if value is None:
            continue
        try:
            if key in ("input", "output_dir"):
                value = Path(value)
            elif key in ("reps", "alphas"):
                if isinstance(value, str):
                    value = [v for v in value.split(",") if v.strip()]
                value = tuple(int(v) if key == "reps" else float(v) for v in value)
            elif key in ("seed", "k_min", "k_max", "min_cluster_size", "outlier_min_size", "jobs"):
                value = int(value)
            elif key == "sample_fraction":
                value = float(value)
            elif key in ("outlier_elimination", "figures"):
                value = bool(value)
            elif key == "synthetic":
                value = dict(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
        setattr(cfg, key, value)
    return cfg
