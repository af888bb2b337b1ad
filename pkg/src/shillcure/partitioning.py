"""Split instances by auction duration and summarise each split."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from shillcure.errors import ConsistencyError, DomainError
from shillcure.features import FEATURES, SBInstance, instance_matrix
from shillcure.ingestion import SECONDS_PER_DAY, CleanDataset

STANDARD_DURATIONS = (1, 3, 5, 7, 10)


@dataclass
class Subset:
    duration_days: float
    instances: list = field(default_factory=list)

    @property
    def label(self) -> str:
        return duration_label(self.duration_days)

    def matrix(self) -> np.ndarray:
        return instance_matrix(self.instances)


@dataclass(frozen=True)
class SubsetStats:
    per_feature_mean: tuple
    per_feature_std: tuple
    avg_means: float
    avg_stds: float

    @classmethod
    def from_rows(cls, means, stds) -> "SubsetStats":
        """Stats from per-pattern mean and STD rows (e.g. a published table)."""
        means = tuple(float(m) for m in means)
        stds = tuple(float(s) for s in stds)
        if len(means) != len(FEATURES) or len(stds) != len(FEATURES):
            raise DomainError(f"need {len(FEATURES)} means and {len(FEATURES)} STDs")
        if any(s < 0 for s in stds):
            raise DomainError("standard deviations must be non-negative")
        return cls(means, stds, float(np.mean(means)), float(np.mean(stds)))


def duration_days(seconds: float) -> float:
    days = seconds / SECONDS_PER_DAY
    return int(days) if float(days).is_integer() else days


def duration_label(days: float) -> str:
    return f"{days:g}d"


def partition_by_duration(instances: list[SBInstance], dataset: CleanDataset) -> dict:
    """Group instances by their auction's duration in days, ascending.

    Durations outside the usual 1/3/5/7/10 days get their own subset.
    """
    groups: dict = {}
    for inst in instances:
        summary = dataset.auction_index.get(inst.auction_id)
        if summary is None:
            raise ConsistencyError(f"instance refers to unknown auction {inst.auction_id!r}")
        days = duration_days(summary.duration)
        groups.setdefault(days, Subset(days)).instances.append(inst)
    return {d: groups[d] for d in sorted(groups)}


def partition_by_days(instances: list[SBInstance], days: list) -> dict:
    """Same grouping when each instance's duration (in days) is already known."""
    if len(days) != len(instances):
        raise ConsistencyError("one duration per instance is required")
    groups: dict = {}
    for inst, d in zip(instances, days):
        d = float(d)
        d = int(d) if d.is_integer() else d
        groups.setdefault(d, Subset(d)).instances.append(inst)
    return {d: groups[d] for d in sorted(groups)}


def compute_stats(subset: Subset) -> SubsetStats:
    """Per-pattern mean and population STD, plus their row averages."""
    if not subset.instances:
        raise DomainError("cannot summarise an empty subset")
    x = subset.matrix()
    return SubsetStats.from_rows(x.mean(axis=0), x.std(axis=0))
