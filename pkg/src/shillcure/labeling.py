"""Cluster labeling against the subset decision line."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from shillcure.errors import ConsistencyError, DomainError
from shillcure.partitioning import Subset, SubsetStats

NORMAL, SUSPICIOUS = 0, 1


def decision_line(stats: SubsetStats) -> float:
    """Average pattern mean plus half the average pattern STD."""
    return stats.avg_means + stats.avg_stds / 2.0


def cluster_mean(vectors) -> float:
    """Grand mean over every member and every feature."""
    x = np.asarray(vectors, dtype=float)
    if x.size == 0:
        raise DomainError("cluster has no members")
    return float(x.mean())


def label_cluster(vectors, stats: SubsetStats) -> int:
    """1 (suspicious) when the cluster mean reaches the decision line, else 0."""
    return SUSPICIOUS if cluster_mean(vectors) >= decision_line(stats) else NORMAL


@dataclass
class LabeledRow:
    auction_id: str
    bidder_id: str
    features: tuple
    duration_days: float
    cluster_id: int
    label: int


@dataclass
class SubsetSummary:
    duration_days: float
    auctions: int
    instances: int
    clusters: int
    rp: int | None
    alpha: float | None
    normal: int
    suspicious: int
    threshold: float
    cluster_means: list = field(default_factory=list)
    cluster_labels: list = field(default_factory=list)
    cluster_sizes: list = field(default_factory=list)


@dataclass
class LabeledDataset:
    rows: list
    summary: list  # SubsetSummary per subset, ascending duration

    def totals(self) -> tuple[int, int]:
        return sum(s.normal for s in self.summary), sum(s.suspicious for s in self.summary)


def label_dataset(subsets: dict, clusterings: dict, stats: dict, params: dict | None = None) -> LabeledDataset:
    """Label every instance of every subset.

    ``clusterings`` maps a subset key to one cluster id per instance (in
    subset order). ``stats`` must be the subset statistics computed before
    clustering; ``params`` optionally maps a subset key to ``(rp, alpha)``
    for the summary.
    """
    params = params or {}
    rows, summary = [], []
    for key, subset in subsets.items():
        if key not in clusterings or key not in stats:
            raise ConsistencyError(f"subset {subset.label} has no clustering or stats")
        ids = np.asarray(clusterings[key])
        if len(ids) != len(subset.instances) or (ids < 0).any():
            raise ConsistencyError(f"subset {subset.label}: instance without cluster assignment")
        x = subset.matrix()
        st = stats[key]
        threshold = decision_line(st)
        cluster_ids = sorted(set(ids.tolist()))
        labels, means, sizes = {}, [], []
        for c in cluster_ids:
            members = x[ids == c]
            means.append(cluster_mean(members))
            labels[c] = SUSPICIOUS if means[-1] >= threshold else NORMAL
            sizes.append(len(members))
        for inst, c in zip(subset.instances, ids.tolist()):
            rows.append(LabeledRow(inst.auction_id, inst.bidder_id, inst.vector, subset.duration_days, c, labels[c]))
        n_susp = int(sum(labels[c] for c in ids.tolist()))
        rp, alpha = params.get(key, (None, None))
        summary.append(SubsetSummary(
            duration_days=subset.duration_days,
            auctions=len({inst.auction_id for inst in subset.instances}),
            instances=len(subset.instances),
            clusters=len(cluster_ids),
            rp=rp,
            alpha=alpha,
            normal=len(subset.instances) - n_susp,
            suspicious=n_susp,
            threshold=threshold,
            cluster_means=means,
            cluster_labels=[labels[c] for c in cluster_ids],
            cluster_sizes=sizes,
        ))
    return LabeledDataset(rows, summary)
