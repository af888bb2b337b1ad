"""Silhouette scores and silhouette-driven choice of the cluster count."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from shillcure.errors import DomainError
from shillcure.kmeans import kmeans

log = logging.getLogger(__name__)

DEFAULT_K_MIN = 2
DEFAULT_K_MAX = 20
_BLOCK = 512


@dataclass
class KSweepResult:
    scores: dict  # k -> mean silhouette
    best_k: int
    best_score: float


def silhouette_samples(points, labels) -> np.ndarray:
    """Per-point silhouette values.

    Singleton clusters score 0, as does any point with a = b = 0.
    Distances are formed in row blocks so memory stays O(block * n).
    """
    pts = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    _, codes = np.unique(labels, return_inverse=True)
    codes = codes.ravel()
    k = int(codes.max()) + 1 if len(codes) else 0
    if k < 2:
        raise DomainError("silhouette needs at least two non-empty clusters")
    sizes = np.bincount(codes, minlength=k).astype(float)
    onehot = np.zeros((len(pts), k))
    onehot[np.arange(len(pts)), codes] = 1.0

    out = np.zeros(len(pts))
    for start in range(0, len(pts), _BLOCK):
        stop = min(start + _BLOCK, len(pts))
        sums = cdist(pts[start:stop], pts) @ onehot
        own = codes[start:stop]
        rows = np.arange(stop - start)
        own_size = sizes[own]
        with np.errstate(invalid="ignore", divide="ignore"):
            a = sums[rows, own] / (own_size - 1)
            means = sums / sizes
        means[rows, own] = np.inf
        b = means.min(axis=1)
        denom = np.maximum(a, b)
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(denom > 0, (b - a) / denom, 0.0)
        s[own_size == 1] = 0.0
        out[start:stop] = s
    return out


def silhouette_score(points, labels) -> float:
    """Mean silhouette over all points."""
    return float(silhouette_samples(points, labels).mean())


def optimal_k(points, k_min: int = DEFAULT_K_MIN, k_max: int = DEFAULT_K_MAX,
              seed: int = 0, **kmeans_options) -> KSweepResult:
    """Run k-means for each k in ``[k_min, k_max]`` and keep the best silhouette.

    ``k_max`` is lowered to the number of distinct points when it exceeds
    it. Ties go to the smallest k.
    """
    pts = np.asarray(points, dtype=float)
    if k_min < 2 or k_max < k_min:
        raise DomainError("need 2 <= k_min <= k_max")
    n_distinct = len(np.unique(pts, axis=0)) if len(pts) else 0
    if n_distinct < k_min:
        raise DomainError(f"{n_distinct} distinct point(s) cannot form {k_min} clusters")
    if k_max > n_distinct:
        log.info("k_max lowered from %d to %d distinct points", k_max, n_distinct)
        k_max = n_distinct

    scores = {}
    for k in range(k_min, k_max + 1):
        result = kmeans(pts, k, seed=seed, **kmeans_options)
        scores[k] = silhouette_score(pts, result.labels)
    best_k = max(scores, key=lambda k: (scores[k], -k))
    return KSweepResult(scores=scores, best_k=best_k, best_score=scores[best_k])
