"""Lloyd's k-means with k-means++ seeding and best-of-n restarts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from shillcure.errors import DomainError

DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-6
DEFAULT_RESTARTS = 10


@dataclass
class Assignment:
    labels: np.ndarray
    centroids: np.ndarray
    sse: float
    iterations: int
    sse_history: list = field(default_factory=list)
    dead: tuple = ()  # centroid indices without members

    @property
    def k(self) -> int:
        return len(self.centroids)


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d = (
        np.einsum("ij,ij->i", points, points)[:, None]
        - 2.0 * points @ centroids.T
        + np.einsum("ij,ij->i", centroids, centroids)[None, :]
    )
    return np.maximum(d, 0.0)


def _plus_plus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    closest = _sq_dists(points, centers[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            # only coincident points left; take the first unused distinct one
            idx = int(np.argmax(closest > 0)) if (closest > 0).any() else int(rng.integers(n))
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[j] = points[idx]
        closest = np.minimum(closest, _sq_dists(points, centers[j:j + 1])[:, 0])
    return centers


def _lloyd(points, centers, max_iter, tol):
    k = len(centers)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        d = _sq_dists(points, centers)
        labels = d.argmin(axis=1)
        sse = float(d[np.arange(len(points)), labels].sum())
        if history:
            assert sse <= history[-1] * (1 + 1e-9) + 1e-12, "SSE increased between iterations"
        history.append(sse)

        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, points)
        new = centers.copy()
        used = counts > 0
        new[used] = sums[used] / counts[used, None]
        for j in np.flatnonzero(~used):
            # move an empty centroid onto the point farthest from the largest cluster
            big = int(counts.argmax())
            members = np.flatnonzero(labels == big)
            far = members[int(np.argmax(((points[members] - new[big]) ** 2).sum(axis=1)))]
            new[j] = points[far]
            labels[far] = j
            counts[big] -= 1
            counts[j] = 1
        shift = float(np.sqrt(((new - centers) ** 2).sum(axis=1)).max())
        centers = new
        if shift < tol:
            break
    d = _sq_dists(points, centers)
    labels = d.argmin(axis=1)
    sse = float(d[np.arange(len(points)), labels].sum())
    if history:
        assert sse <= history[-1] * (1 + 1e-9) + 1e-12, "SSE increased between iterations"
    history.append(sse)
    return labels, centers, sse, it, history


def kmeans(points, k: int, seed: int = 0, max_iter: int = DEFAULT_MAX_ITER,
           tol: float = DEFAULT_TOL, n_init: int = DEFAULT_RESTARTS) -> Assignment:
    """Cluster ``points`` into ``k`` groups, keeping the lowest-SSE restart.

    Each restart draws its k-means++ seeding from a sub-seed derived from
    ``seed``, so the result depends only on ``(points, k, seed)``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise DomainError("k-means needs a non-empty 2-d array of points")
    if k < 1:
        raise DomainError("k must be at least 1")
    if max_iter < 1 or tol < 0 or n_init < 1:
        raise DomainError("max_iter and n_init must be >= 1 and tol >= 0")
    n_distinct = len(np.unique(pts, axis=0))
    if k > n_distinct:
        raise DomainError(f"k={k} exceeds the {n_distinct} distinct points")

    best = None
    for child in np.random.SeedSequence(seed).spawn(n_init):
        rng = np.random.default_rng(child)
        labels, centers, sse, it, hist = _lloyd(pts, _plus_plus(pts, k, rng), max_iter, tol)
        if best is None or sse < best[2]:
            best = (labels, centers, sse, it, hist)
    labels, centers, sse, it, hist = best
    dead = tuple(int(j) for j in np.flatnonzero(np.bincount(labels, minlength=k) == 0))
    return Assignment(labels=labels, centroids=centers, sse=sse, iterations=it,
                      sse_history=hist, dead=dead)
