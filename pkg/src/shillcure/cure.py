"""CURE: agglomerative clustering with shrunken, well-scattered representatives.

Every point starts as its own cluster. The pair of clusters whose
representatives are closest is merged until ``target_k`` clusters remain.
After each merge the union's representatives are re-picked from all of its
members by farthest-point traversal and pulled toward the centroid by
``alpha``.

Merge selection keeps, per cluster, its nearest neighbour and the distance
to it, plus a min-heap of those (distance, pair) entries with lazy
invalidation. A dense cluster-to-cluster distance matrix lets a cluster
whose neighbour was just merged away find its new neighbour with one
row scan.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from shillcure.errors import DomainError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CureParams:
    num_reps: int = 5
    alpha: float = 0.1
    target_k: int = 2
    sample_fraction: float = 1.0
    outlier_elimination: bool = False
    outlier_min_size: int = 3

    def __post_init__(self):
        if self.num_reps < 1:
            raise DomainError("num_reps must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError("alpha must lie in [0, 1]")
        if self.target_k < 1:
            raise DomainError("target_k must be >= 1")
        if not 0.0 < self.sample_fraction <= 1.0:
            raise DomainError("sample_fraction must lie in (0, 1]")
        if self.outlier_min_size < 1:
            raise DomainError("outlier_min_size must be >= 1")


@dataclass
class CureCluster:
    members: np.ndarray  # sorted point indices
    centroid: np.ndarray
    reps: np.ndarray  # shrunken representatives, one per row
    scattered: np.ndarray  # the member points the reps were shrunk from

    @property
    def size(self) -> int:
        return len(self.members)


def shrink_reps(scattered, centroid, alpha: float) -> np.ndarray:
    """Move each point a fraction ``alpha`` of the way to ``centroid``."""
    scattered = np.asarray(scattered, dtype=float)
    centroid = np.asarray(centroid, dtype=float)
    # convex form so alpha = 0 and alpha = 1 are exact
    return (1.0 - alpha) * scattered + alpha * centroid


def _scatter_positions(points: np.ndarray, centroid: np.ndarray, num_reps: int) -> list[int]:
    n = len(points)
    want = min(num_reps, n)
    first = int(np.argmax(((points - centroid) ** 2).sum(axis=1)))
    chosen = [first]
    if want == 1:
        return chosen
    mind = np.sqrt(((points - points[first]) ** 2).sum(axis=1))
    mind[first] = -1.0
    while len(chosen) < want:
        nxt = int(np.argmax(mind))
        chosen.append(nxt)
        mind = np.minimum(mind, np.sqrt(((points - points[nxt]) ** 2).sum(axis=1)))
        mind[chosen] = -1.0
    return chosen


def select_representatives(members, centroid, num_reps: int) -> np.ndarray:
    """Well-scattered subset of ``members`` by farthest-point traversal.

    Starts from the member farthest from the centroid; each further pick
    maximises its distance to the picks so far. Ties favour the earlier row.
    """
    members = np.asarray(members, dtype=float)
    if len(members) == 0:
        raise DomainError("cannot pick representatives of an empty cluster")
    return members[_scatter_positions(members, np.asarray(centroid, dtype=float), num_reps)]


def cluster_distance(a: CureCluster, b: CureCluster) -> float:
    """Smallest distance between a representative of ``a`` and one of ``b``."""
    return float(cdist(a.reps, b.reps).min())


class _Agglomerator:
    """Mutable merge state. Cluster ids are the smallest member index."""

    def __init__(self, points: np.ndarray, num_reps: int, alpha: float):
        n = len(points)
        self.n = n
        self.pts = points
        self.num_reps = num_reps
        self.alpha = alpha
        self.members = {i: np.array([i]) for i in range(n)}
        self.centroids = {i: points[i].copy() for i in range(n)}
        self.scattered = {i: points[i:i + 1].copy() for i in range(n)}
        self.slots = {i: [i] for i in range(n)}
        # flat representative store; owner n marks a free slot
        self.rep_xy = points.copy()
        self.rep_owner = np.arange(n)
        self.active = np.ones(n, dtype=bool)
        self.n_active = n

        self.dm = cdist(points, points)
        np.fill_diagonal(self.dm, np.inf)
        self.nn = self.dm.argmin(axis=1) if n > 1 else np.zeros(n, dtype=int)
        self.nnd = self.dm[np.arange(n), self.nn]
        self.heap = [(self.nnd[u], min(u, self.nn[u]), max(u, self.nn[u]), u) for u in range(n) if n > 1]
        heapq.heapify(self.heap)

    def _push(self, u: int) -> None:
        v = int(self.nn[u])
        heapq.heappush(self.heap, (float(self.nnd[u]), min(u, v), max(u, v), u))

    def _row(self, c: int) -> np.ndarray:
        """Distance from cluster ``c`` to every cluster id (inf for itself and inactive ids)."""
        reps = self.rep_xy[self.slots[c]]
        per_slot = cdist(reps, self.rep_xy).min(axis=0)
        out = np.full(self.n + 1, np.inf)
        np.minimum.at(out, self.rep_owner, per_slot)
        out = out[: self.n]
        out[c] = np.inf
        out[~self.active] = np.inf
        return out

    def _refresh_neighbours(self, changed: int, row: np.ndarray, lost: tuple) -> None:
        """Fix nearest-neighbour entries after cluster ``changed`` got a new distance ``row``."""
        if self.n_active > 1:
            self.nn[changed] = int(row.argmin())
            self.nnd[changed] = row[self.nn[changed]]
            self._push(changed)
        cand = self.active.copy()
        cand[changed] = False
        stale = cand & ((self.nn == lost[0]) | (self.nn == lost[1]))
        idx = np.flatnonzero(stale)
        if len(idx):
            best = self.dm[idx].argmin(axis=1)
            self.nn[idx] = best
            self.nnd[idx] = self.dm[idx, best]
            for u in idx:
                self._push(int(u))
        better = cand & ~stale & ((row < self.nnd) | ((row == self.nnd) & (changed < self.nn)))
        idx = np.flatnonzero(better)
        self.nn[idx] = changed
        self.nnd[idx] = row[idx]
        for u in idx:
            self._push(int(u))

    def _set_shape(self, c: int, members: np.ndarray) -> None:
        pts = self.pts[members]
        centroid = pts.mean(axis=0)
        scattered = pts[_scatter_positions(pts, centroid, self.num_reps)]
        self.members[c] = members
        self.centroids[c] = centroid
        self.scattered[c] = scattered
        reps = shrink_reps(scattered, centroid, self.alpha)
        free = sorted(self.slots[c])
        if len(free) < len(reps):
            raise RuntimeError("representative store exhausted")
        use, rest = free[: len(reps)], free[len(reps):]
        self.rep_xy[use] = reps
        self.rep_owner[use] = c
        self.rep_owner[rest] = self.n
        self.slots[c] = use

    def merge(self, a: int, b: int) -> None:
        w, z = min(a, b), max(a, b)
        members = np.sort(np.concatenate([self.members[w], self.members[z]]))
        self.slots[w] = self.slots[w] + self.slots.pop(z)
        for d in (self.members, self.centroids, self.scattered):
            del d[z]
        self.active[z] = False
        self.n_active -= 1
        self.nn[z] = -1
        self.nnd[z] = np.inf
        self._set_shape(w, members)

        row = self._row(w)
        self.dm[w, :] = row
        self.dm[:, w] = row
        self.dm[z, :] = np.inf
        self.dm[:, z] = np.inf
        self._refresh_neighbours(w, row, (w, z))

    def dissolve(self, c: int) -> np.ndarray:
        """Remove cluster ``c`` and return its members."""
        members = self.members.pop(c)
        del self.centroids[c], self.scattered[c]
        self.rep_owner[self.slots.pop(c)] = self.n
        self.active[c] = False
        self.n_active -= 1
        self.nn[c] = -1
        self.nnd[c] = np.inf
        self.dm[c, :] = np.inf
        self.dm[:, c] = np.inf
        cand = self.active & (self.nn == c)
        idx = np.flatnonzero(cand)
        if len(idx):
            best = self.dm[idx].argmin(axis=1)
            self.nn[idx] = best
            self.nnd[idx] = self.dm[idx, best]
            for u in idx:
                self._push(int(u))
        return members

    def pop_closest(self) -> tuple[int, int]:
        while self.heap:
            d, lo, hi, u = heapq.heappop(self.heap)
            v = hi if u == lo else lo
            if self.active[u] and self.active[v] and self.nn[u] == v and self.nnd[u] == d:
                return lo, hi
        raise RuntimeError("no mergeable pair left")

    def clusters(self) -> list[CureCluster]:
        return [
            CureCluster(
                members=self.members[c],
                centroid=self.centroids[c],
                reps=self.rep_xy[self.slots[c]].copy(),
                scattered=self.scattered[c],
            )
            for c in sorted(self.members)
        ]


def _assign_to_reps(points: np.ndarray, clusters: list[CureCluster]) -> np.ndarray:
    """Index of the cluster owning the nearest representative (ties: lower index)."""
    reps = np.vstack([c.reps for c in clusters])
    owner = np.concatenate([np.full(len(c.reps), i) for i, c in enumerate(clusters)])
    d = cdist(points, reps)
    best = d.min(axis=1, keepdims=True)
    hit = d == best
    return np.where(hit, owner[None, :], len(clusters)).min(axis=1)


def _absorb(points: np.ndarray, clusters: list[CureCluster], extra: np.ndarray,
            params: CureParams) -> list[CureCluster]:
    """Add the points ``extra`` to their nearest clusters, then refresh shapes."""
    if len(extra) == 0:
        return clusters
    target = _assign_to_reps(points[extra], clusters)
    out = []
    for i, c in enumerate(clusters):
        add = extra[target == i]
        if len(add) == 0:
            out.append(c)
            continue
        members = np.sort(np.concatenate([c.members, add]))
        pts = points[members]
        centroid = pts.mean(axis=0)
        scattered = pts[_scatter_positions(pts, centroid, params.num_reps)]
        out.append(CureCluster(members, centroid, shrink_reps(scattered, centroid, params.alpha), scattered))
    return out


def cure_cluster(points, params: CureParams, seed: int = 0) -> list[CureCluster]:
    """Cluster ``points`` into ``params.target_k`` CURE clusters.

    Output clusters are ordered by their smallest member index. With the
    default ``sample_fraction`` of 1 the result does not depend on ``seed``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise DomainError("CURE needs a non-empty 2-d array of points")
    n = len(pts)
    if params.target_k > n:
        raise DomainError(f"target_k={params.target_k} exceeds {n} points")

    if params.sample_fraction < 1.0:
        rng = np.random.default_rng(seed)
        size = max(params.target_k, int(round(params.sample_fraction * n)))
        sample = np.sort(rng.choice(n, size=size, replace=False))
    else:
        sample = np.arange(n)

    eng = _Agglomerator(pts[sample], params.num_reps, params.alpha)
    held = []
    checkpoint = math.ceil(len(sample) / 3) if params.outlier_elimination else 0
    while eng.n_active > params.target_k:
        if checkpoint and eng.n_active <= checkpoint:
            checkpoint = 0
            small = sorted((len(m), c) for c, m in eng.members.items() if len(m) < params.outlier_min_size)
            room = eng.n_active - params.target_k
            for _, c in small[:room]:
                held.append(eng.dissolve(c))
            if eng.n_active <= params.target_k:
                break
        eng.merge(*eng.pop_closest())

    clusters = eng.clusters()
    for c in clusters:
        c.members = sample[c.members]
    rest = np.setdiff1d(np.arange(n), sample)
    if held:
        rest = np.sort(np.concatenate([rest] + [sample[h] for h in held]))
    if len(held):
        log.info("reassigned %d outlier point(s)", sum(len(h) for h in held))
    clusters = _absorb(pts, clusters, rest, params)
    return sorted(clusters, key=lambda c: int(c.members[0]))


def labels_from_clusters(clusters: list[CureCluster], n: int) -> np.ndarray:
    labels = np.full(n, -1)
    for i, c in enumerate(clusters):
        labels[c.members] = i
    return labels
