"""Grid search over CURE's representative count and shrinking factor."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from shillcure.cure import CureParams, cure_cluster
from shillcure.errors import DomainError, ShillCureError

log = logging.getLogger(__name__)

DEFAULT_RPS = (5, 10)
DEFAULT_ALPHAS = (0.1, 0.05, 0.01, 0.001)
DEFAULT_MIN_SIZE = 5

CRITERION_NOTE = (
    "score = clusters with >= {min_size} members + 0.5 * normalised size entropy; "
    "a stand-in for picking the most even cluster-size distribution by eye"
)


@dataclass(frozen=True)
class SweepGrid:
    rp_values: tuple = DEFAULT_RPS
    alpha_values: tuple = DEFAULT_ALPHAS

    def __post_init__(self):
        if not self.rp_values or not self.alpha_values:
            raise DomainError("sweep grid needs at least one RP and one alpha")
        if any(int(r) != r or r < 1 for r in self.rp_values):
            raise DomainError("RP values must be positive integers")
        if any(not 0.0 <= a <= 1.0 for a in self.alpha_values):
            raise DomainError("alpha values must lie in [0, 1]")

    def cells(self) -> list[tuple[int, float]]:
        return [(int(r), float(a)) for r in self.rp_values for a in self.alpha_values]


@dataclass
class SweepRow:
    rp: int
    alpha: float
    sizes: list
    score: float
    error: str = ""
    chosen: bool = False


@dataclass
class SweepResult:
    rp: int
    alpha: float
    clusters: list
    rows: list = field(default_factory=list)
    min_size: int = DEFAULT_MIN_SIZE


def distribution_score(sizes, min_size: int = DEFAULT_MIN_SIZE) -> float:
    """Number of clusters with at least ``min_size`` members, tie-broken by size entropy.

    The entropy is normalised to [0, 1] and halved, so a difference in the
    count always outweighs it.
    """
    sizes = np.asarray([s for s in sizes if s > 0], dtype=float)
    big = int((sizes >= min_size).sum())
    if len(sizes) < 2:
        return float(big)
    p = sizes / sizes.sum()
    entropy = float(-(p * np.log(p)).sum()) / math.log(len(sizes))
    return big + 0.5 * entropy


def _run_cell(points, rp, alpha, target_k, seed, base):
    params = CureParams(
        num_reps=rp,
        alpha=alpha,
        target_k=target_k,
        sample_fraction=base.sample_fraction,
        outlier_elimination=base.outlier_elimination,
        outlier_min_size=base.outlier_min_size,
    )
    return cure_cluster(points, params, seed=seed)


def sweep_params(points, target_k: int, grid: SweepGrid | None = None, seed: int = 0,
                 min_size: int = DEFAULT_MIN_SIZE, base: CureParams | None = None,
                 jobs: int = 1) -> SweepResult:
    """Run CURE on every grid cell and keep the best-distributed clustering.

    A failing cell is reported and skipped. Ties keep the earlier cell in
    grid order (RP-major, alphas as listed).
    """
    grid = grid or SweepGrid()
    base = base or CureParams(target_k=target_k)
    pts = np.asarray(points, dtype=float)
    cells = grid.cells()
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(len(cells))]

    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_cell, pts, rp, a, target_k, s, base) for (rp, a), s in zip(cells, seeds)]
            outcomes = []
            for f in futures:
                try:
                    outcomes.append(f.result())
                except ShillCureError as exc:
                    outcomes.append(exc)
    else:
        outcomes = []
        for (rp, a), s in zip(cells, seeds):
            try:
                outcomes.append(_run_cell(pts, rp, a, target_k, s, base))
            except ShillCureError as exc:
                outcomes.append(exc)

    rows, best = [], None
    for (rp, alpha), out in zip(cells, outcomes):
        if isinstance(out, Exception):
            log.warning("sweep cell RP=%d alpha=%g failed: %s", rp, alpha, out)
            rows.append(SweepRow(rp, alpha, [], float("nan"), error=str(out)))
            continue
        sizes = [c.size for c in out]
        row = SweepRow(rp, alpha, sizes, distribution_score(sizes, min_size))
        rows.append(row)
        if best is None or row.score > best[0].score:
            best = (row, out)
    if best is None:
        raise DomainError("every sweep cell failed")
    best[0].chosen = True
    return SweepResult(rp=best[0].rp, alpha=best[0].alpha, clusters=best[1], rows=rows, min_size=min_size)
