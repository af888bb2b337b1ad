"""Synthetic data: auction bid logs with planted shills, and point-cloud benchmarks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from shillcure.errors import DomainError
from shillcure.ingestion import BidRecord, CleanDataset, convert_duration, preprocess

# reference auction share per auction duration (days)
REFERENCE_DURATION_MIX = {1: 0.2057, 3: 0.232, 5: 0.1623, 7: 0.383, 10: 0.017}

# reference (days, auctions, instances) per duration split
REFERENCE_LAYOUT = ((1, 166, 1289), (3, 187, 1408), (5, 131, 1060), (7, 309, 2427), (10, 14, 137))


@dataclass(frozen=True)
class SyntheticConfig:
    """Generator parameters.

    ``shill_fraction`` is the probability that an auction contains a shill
    account working for its seller. When ``layout`` is given it fixes the
    number of auctions and (auction, bidder) instances per duration and
    overrides ``n_auctions``, ``duration_mix`` and ``bidders_per_auction``.
    """

    n_auctions: int = 100
    duration_mix: Mapping[int, float] = field(default_factory=lambda: dict(REFERENCE_DURATION_MIX))
    n_bidders: int = 400
    n_sellers: int = 80
    shill_fraction: float = 0.2
    price_range: tuple[float, float] = (50.0, 600.0)
    bidders_per_auction: tuple[int, int] = (2, 12)
    max_bids_per_bidder: int = 4
    no_winner_rate: float = 0.03
    layout: tuple | None = None

    @classmethod
    def from_mapping(cls, data: Mapping) -> "SyntheticConfig":
        data = dict(data)
        if "duration_mix" in data:
            data["duration_mix"] = {int(k): float(v) for k, v in data["duration_mix"].items()}
        for key in ("price_range", "bidders_per_auction"):
            if key in data:
                data[key] = tuple(data[key])
        if data.get("layout") is not None:
            data["layout"] = tuple(tuple(int(v) for v in row) for row in data["layout"])
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise DomainError(f"unknown generator option(s): {', '.join(sorted(unknown))}")
        return cls(**data)


def full_scale_config(shill_fraction: float = 0.2) -> SyntheticConfig:
    """807 auctions / 6321 instances split across five durations (REFERENCE_LAYOUT)."""
    return SyntheticConfig(
        n_auctions=sum(a for _, a, _ in REFERENCE_LAYOUT),
        n_bidders=1054,
        n_sellers=647,
        shill_fraction=shill_fraction,
        layout=REFERENCE_LAYOUT,
    )


def _plan(cfg: SyntheticConfig, rng: np.random.Generator) -> list[tuple[int, int]]:
    """(days, participant count) per auction."""
    if cfg.layout is not None:
        plan = []
        for days, n_auc, n_inst in cfg.layout:
            if n_auc <= 0:
                continue
            spare = n_inst - 2 * n_auc
            if spare < 0 or n_inst > n_auc * cfg.n_bidders:
                raise DomainError(f"cannot place {n_inst} instances in {n_auc} auctions of {days} day(s)")
            counts = 2 + rng.multinomial(spare, np.full(n_auc, 1.0 / n_auc))
            # a participant count cannot exceed the bidder pool
            while counts.max() > cfg.n_bidders:
                i, j = int(counts.argmax()), int(counts.argmin())
                counts[i] -= 1
                counts[j] += 1
            plan.extend((days, int(c)) for c in counts)
        order = rng.permutation(len(plan))
        return [plan[i] for i in order]
    days = sorted(cfg.duration_mix)
    weights = np.array([cfg.duration_mix[d] for d in days], dtype=float)
    if (weights < 0).any() or weights.sum() <= 0:
        raise DomainError("duration_mix weights must be non-negative with a positive sum")
    lo, hi = cfg.bidders_per_auction
    picks = rng.choice(len(days), size=cfg.n_auctions, p=weights / weights.sum())
    sizes = rng.integers(lo, hi + 1, size=cfg.n_auctions)
    return [(days[p], int(min(s, cfg.n_bidders))) for p, s in zip(picks, sizes)]


def _interleave(counts: dict[str, int], rng: np.random.Generator) -> list[str]:
    """Bid order in which no bidder bids twice in a row."""
    remaining = dict(counts)
    seq: list[str] = []
    prev = None
    while True:
        choices = [b for b, c in remaining.items() if c > 0 and b != prev]
        if not choices:
            break
        best = max(remaining[b] for b in choices)
        top = [b for b in choices if remaining[b] == best]
        pick = top[int(rng.integers(len(top)))]
        seq.append(pick)
        remaining[pick] -= 1
        prev = pick
    return seq


def generate_synthetic(config: SyntheticConfig, seed: int) -> CleanDataset:
    """Generate a clean bid log; deterministic in ``(config, seed)``.

    Honest bidders only bid when outbid. Shill accounts are tied to a
    colluding seller, open the auction, outbid themselves in short runs,
    and go quiet before the final stage so they never win.
    """
    cfg = config
    if cfg.layout is None and cfg.n_auctions <= 0:
        raise DomainError("at least one auction is required")
    if cfg.layout is not None and sum(a for _, a, _ in cfg.layout) <= 0:
        raise DomainError("at least one auction is required")
    if not 0.0 <= cfg.shill_fraction <= 1.0:
        raise DomainError("shill_fraction must lie in [0, 1]")
    if cfg.n_bidders < 2 or cfg.n_sellers < 1:
        raise DomainError("need at least 2 bidders and 1 seller")
    lo_price, hi_price = cfg.price_range
    if not 0 <= lo_price <= hi_price:
        raise DomainError("price_range must satisfy 0 <= low <= high")

    rng = np.random.default_rng(seed)
    plan = _plan(cfg, rng)

    width = len(str(max(cfg.n_bidders, cfg.n_sellers)))
    bidders = [f"b{i:0{width}d}" for i in range(1, cfg.n_bidders + 1)]
    sellers = [f"s{i:0{width}d}" for i in range(1, cfg.n_sellers + 1)]
    n_colluding = max(1, round(0.1 * cfg.n_sellers)) if cfg.shill_fraction > 0 else 0
    colluding = sellers[:n_colluding]
    honest = sellers[n_colluding:] or sellers
    shill_of = {s: f"x{i:0{width}d}" for i, s in enumerate(colluding, start=1)}
    popularity = 1.0 / np.arange(1, cfg.n_bidders + 1) ** 0.8
    popularity /= popularity.sum()

    records = []
    for n, (days, n_part) in enumerate(plan, start=1):
        auction_id = str(n)
        duration = convert_duration(days)
        has_shill = n_colluding > 0 and rng.random() < cfg.shill_fraction
        n_honest = n_part - 1 if has_shill else n_part
        if has_shill:
            seller = colluding[int(rng.integers(n_colluding))]
            token_start = rng.random() < 0.8
        else:
            seller = honest[int(rng.integers(len(honest)))]
            token_start = rng.random() < 0.2
        start_price = 0.99 if token_start else round(float(rng.uniform(lo_price, hi_price)), 2)

        chosen = rng.choice(cfg.n_bidders, size=n_honest, replace=False, p=popularity)
        counts = {
            bidders[i]: int(min(rng.geometric(0.55), cfg.max_bids_per_bidder))
            for i in sorted(chosen)
        }
        seq = _interleave(counts, rng)
        if has_shill:
            shill = shill_of[seller]
            blocks = int(rng.integers(1, 3))
            # the first run opens the auction, later ones land in the first third
            spots = [0] + sorted(int(rng.integers(1, max(2, len(seq) // 3 + 1))) for _ in range(blocks - 1))
            # the opening run alone holds at least two self-outbids
            sizes = [int(rng.integers(3, 5))] + [int(rng.integers(2, 4)) for _ in spots[1:]]
            for spot, size in reversed(list(zip(spots, sizes))):
                seq[spot:spot] = [shill] * size

        times = np.sort(rng.choice(duration + 1, size=len(seq), replace=False))
        steps = np.round(rng.uniform(1.0, 15.0, size=len(seq)), 2)
        amounts = np.round(start_price + np.cumsum(steps), 2)
        winner = seq[-1] if rng.random() >= cfg.no_winner_rate else ""
        for bidder, t, amount in zip(seq, times, amounts):
            records.append(BidRecord(
                auction_id=auction_id,
                bidder_id=bidder,
                seller_id=seller,
                bid_amount=float(amount),
                bid_time=float(t),
                duration=float(duration),
                start_price=start_price,
                winner_id=winner,
            ))
    return preprocess(records)


def make_blobs(n_points: int, n_centers: int, sigma: float, min_separation: float,
               dim: int = 8, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian blobs with centers drawn in the unit cube at least ``min_separation`` apart."""
    rng = np.random.default_rng(seed)
    centers: list[np.ndarray] = []
    for _ in range(100_000):
        c = rng.random(dim)
        if all(np.linalg.norm(c - o) >= min_separation for o in centers):
            centers.append(c)
            if len(centers) == n_centers:
                break
    else:
        raise DomainError("could not place blob centers at the requested separation")
    labels = np.arange(n_points) % n_centers
    rng.shuffle(labels)
    points = np.asarray(centers)[labels] + rng.normal(0.0, sigma, size=(n_points, dim))
    return points, labels


def make_elongated_pair(n_points: int = 200, length: float = 10.0, gap: float = 3.0,
                        thickness: float = 0.15, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Two long parallel bars in the plane.

    Centroid-based methods prefer to cut both bars across the middle; the
    true grouping is one bar per cluster.
    """
    rng = np.random.default_rng(seed)
    labels = np.repeat([0, 1], [n_points // 2, n_points - n_points // 2])
    x = rng.uniform(0.0, length, size=n_points)
    y = labels * gap + rng.normal(0.0, thickness, size=n_points)
    order = rng.permutation(n_points)
    return np.column_stack([x, y])[order], labels[order]
