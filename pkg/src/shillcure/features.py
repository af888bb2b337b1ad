"""The eight per-(auction, bidder) shill-bidding metrics.

All metrics lie in [0, 1]; higher means more suspicious.

    bt   share of the bidder's auctions held by their most-frequented seller
    br   bidder's share of the bids in the auction
    so   successive self-outbids: 0, 1, >=2 map to 0, 0.5, 1
    lb   time of the bidder's last bid as a fraction of the duration
    eb   time of the bidder's first bid as a fraction of the duration
    wr   1 - auctions won / auctions entered
    ab   max(0, 1 - mean bids per auction / bids in this auction)
    asp  max(0, 1 - start price / mean start price)
"""

from __future__ import annotations

import csv
import logging
from collections import Counter, defaultdict
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from shillcure.errors import SchemaError, ParseError
from shillcure.ingestion import BidRecord, CleanDataset, id_key

log = logging.getLogger(__name__)

FEATURES = ("bt", "br", "so", "lb", "eb", "wr", "ab", "asp")
INSTANCE_COLUMNS = ("auction_id", "bidder_id") + FEATURES


@dataclass(frozen=True)
class SBInstance:
    auction_id: str
    bidder_id: str
    bt: float
    br: float
    so: float
    lb: float
    eb: float
    wr: float
    ab: float
    asp: float

    @property
    def vector(self) -> tuple:
        return astuple(self)[2:]


class InstanceList(list):
    """A list of :class:`SBInstance` that remembers skipped auctions."""

    skipped_auctions: int = 0


def successive_outbid_runs(bids: Sequence[BidRecord], bidder_id: str) -> int:
    """Count bids placed by ``bidder_id`` while already holding the top bid.

    ``bids`` must be in time order. An equal amount does not take the lead.
    """
    count = 0
    leader = None
    top = float("-inf")
    for b in bids:
        if b.bidder_id == bidder_id and leader == bidder_id:
            count += 1
        if b.bid_amount > top:
            top = b.bid_amount
            leader = b.bidder_id
    return count


def so_score(runs: int) -> float:
    return 0.0 if runs <= 0 else 0.5 if runs == 1 else 1.0


def compute_instances(dataset: CleanDataset) -> InstanceList:
    """One :class:`SBInstance` per (auction, bidder) pair, ordered by ids."""
    by_auction: dict[str, list[BidRecord]] = defaultdict(list)
    for r in dataset.records:
        by_auction[r.auction_id].append(r)

    # bidder history pre-pass
    entered: dict[str, set] = defaultdict(set)
    won: Counter = Counter()
    seller_counts: dict[str, Counter] = defaultdict(Counter)
    for auction_id, summary in dataset.auction_index.items():
        for bidder in summary.bidders:
            entered[bidder].add(auction_id)
            seller_counts[bidder][summary.seller_id] += 1
        if summary.winner_id:
            won[summary.winner_id] += 1

    mean_bids = dataset.mean_bids_per_auction
    mean_start = dataset.mean_start_price

    out = InstanceList()
    for auction_id in dataset.auction_ids():
        summary = dataset.auction_index[auction_id]
        bids = sorted(by_auction.get(auction_id, ()), key=lambda r: r.bid_time)
        if not bids:
            out.skipped_auctions += 1
            continue
        n_bids = len(bids)
        per_bidder: dict[str, list[BidRecord]] = defaultdict(list)
        for b in bids:
            per_bidder[b.bidder_id].append(b)
        ab = max(0.0, 1.0 - mean_bids / n_bids)
        asp = max(0.0, 1.0 - summary.start_price / mean_start) if mean_start > 0 else 0.0
        for bidder in sorted(per_bidder, key=id_key):
            mine = per_bidder[bidder]
            n_entered = len(entered[bidder])
            out.append(SBInstance(
                auction_id=auction_id,
                bidder_id=bidder,
                bt=max(seller_counts[bidder].values()) / n_entered,
                br=len(mine) / n_bids,
                so=so_score(successive_outbid_runs(bids, bidder)),
                lb=mine[-1].bid_time / summary.duration,
                eb=mine[0].bid_time / summary.duration,
                wr=1.0 - won[bidder] / n_entered,
                ab=ab,
                asp=asp,
            ))
    if out.skipped_auctions:
        log.warning("skipped %d auction(s) without bids", out.skipped_auctions)
    return out


def instance_matrix(instances: Iterable[SBInstance]) -> np.ndarray:
    """Stack feature vectors into an (n, 8) float array."""
    rows = [inst.vector for inst in instances]
    return np.asarray(rows, dtype=float).reshape(len(rows), len(FEATURES))


def write_instances_csv(path, instances, extra=None) -> None:
    """Write instances with features at 6 decimals.

    ``extra`` maps additional column names to per-instance value lists.
    """
    extra = extra or {}
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(INSTANCE_COLUMNS + tuple(extra))
        for i, inst in enumerate(instances):
            w.writerow(
                [inst.auction_id, inst.bidder_id]
                + [f"{v:.6f}" for v in inst.vector]
                + [vals[i] for vals in extra.values()]
            )


def read_instances_csv(path) -> tuple[list[SBInstance], dict[str, list[str]]]:
    """Read an instance CSV; returns the instances and any extra columns.

    Lines starting with ``#`` are ignored. Feature values must lie in [0, 1].
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: missing header") from None
        missing = [c for c in INSTANCE_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: header lacks column(s) {', '.join(missing)}")
        pos = [header.index(c) for c in INSTANCE_COLUMNS]
        extra_names = [h for h in header if h not in INSTANCE_COLUMNS]
        extra_pos = [header.index(h) for h in extra_names]
        instances = []
        extra = {name: [] for name in extra_names}
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(line, f"expected {len(header)} columns, got {len(row)}")
            vals = [row[i].strip() for i in pos]
            try:
                feats = [float(v) for v in vals[2:]]
            except ValueError:
                raise ParseError(line, "non-numeric feature value") from None
            if not all(0.0 <= f <= 1.0 for f in feats):
                raise ParseError(line, "feature outside [0, 1]")
            instances.append(SBInstance(vals[0], vals[1], *feats))
            for name, i in zip(extra_names, extra_pos):
                extra[name].append(row[i].strip())
    return instances, extra
