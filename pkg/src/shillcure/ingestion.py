"""Bid-log parsing and preprocessing.

A bid log is a CSV with one row per bid event. Durations may be given in
days or seconds (``duration_unit`` column); records always carry seconds.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from shillcure.errors import DomainError, EmptyDatasetError, ParseError, SchemaError

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400

BID_COLUMNS = (
    "auction_id",
    "bidder_id",
    "seller_id",
    "bid_amount",
    "bid_time",
    "duration",
    "duration_unit",
    "start_price",
    "winner_id",
)
DURATION_UNITS = ("days", "seconds")


@dataclass(frozen=True)
class BidRecord:
    auction_id: str
    bidder_id: str
    seller_id: str
    bid_amount: float
    bid_time: float  # seconds since auction start
    duration: float  # seconds
    start_price: float
    winner_id: str = ""


@dataclass(frozen=True)
class AuctionSummary:
    auction_id: str
    seller_id: str
    n_bids: int
    bidders: frozenset
    start_price: float
    duration: float
    winner_id: str


@dataclass(frozen=True)
class CleanDataset:
    """Preprocessed bid log. Treat as immutable."""

    records: tuple
    auction_index: Mapping[str, AuctionSummary]
    mean_bids_per_auction: float
    mean_start_price: float

    @property
    def n_auctions(self) -> int:
        return len(self.auction_index)

    def auction_ids(self) -> list[str]:
        return sorted(self.auction_index, key=id_key)


def id_key(value: str):
    """Sort key ordering numeric identifiers numerically, others lexically."""
    return (0, int(value), "") if value.isdigit() else (1, 0, value)


def convert_duration(days: int) -> int:
    """Auction length in seconds for a whole number of days."""
    if int(days) != days or days <= 0:
        raise DomainError(f"duration must be a positive whole number of days, got {days!r}")
    return int(days) * SECONDS_PER_DAY


def _to_seconds(value: float, unit: str) -> float:
    if unit == "seconds":
        return value
    if value.is_integer():
        return float(convert_duration(int(value)))
    return value * SECONDS_PER_DAY


def parse_bids_csv(path: str | Path) -> list[BidRecord]:
    """Read a bid-log CSV into unvalidated records.

    Rows with an empty ``bidder_id`` are kept; :func:`preprocess` drops them.
    Any other malformed row raises :class:`ParseError` naming its file line.
    """
    path = Path(path)
    records = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: missing header") from None
        header = [h.strip() for h in header]
        missing = [c for c in BID_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: header lacks column(s) {', '.join(missing)}")
        pos = {name: header.index(name) for name in BID_COLUMNS}
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(line, f"expected {len(header)} columns, got {len(row)}")
            records.append(_parse_row(line, {k: row[i].strip() for k, i in pos.items()}))
    return records


def _parse_row(line: int, raw: dict) -> BidRecord:
    def number(name):
        try:
            value = float(raw[name])
        except ValueError:
            raise ParseError(line, f"{name}={raw[name]!r} is not a number") from None
        if value != value or value in (float("inf"), float("-inf")):
            raise ParseError(line, f"{name} is not finite")
        return value

    unit = raw["duration_unit"]
    if unit not in DURATION_UNITS:
        raise ParseError(line, f"duration_unit must be one of {DURATION_UNITS}, got {unit!r}")
    if not raw["auction_id"]:
        raise ParseError(line, "empty auction_id")
    amount = number("bid_amount")
    bid_time = number("bid_time")
    start_price = number("start_price")
    try:
        duration = _to_seconds(number("duration"), unit)
    except DomainError as exc:
        raise ParseError(line, str(exc)) from None
    if duration <= 0:
        raise ParseError(line, "duration must be positive")
    if amount < 0 or start_price < 0:
        raise ParseError(line, "negative amount")
    if not 0 <= bid_time <= duration:
        raise ParseError(line, f"bid_time {bid_time:g} outside [0, {duration:g}]")
    return BidRecord(
        auction_id=raw["auction_id"],
        bidder_id=raw["bidder_id"],
        seller_id=raw["seller_id"],
        bid_amount=amount,
        bid_time=bid_time,
        duration=duration,
        start_price=start_price,
        winner_id=raw["winner_id"],
    )


def _sort_key(r: BidRecord):
    # metadata fields last so the order, and with it every tie-break, ignores input order
    return (id_key(r.auction_id), r.bid_time, id_key(r.bidder_id), r.bid_amount,
            r.seller_id, r.duration, r.start_price, r.winner_id)


def _is_valid(r: BidRecord) -> bool:
    return r.duration > 0 and r.bid_amount >= 0 and r.start_price >= 0 and 0 <= r.bid_time <= r.duration


def preprocess(records: Iterable[BidRecord]) -> CleanDataset:
    """Clean a record list and index it by auction.

    Drops rows with missing bidder ids, invalid numbers, exact duplicates on
    (auction, bidder, time, amount), and rows whose auction metadata
    disagrees with the majority of that auction's rows. A winner id that
    never bid in its auction is cleared.
    """
    records = list(records)
    n_in = len(records)
    kept = [
        replace(r, bidder_id=r.bidder_id.strip())
        for r in records
        if r.bidder_id.strip() and _is_valid(r)
    ]
    kept.sort(key=_sort_key)

    seen = set()
    unique = []
    for r in kept:
        key = (r.auction_id, r.bidder_id, r.bid_time, r.bid_amount)
        if key not in seen:
            seen.add(key)
            unique.append(r)

    by_auction: dict[str, list[BidRecord]] = {}
    for r in unique:
        by_auction.setdefault(r.auction_id, []).append(r)

    out = []
    for auction_id in sorted(by_auction, key=id_key):
        rows = by_auction[auction_id]
        meta = Counter((r.seller_id, r.duration, r.start_price, r.winner_id) for r in rows)
        top = max(meta.values())
        # ties go to the first combination in record order
        ref = next(m for m in ((r.seller_id, r.duration, r.start_price, r.winner_id) for r in rows) if meta[m] == top)
        rows = [r for r in rows if (r.seller_id, r.duration, r.start_price, r.winner_id) == ref]
        if ref[3] and ref[3] not in {r.bidder_id for r in rows}:
            rows = [replace(r, winner_id="") for r in rows]
        out.extend(rows)

    if not out:
        raise EmptyDatasetError("no records survived preprocessing")
    if len(out) != n_in:
        log.info("preprocess dropped %d of %d records", n_in - len(out), n_in)
    return build_dataset(out)


def build_dataset(records: list[BidRecord]) -> CleanDataset:
    """Index already-clean, sorted records. No cleaning is performed."""
    grouped: dict[str, list[BidRecord]] = {}
    for r in records:
        grouped.setdefault(r.auction_id, []).append(r)
    index = {}
    for auction_id, rows in grouped.items():
        first = rows[0]
        index[auction_id] = AuctionSummary(
            auction_id=auction_id,
            seller_id=first.seller_id,
            n_bids=len(rows),
            bidders=frozenset(r.bidder_id for r in rows),
            start_price=first.start_price,
            duration=first.duration,
            winner_id=first.winner_id,
        )
    n = len(index)
    return CleanDataset(
        records=tuple(records),
        auction_index=MappingProxyType(index),
        mean_bids_per_auction=len(records) / n,
        mean_start_price=sum(a.start_price for a in index.values()) / n,
    )


def format_number(x: float) -> str:
    """Shortest round-tripping text for a float; integral values print bare."""
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def write_bids_csv(path: str | Path, records: Iterable[BidRecord]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BID_COLUMNS)
        for r in records:
            w.writerow([
                r.auction_id,
                r.bidder_id,
                r.seller_id,
                format_number(r.bid_amount),
                format_number(r.bid_time),
                format_number(r.duration),
                "seconds",
                format_number(r.start_price),
                r.winner_id,
            ])
