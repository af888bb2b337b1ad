import csv

import pytest

from shillcure.ingestion import BID_COLUMNS, BidRecord

HEADER = list(BID_COLUMNS)


def bid(auction="1", bidder="A", amount=10.0, t=0.0, duration=86400.0, seller="S", start=1.0, winner=""):
    return BidRecord(auction, bidder, seller, float(amount), float(t), float(duration), float(start), winner)


def write_rows(path, rows, header=HEADER):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header is not None:
            w.writerow(header)
        w.writerows(rows)
    return path


@pytest.fixture
def bid_factory():
    return bid


@pytest.fixture
def csv_writer():
    return write_rows


def independent_self_outbid_runs(log):
    """Longest run of consecutive bids by one bidder inside one auction.

    Works on raw rows so it shares no code with the feature module.
    """
    longest = {}
    by_auction = {}
    for r in log:
        by_auction.setdefault(r.auction_id, []).append(r)
    for bids in by_auction.values():
        bids.sort(key=lambda r: (r.bid_time, r.bid_amount))
        prev, run = None, 0
        for r in bids:
            run = run + 1 if r.bidder_id == prev else 1
            prev = r.bidder_id
            longest[r.bidder_id] = max(longest.get(r.bidder_id, 0), run)
    return longest
