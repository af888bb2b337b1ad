import pytest
from hypothesis import given, settings, strategies as st

from conftest import bid, independent_self_outbid_runs
from shillcure.errors import DomainError, EmptyDatasetError, ParseError, SchemaError
from shillcure.ingestion import (
    convert_duration,
    parse_bids_csv,
    preprocess,
    write_bids_csv,
)
from shillcure.synthetic import SyntheticConfig, generate_synthetic


def row(auction="1", bidder="A", seller="S", amount="10", t="100", duration="1", unit="days", start="5", winner=""):
    return [auction, bidder, seller, amount, t, duration, unit, start, winner]


def test_parse_three_rows(tmp_path, csv_writer):
    path = csv_writer(tmp_path / "b.csv", [row(), row(bidder="B", amount="12"), row(bidder="A", amount="14")])
    recs = parse_bids_csv(path)
    assert len(recs) == 3
    assert recs[0].duration == 86400
    assert [r.bid_amount for r in recs] == [10, 12, 14]


def test_parse_keeps_empty_bidder_for_preprocess(tmp_path, csv_writer):
    path = csv_writer(tmp_path / "b.csv", [row(), row(bidder="", amount="11"), row(bidder="B", amount="12")])
    recs = parse_bids_csv(path)
    assert len(recs) == 3 and recs[1].bidder_id == ""
    clean = preprocess(recs)
    assert len(clean.records) == 2
    assert all(r.bidder_id for r in clean.records)


def test_parse_bid_after_close_names_row(tmp_path, csv_writer):
    path = csv_writer(tmp_path / "b.csv", [row(), row(t="90000")])
    with pytest.raises(ParseError) as err:
        parse_bids_csv(path)
    assert err.value.row == 3
    assert "row 3" in str(err.value)


def test_parse_seconds_unit(tmp_path, csv_writer):
    path = csv_writer(tmp_path / "b.csv", [row(duration="259200", unit="seconds", t="259200")])
    assert parse_bids_csv(path)[0].duration == 259200


@pytest.mark.parametrize("bad", [
    row(amount="ten"),
    row(unit="hours"),
    row()[:-1],
    row(duration="0"),
    row(amount="-1"),
])
def test_parse_malformed_rows(tmp_path, csv_writer, bad):
    path = csv_writer(tmp_path / "b.csv", [row(), bad])
    with pytest.raises(ParseError) as err:
        parse_bids_csv(path)
    assert err.value.row == 3


def test_missing_header(tmp_path, csv_writer):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError):
        parse_bids_csv(empty)
    headless = csv_writer(tmp_path / "h.csv", [row()], header=None)
    with pytest.raises(SchemaError):
        parse_bids_csv(headless)


@pytest.mark.parametrize("days,seconds", [(1, 86400), (10, 864000), (7, 604800), (3, 259200), (5, 432000)])
def test_convert_duration(days, seconds):
    assert convert_duration(days) == seconds


@pytest.mark.parametrize("days", [0, -1, 2.5])
def test_convert_duration_rejects(days):
    with pytest.raises(DomainError):
        convert_duration(days)


def test_preprocess_dedupes_exact_duplicate():
    recs = [bid(bidder="A", amount=10, t=5), bid(bidder="A", amount=10, t=5), bid(bidder="B", amount=11, t=6)]
    clean = preprocess(recs)
    assert len(clean.records) == 2


def test_preprocess_drops_empty_bidder_only():
    recs = [bid(bidder="A", t=1), bid(bidder="", amount=11, t=2), bid(bidder="B", amount=12, t=3)]
    clean = preprocess(recs)
    assert [r.bidder_id for r in clean.records] == ["A", "B"]


def test_mean_bids_per_auction():
    recs = [bid(auction="1", bidder=f"b{i}", amount=10 + i, t=i) for i in range(3)]
    recs += [bid(auction="2", bidder=f"b{i}", amount=10 + i, t=i) for i in range(5)]
    clean = preprocess(recs)
    assert clean.mean_bids_per_auction == 4.0
    assert clean.auction_index["1"].n_bids == 3
    assert clean.auction_index["2"].n_bids == 5


def test_preprocess_stable_order_and_index():
    recs = [bid(auction="10", bidder="B", t=5), bid(auction="2", bidder="A", t=9), bid(auction="2", bidder="C", t=1)]
    clean = preprocess(recs)
    assert [(r.auction_id, r.bid_time) for r in clean.records] == [("2", 1), ("2", 9), ("10", 5)]
    assert set(clean.auction_index) == {"2", "10"}


def test_preprocess_majority_metadata_and_winner():
    recs = [
        bid(bidder="A", t=1, winner="A"),
        bid(bidder="B", t=2, amount=11, winner="A"),
        bid(bidder="C", t=3, amount=12, seller="OTHER", winner="A"),
    ]
    clean = preprocess(recs)
    assert {r.bidder_id for r in clean.records} == {"A", "B"}
    ghost = preprocess([bid(bidder="A", winner="Z")])
    assert ghost.auction_index["1"].winner_id == ""


def test_preprocess_empty_raises():
    with pytest.raises(EmptyDatasetError):
        preprocess([bid(bidder="")])
    with pytest.raises(EmptyDatasetError):
        preprocess([])


def _clean_invariants(clean):
    keys = [(r.auction_id, r.bidder_id, r.bid_time, r.bid_amount) for r in clean.records]
    assert len(keys) == len(set(keys))
    assert all(r.bidder_id for r in clean.records)
    assert {r.auction_id for r in clean.records} <= set(clean.auction_index)
    for r in clean.records:
        assert 0 <= r.bid_time <= r.duration


records_strategy = st.lists(
    st.builds(
        bid,
        auction=st.sampled_from(["1", "2", "3"]),
        bidder=st.sampled_from(["", "A", "B", "C"]),
        amount=st.integers(0, 5),
        t=st.integers(0, 5),
        seller=st.sampled_from(["S", "T"]),
        winner=st.sampled_from(["", "A", "Z"]),
    ),
    min_size=1,
    max_size=30,
)


@settings(max_examples=200, deadline=None)
@given(records_strategy)
def test_preprocess_properties(recs):
    try:
        clean = preprocess(recs)
    except EmptyDatasetError:
        assert not any(r.bidder_id for r in recs)
        return
    assert len(clean.records) <= len(recs)
    _clean_invariants(clean)
    # idempotent
    assert preprocess(clean.records) == clean
    # order of input does not matter
    assert preprocess(list(reversed(recs))).records == clean.records


def test_bid_csv_round_trip(tmp_path):
    ds = generate_synthetic(SyntheticConfig(n_auctions=15), seed=3)
    write_bids_csv(tmp_path / "b.csv", ds.records)
    again = preprocess(parse_bids_csv(tmp_path / "b.csv"))
    assert again == ds


def test_synthetic_deterministic_bytes(tmp_path):
    cfg = SyntheticConfig(n_auctions=30)
    write_bids_csv(tmp_path / "a.csv", generate_synthetic(cfg, seed=1).records)
    write_bids_csv(tmp_path / "b.csv", generate_synthetic(cfg, seed=1).records)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    write_bids_csv(tmp_path / "c.csv", generate_synthetic(cfg, seed=2).records)
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "c.csv").read_bytes()


def test_synthetic_duration_forcing():
    ds = generate_synthetic(SyntheticConfig(n_auctions=10, duration_mix={1: 1.0}), seed=4)
    assert ds.n_auctions == 10
    assert {r.duration for r in ds.records} == {86400}


@pytest.mark.parametrize("seed", range(10))
def test_synthetic_no_shill_means_no_self_outbid(seed):
    ds = generate_synthetic(SyntheticConfig(n_auctions=40, shill_fraction=0.0), seed=seed)
    runs = independent_self_outbid_runs(ds.records)
    assert max(runs.values()) < 2


def test_synthetic_shills_do_self_outbid():
    ds = generate_synthetic(SyntheticConfig(n_auctions=40, shill_fraction=1.0), seed=0)
    runs = independent_self_outbid_runs(ds.records)
    assert max(runs.values()) >= 3


@pytest.mark.parametrize("seed", range(5))
def test_synthetic_satisfies_clean_invariants(seed):
    _clean_invariants(generate_synthetic(SyntheticConfig(n_auctions=25), seed=seed))


def test_synthetic_rejects_zero_auctions():
    with pytest.raises(DomainError):
        generate_synthetic(SyntheticConfig(n_auctions=0), seed=0)
