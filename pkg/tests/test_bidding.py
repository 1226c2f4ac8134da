import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_headline, enumerate_bundles
from permit_cmra.bidding import (
    BidBook,
    ClockPrice,
    _merge_round,
    additional_bids,
    excess_demand,
    headline_demand,
    headline_offer,
    round_bids,
    update_bid_book,
)
from permit_cmra.cost_model import CostModel, CostParams, GoodSpec, InputError, utility


def lin_model(a, b=None, rho=0.0):
    return CostModel(0, CostParams(a, b or (0.0,) * len(a), rho, 0.0))


def goods(*caps):
    return tuple(GoodSpec(j, f"P{j}", "u", c) for j, c in enumerate(caps))


# headline demand


def test_headline_zero_when_prices_exceed_marginal_utility():
    m = lin_model((2.0, 5.0), (0.05, 0.1))
    assert headline_demand(m, ClockPrice((10_000, 10_000)), goods(5, 5)) == (0, 0)


def test_headline_single_good_linear():
    m = lin_model((10.0,))
    assert headline_demand(m, ClockPrice((400,)), goods(3)) == (3,)


def test_headline_two_goods_runoff_only():
    m = lin_model((2.0, 5.0))
    assert headline_demand(m, ClockPrice((300, 400)), goods(2, 2)) == (0, 2)


def test_headline_tie_prefers_smaller_total():
    # price equals marginal utility: every quantity has surplus 0
    m = lin_model((4.0,))
    assert headline_demand(m, ClockPrice((400,)), goods(3)) == (0,)


@settings(max_examples=100, deadline=None)
@given(
    st.tuples(st.floats(0, 10), st.floats(0, 10)),
    st.tuples(st.floats(0, 1), st.floats(0, 1)),
    st.sampled_from([0.0, 0.1, 0.5, 1.0]),
    st.tuples(st.integers(0, 1200), st.integers(0, 1200)),
    st.tuples(st.integers(0, 5), st.integers(0, 5)),
)
def test_headline_matches_brute_force(a, b, rho, prices, caps):
    m = CostModel(0, CostParams(a, b, rho))
    got = headline_demand(m, ClockPrice(prices), goods(*caps))
    assert got == brute_headline(lambda x: utility(m, x), prices, caps)
    surplus = utility(m, got) - ClockPrice(prices).value(got)
    assert surplus >= 0
    for y in enumerate_bundles(caps):
        assert surplus >= utility(m, y) - ClockPrice(prices).value(y)


@settings(max_examples=100, deadline=None)
@given(
    st.tuples(st.integers(0, 3), st.integers(0, 3)),
    st.tuples(st.integers(0, 900), st.integers(0, 900)),
    st.integers(0, 1),
    st.integers(1, 300),
)
def test_raising_price_never_raises_surplus(x, prices, j, bump):
    m = lin_model((2.0, 5.0), (0.05, 0.1), 0.5)
    higher = list(prices)
    higher[j] += bump
    before = utility(m, x) - ClockPrice(prices).value(x)
    after = utility(m, x) - ClockPrice(higher).value(x)
    assert after <= before


# additional bids


def test_additional_bids_zero_headline():
    assert additional_bids(lin_model((10.0, 1.0)), ClockPrice((400, 400)), (0, 0)) == []


def test_additional_bid_one_cent_below_clock():
    m = lin_model((10.0, 0.0))
    assert additional_bids(m, ClockPrice((400, 100)), (2, 0)) == [((1, 0), 399)]


def test_additional_bid_capped_at_utility():
    m = lin_model((2.0, 3.0))
    offers = dict(additional_bids(m, ClockPrice((500, 500)), (1, 1)))
    assert offers[(1, 0)] == 200
    assert offers[(0, 1)] == 300
    assert (1, 1) not in offers and (0, 0) not in offers


def test_additional_bids_drop_zero_prices():
    m = lin_model((2.0, 0.0))
    offers = dict(additional_bids(m, ClockPrice((500, 500)), (1, 2)))
    # bundles with no GHG have zero utility here
    assert set(offers) == {(1, 0), (1, 1)}


@settings(max_examples=100, deadline=None)
@given(
    st.tuples(st.floats(0, 10), st.floats(0, 10)),
    st.sampled_from([0.0, 0.1, 0.5]),
    st.tuples(st.integers(0, 1200), st.integers(0, 1200)),
)
def test_additional_bids_strictly_below_clock_and_at_most_utility(a, rho, prices):
    m = CostModel(0, CostParams(a, (0.05, 0.1), rho))
    price = ClockPrice(prices)
    h = headline_demand(m, price, goods(4, 4))
    for x, p in additional_bids(m, price, h):
        assert all(q <= hq for q, hq in zip(x, h)) and x != h and any(x)
        assert 0 < p < price.value(x)
        assert p <= utility(m, x)


def test_headline_offer_is_clock_value():
    m = lin_model((10.0,))
    assert headline_offer(m, ClockPrice((400,)), (3,)) == ((3,), 1200)


def test_round_bids_kinds():
    m = lin_model((10.0,))
    bids = round_bids(m, ClockPrice((400,), round=4), goods(3))
    assert bids[0].kind == "headline" and bids[0].bundle == (3,) and bids[0].price == 1200
    assert [(b.bundle, b.price) for b in bids[1:]] == [((1,), 399), ((2,), 799)]
    assert all(b.round == 4 for b in bids)


# bid books


def test_book_starts_with_zero_bundle():
    book = BidBook.empty(0, (2, 2))
    assert book.entries == {(0, 0): 0}


def test_update_empty_offers_identity():
    book = BidBook.from_entries(0, (2, 2), {(1, 0): 5})
    assert update_bid_book(book, [], 1).entries == book.entries


def test_update_keeps_max():
    book = BidBook.from_entries(0, (2, 2), {(1, 0): 5})
    assert update_bid_book(book, [((1, 0), 3)], 1).entries[(1, 0)] == 5
    assert update_bid_book(book, [((1, 0), 7)], 1).entries[(1, 0)] == 7
    # the original is untouched
    assert book.entries[(1, 0)] == 5


def test_update_rejects_bad_offers():
    book = BidBook.empty(0, (2, 2))
    with pytest.raises(InputError):
        update_bid_book(book, [((3, 0), 1)], 0)
    with pytest.raises(InputError):
        update_bid_book(book, [((0, 0), 1)], 0)


def test_dense_merge_matches_list_update():
    m = lin_model((2.0, 5.0), (0.05, 0.1), 0.5)
    caps = (4, 4)
    book = BidBook.from_entries(0, caps, {(1, 1): 10_000, (2, 0): 5})
    price = ClockPrice((150, 420), round=3)
    h = headline_demand(m, price, goods(*caps))
    offers = [headline_offer(m, price, h)] + additional_bids(m, price, h)
    assert _merge_round(book, m, price, h).entries == update_bid_book(book, offers, 3).entries


def test_books_monotone_over_rounds():
    m = lin_model((2.0, 5.0), (0.05, 0.1), 0.1)
    caps = (3, 3)
    book = BidBook.empty(0, caps)
    for r, p in enumerate(range(0, 900, 37)):
        price = ClockPrice((p // 2, p), r)
        new = _merge_round(book, m, price, headline_demand(m, price, goods(*caps)))
        for x, v in book.entries.items():
            assert new.entries[x] >= v
        for x, v in new.entries.items():
            assert v <= utility(m, x)
        book = new


# excess demand


def test_excess_demand_examples():
    assert excess_demand([(0, 0), (0, 0)], goods(2, 2)) == set()
    assert excess_demand([(2, 0), (1, 0)], goods(2, 2)) == {0}
    assert excess_demand([(1, 1), (1, 1)], goods(2, 2)) == set()
