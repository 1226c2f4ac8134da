"""Truthful bidding at a clock price: headline demand, additional bids, bid books.

Quantities are integer permit units, prices integer minor units. A bidder's
headline demand is its surplus-maximizing bundle at the clock price. It may
also offer on every nonzero bundle below the headline (componentwise),
priced one minor unit under clock value and never above utility.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Literal, Sequence

import numpy as np

from .cost_model import Bundle, CostModel, GoodSpec, InputError, caps_of, utility_table

NO_BID = -1


@dataclass(frozen=True)
class ClockPrice:
    """Per-unit clock price of every good (minor units) in a given round."""

    per_unit: tuple[int, ...]
    round: int = 0

    def __post_init__(self):
        object.__setattr__(self, "per_unit", tuple(int(p) for p in self.per_unit))
        if any(p < 0 for p in self.per_unit):
            raise InputError(f"clock prices must be >= 0, got {self.per_unit}")

    def value(self, bundle: Sequence[int]) -> int:
        """Clock value of a bundle: sum of price times quantity."""
        return sum(p * q for p, q in zip(self.per_unit, bundle))


@dataclass(frozen=True)
class Bid:
    bidder_id: int
    bundle: Bundle
    price: int
    round: int
    kind: Literal["headline", "additional"]


@lru_cache(maxsize=256)
def bundle_grid(caps: tuple[int, ...]) -> np.ndarray:
    """All bundles within ``caps`` as a (K, m) array in lexicographic order."""
    shape = tuple(c + 1 for c in caps)
    grid = np.indices(shape).reshape(len(caps), -1).T.copy()
    grid.setflags(write=False)
    return grid


def _clock_values(price: ClockPrice, caps: tuple[int, ...]) -> np.ndarray:
    grid = bundle_grid(caps)
    return (grid @ np.asarray(price.per_unit, dtype=np.int64)).reshape(tuple(c + 1 for c in caps))


def headline_demand(model: CostModel, price: ClockPrice, goods: Sequence[GoodSpec]) -> Bundle:
    """Surplus-maximizing bundle within the caps.

    Ties go to the smallest total quantity, then the lexicographically
    smallest bundle.
    """
    caps = caps_of(goods)
    if len(price.per_unit) != len(caps):
        raise InputError("clock price and goods differ in length")
    surplus = (utility_table(model, caps) - _clock_values(price, caps)).ravel()
    grid = bundle_grid(caps)
    order = np.lexsort((np.arange(len(grid)), grid.sum(axis=1), -surplus))
    return tuple(int(v) for v in grid[order[0]])


def headline_offer(model: CostModel, price: ClockPrice, headline: Sequence[int]) -> tuple[Bundle, int]:
    """The headline bid: clock value of the headline, capped at its utility."""
    h = tuple(int(v) for v in headline)
    table = utility_table(model, h)
    return h, int(min(price.value(h), table[h]))


def _offer_grid(model: CostModel, price: ClockPrice, headline: Bundle) -> np.ndarray:
    """Additional-bid prices on the sub-grid ``[0, headline]``; NO_BID where none."""
    table = utility_table(model, headline)
    offers = np.minimum(table, _clock_values(price, headline) - 1)
    offers = np.where(offers > 0, offers, NO_BID)
    offers[headline] = NO_BID
    return offers


def additional_bids(model: CostModel, price: ClockPrice, headline: Sequence[int]) -> list[tuple[Bundle, int]]:
    """Offers on every nonzero bundle strictly below the headline.

    Each offer is ``min(utility(x), clock value(x) - 1)``; offers that come
    out at zero are dropped. Result is in lexicographic bundle order.
    """
    h = tuple(int(v) for v in headline)
    offers = _offer_grid(model, price, h)
    return [
        (tuple(int(v) for v in idx), int(offers[idx]))
        for idx in np.ndindex(*offers.shape)
        if offers[idx] != NO_BID
    ]


def round_bids(model: CostModel, price: ClockPrice, goods: Sequence[GoodSpec]) -> list[Bid]:
    """Headline bid followed by all additional bids for one bidder in one round."""
    h = headline_demand(model, price, goods)
    bids = [Bid(model.bidder_id, *headline_offer(model, price, h), price.round, "headline")]
    bids.extend(
        Bid(model.bidder_id, x, p, price.round, "additional") for x, p in additional_bids(model, price, h)
    )
    return bids


@dataclass(frozen=True)
class BidBook:
    """Best price a bidder has offered for each bundle so far.

    ``prices`` is a dense array over the whole bundle grid holding ``NO_BID``
    for bundles never bid on. The zero bundle always carries price 0.
    """

    bidder_id: int
    prices: np.ndarray
    round: int = -1

    @classmethod
    def empty(cls, bidder_id: int, caps: Sequence[int]) -> "BidBook":
        prices = np.full(tuple(int(c) + 1 for c in caps), NO_BID, dtype=np.int64)
        prices[(0,) * len(caps)] = 0
        prices.setflags(write=False)
        return cls(bidder_id, prices)

    @classmethod
    def from_entries(cls, bidder_id: int, caps: Sequence[int], entries: dict) -> "BidBook":
        book = cls.empty(bidder_id, caps)
        return update_bid_book(book, list(entries.items()), round=-1)

    @property
    def caps(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.prices.shape)

    @property
    def entries(self) -> dict[Bundle, int]:
        idx = np.argwhere(self.prices != NO_BID)
        return {tuple(int(v) for v in i): int(self.prices[tuple(i)]) for i in idx}

    def get(self, bundle: Sequence[int]) -> int | None:
        p = int(self.prices[tuple(bundle)])
        return None if p == NO_BID else p

    def __len__(self) -> int:
        return int(np.count_nonzero(self.prices != NO_BID))


def update_bid_book(book: BidBook, offers: Iterable[tuple[Sequence[int], int]], round: int) -> BidBook:
    """Return a new book where each offered bundle keeps the max of old and new price."""
    prices = book.prices.copy()
    caps = book.caps
    for bundle, price in offers:
        x = tuple(int(v) for v in bundle)
        if len(x) != len(caps) or any(not 0 <= v <= c for v, c in zip(x, caps)):
            raise InputError(f"bundle {x} outside caps {caps}")
        if price < 0:
            raise InputError(f"offer price must be >= 0, got {price}")
        if not any(x) and price != 0:
            raise InputError("the zero bundle can only be bid at price 0")
        prices[x] = max(int(prices[x]), int(price))
    prices.setflags(write=False)
    return BidBook(book.bidder_id, prices, round)


def _merge_round(book: BidBook, model: CostModel, price: ClockPrice, headline: Bundle) -> BidBook:
    """Dense equivalent of updating with the headline offer and all additional bids."""
    prices = book.prices.copy()
    sub = tuple(slice(0, h + 1) for h in headline)
    prices[sub] = np.maximum(prices[sub], _offer_grid(model, price, headline))
    _, hp = headline_offer(model, price, headline)
    prices[headline] = max(int(prices[headline]), hp)
    prices.setflags(write=False)
    return BidBook(book.bidder_id, prices, price.round)


def excess_demand(headlines: Sequence[Sequence[int]], goods: Sequence[GoodSpec]) -> set[int]:
    """Goods whose total headline demand exceeds the cap."""
    caps = caps_of(goods)
    if not headlines:
        return set()
    totals = np.sum(np.asarray(headlines, dtype=np.int64).reshape(len(headlines), len(caps)), axis=0)
    return {j for j, (t, c) in enumerate(zip(totals, caps)) if t > c}
