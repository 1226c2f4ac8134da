"""Closing rule: revenue-maximal choice of one booked bid per bidder.

Winner determination is an exhaustive search over the product of each
bidder's booked bundles, pruning partial selections that already break a
cap. One round costs O(K**n) with K booked bundles per bidder (at most
``prod(cap_j + 1)``), so it is meant for desk-scale instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bidding import NO_BID, BidBook, excess_demand
from .cost_model import Bundle, GoodSpec, caps_of


@dataclass(frozen=True)
class AllocationEntry:
    bidder_id: int
    bundle: Bundle
    payment: int


@dataclass(frozen=True)
class Allocation:
    per_bidder: tuple[AllocationEntry, ...]

    @property
    def revenue(self) -> int:
        return sum(e.payment for e in self.per_bidder)

    @property
    def bundles(self) -> list[Bundle]:
        return [e.bundle for e in self.per_bidder]

    def totals(self) -> tuple[int, ...]:
        if not self.per_bidder:
            return ()
        return tuple(int(v) for v in np.sum(self.bundles, axis=0))

    @classmethod
    def empty(cls, n_bidders: int, n_goods: int) -> "Allocation":
        zero = (0,) * n_goods
        return cls(tuple(AllocationEntry(i, zero, 0) for i in range(n_bidders)))


@dataclass(frozen=True)
class ClearingOutcome:
    best: Allocation
    exclusion_ok: bool
    excluded_revenues: tuple[int, ...]


def _booked(book: BidBook) -> tuple[np.ndarray, np.ndarray]:
    idx = np.argwhere(book.prices != NO_BID)  # lexicographic order
    return idx.astype(np.int64), book.prices[tuple(idx.T)].astype(np.int64)


def find_max_allocation(books: Sequence[BidBook], goods: Sequence[GoodSpec]) -> Allocation:
    """Revenue-maximal selection of one booked bundle per bidder within caps.

    Among revenue ties the allocation whose concatenated bundle vector
    (bidder order) is lexicographically smallest wins.
    """
    caps = np.asarray(caps_of(goods), dtype=np.int64)
    m = len(caps)
    sums = np.zeros((1, m), dtype=np.int64)
    revenue = np.zeros(1, dtype=np.int64)
    chosen = np.zeros((1, 0), dtype=np.int64)  # concatenated bundles so far
    for book in books:
        qty, price = _booked(book)
        new_sums = (sums[:, None, :] + qty[None, :, :]).reshape(-1, m)
        keep = np.all(new_sums <= caps, axis=1)
        n_prev, k = len(sums), len(qty)
        prev_idx = np.repeat(np.arange(n_prev), k)[keep]
        cur_idx = np.tile(np.arange(k), n_prev)[keep]
        sums = new_sums[keep]
        revenue = revenue[prev_idx] + price[cur_idx]
        chosen = np.concatenate([chosen[prev_idx], qty[cur_idx]], axis=1)

    best = revenue == revenue.max()
    cand = chosen[best]
    pick = cand[np.lexsort(cand.T[::-1])[0]] if cand.shape[1] else cand[0]
    entries = []
    for i, book in enumerate(books):
        bundle = tuple(int(v) for v in pick[i * m:(i + 1) * m])
        entries.append(AllocationEntry(book.bidder_id, bundle, int(book.prices[bundle])))
    return Allocation(tuple(entries))


def _zero_only(book: BidBook) -> BidBook:
    return BidBook.empty(book.bidder_id, book.caps)


def check_exclusion(books: Sequence[BidBook], goods: Sequence[GoodSpec], best: Allocation) -> ClearingOutcome:
    """Revenue attainable with each bidder forced to the zero bundle, compared to ``best``."""
    excluded = []
    for i in range(len(books)):
        restricted = [(_zero_only(b) if j == i else b) for j, b in enumerate(books)]
        excluded.append(find_max_allocation(restricted, goods).revenue)
    ok = all(r <= best.revenue for r in excluded)
    return ClearingOutcome(best, ok, tuple(excluded))


def try_close(
    books: Sequence[BidBook],
    goods: Sequence[GoodSpec],
    headlines: Sequence[Sequence[int]] | None = None,
) -> Allocation | None:
    """Closing allocation, or None if another clock round is needed.

    The auction may only close when no good is over-demanded by the current
    headlines, and the revenue-maximal allocation passes the exclusion check.
    """
    if headlines is not None and excess_demand(headlines, goods):
        return None
    best = find_max_allocation(books, goods)
    if not check_exclusion(books, goods, best).exclusion_ok:
        return None
    return best
