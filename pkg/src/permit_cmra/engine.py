"""Multi-round clock loop and post-hoc invariant checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .bidding import BidBook, ClockPrice, _merge_round, excess_demand, headline_demand
from .clearing import Allocation, check_exclusion, find_max_allocation, try_close
from .cost_model import (
    Bundle,
    CostModel,
    CostParams,
    GoodSpec,
    InputError,
    caps_of,
    sample_instance,
    utility,
    utility_table,
    validate_goods,
)

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid auction or batch configuration."""


@dataclass(frozen=True)
class AuctionConfig:
    """One auction: goods, bidder cost parameters and clock settings.

    Prices (``start_price``, ``delta``) are minor units per permit unit.
    """

    goods: tuple[GoodSpec, ...]
    bidders: tuple[CostParams, ...]
    start_price: tuple[int, ...] | None = None
    delta: tuple[int, ...] | None = None
    max_rounds: int = 10_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "goods", tuple(self.goods))
        object.__setattr__(self, "bidders", tuple(self.bidders))
        m = len(self.goods)
        if self.start_price is None:
            object.__setattr__(self, "start_price", (0,) * m)
        if self.delta is None:
            object.__setattr__(self, "delta", (1,) * m)
        object.__setattr__(self, "start_price", tuple(int(p) for p in self.start_price))
        object.__setattr__(self, "delta", tuple(int(d) for d in self.delta))
        self.validate()

    def validate(self) -> None:
        try:
            validate_goods(self.goods)
        except InputError as e:
            raise ConfigError(f"goods: {e}") from None
        m = len(self.goods)
        if not self.bidders:
            raise ConfigError("bidders: at least one bidder is required")
        for i, b in enumerate(self.bidders):
            if b.n_goods != m:
                raise ConfigError(f"bidders[{i}]: has {b.n_goods} cost coefficients, expected {m}")
        if len(self.start_price) != m or any(p < 0 for p in self.start_price):
            raise ConfigError(f"start_price: need {m} values >= 0, got {self.start_price}")
        if len(self.delta) != m or any(d <= 0 for d in self.delta):
            raise ConfigError(f"delta: need {m} values > 0, got {self.delta}")
        if self.max_rounds < 1:
            raise ConfigError(f"max_rounds: must be >= 1, got {self.max_rounds}")

    @property
    def caps(self) -> tuple[int, ...]:
        return caps_of(self.goods)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    clock: ClockPrice
    headlines: tuple[Bundle, ...]
    additional_count: tuple[int, ...]
    over_demanded: frozenset[int]
    closed: bool


@dataclass(frozen=True)
class AuctionResult:
    allocation: Allocation
    final_clock: ClockPrice
    rounds: tuple[RoundRecord, ...]
    books: tuple[BidBook, ...]
    terminated_by: Literal["closed", "round_limit"]
    bidder_params: tuple[CostParams, ...] = field(default=())

    @property
    def closed(self) -> bool:
        return self.terminated_by == "closed"


def instance_models(config: AuctionConfig) -> list[CostModel]:
    """Noisy cost models for this auction; bidder ``i`` draws from seed ``[config.seed, i]``."""
    return [CostModel(i, sample_instance(p, [config.seed, i])) for i, p in enumerate(config.bidders)]


def run_auction(config: AuctionConfig) -> AuctionResult:
    """Run clock rounds until the closing rule accepts an allocation.

    Each round every bidder submits a headline demand plus additional bids,
    books are updated, and the auction closes if no good is over-demanded.
    Otherwise the clock rises by ``delta`` on each over-demanded good only.
    """
    config.validate()
    goods = config.goods
    caps = config.caps
    models = instance_models(config)
    books = [BidBook.empty(m.bidder_id, caps) for m in models]
    delta = np.asarray(config.delta, dtype=np.int64)
    per_unit = np.asarray(config.start_price, dtype=np.int64)
    records: list[RoundRecord] = []

    for rnd in range(config.max_rounds):
        clock = ClockPrice(tuple(int(p) for p in per_unit), rnd)
        headlines = [headline_demand(m, clock, goods) for m in models]
        new_books = [_merge_round(b, m, clock, h) for b, m, h in zip(books, models, headlines)]
        added = tuple(
            int(np.count_nonzero(nb.prices != ob.prices)) for nb, ob in zip(new_books, books)
        )
        books = new_books
        over = excess_demand(headlines, goods)
        allocation = None if over else try_close(books, goods, headlines)
        records.append(
            RoundRecord(rnd, clock, tuple(headlines), added, frozenset(over), allocation is not None)
        )
        if allocation is not None:
            return AuctionResult(
                allocation, clock, tuple(records), tuple(books), "closed", tuple(m.params for m in models)
            )
        for j in over:
            per_unit[j] += delta[j]

    log.warning("auction seed=%s hit max_rounds=%d without closing", config.seed, config.max_rounds)
    return AuctionResult(
        Allocation.empty(len(models), len(caps)),
        records[-1].clock,
        tuple(records),
        tuple(books),
        "round_limit",
        tuple(m.params for m in models),
    )


def max_marginal_utility(models: Sequence[CostModel], caps: Sequence[int]) -> tuple[int, ...]:
    """Largest one-unit utility gain per good over all bidders and bundles."""
    out = []
    for j in range(len(caps)):
        best = 0
        for m in models:
            table = utility_table(m, caps)
            if caps[j] > 0:
                best = max(best, int(np.diff(table, axis=j).max()))
        out.append(best)
    return tuple(out)


def round_bound(config: AuctionConfig) -> float:
    """Analytic bound on the index of the closing round.

    A good stops being demanded once its price reaches the largest marginal
    utility, and every non-final round raises at least one good.
    """
    mmu = max_marginal_utility(instance_models(config), config.caps)
    return sum(max(0.0, (u - s) / d) + 1 for u, s, d in zip(mmu, config.start_price, config.delta))


@dataclass
class CheckReport:
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, check: str, message: str) -> None:
        self.violations.append((check, message))

    def names(self) -> set[str]:
        return {c for c, _ in self.violations}


def assert_result_invariants(result: AuctionResult, config: AuctionConfig) -> CheckReport:
    """Re-verify an auction result from scratch; every failed check is reported."""
    report = CheckReport()
    caps = np.asarray(config.caps)
    models = instance_models(config)
    books = result.books
    alloc = result.allocation

    prev = None
    for rec in result.rounds:
        p = np.asarray(rec.clock.per_unit)
        if prev is not None:
            if np.any(p < prev[0]):
                report.add("clock_monotonicity", f"round {rec.round}: price fell from {tuple(prev[0])} to {tuple(p)}")
            raised = {j for j in range(len(p)) if p[j] > prev[0][j]}
            if raised != set(prev[1]):
                report.add(
                    "clock_monotonicity",
                    f"round {rec.round}: raised goods {sorted(raised)} != over-demanded {sorted(prev[1])}",
                )
        prev = (p, rec.over_demanded)
    if sum(r.closed for r in result.rounds) > (1 if result.closed else 0) or (
        result.closed and not result.rounds[-1].closed
    ):
        report.add("clock_monotonicity", "closed flag must be set exactly on the final record")

    if len(alloc.per_bidder) != len(models):
        report.add("one_bid_per_bidder", f"{len(alloc.per_bidder)} entries for {len(models)} bidders")

    if alloc.per_bidder and np.any(np.sum(alloc.bundles, axis=0) > caps):
        report.add("no_overselling", f"allocated {alloc.totals()} exceeds caps {tuple(caps)}")

    for e in alloc.per_bidder:
        booked = books[e.bidder_id].get(e.bundle) if e.bidder_id < len(books) else None
        if booked is None or booked != e.payment:
            report.add(
                "bid_provenance",
                f"bidder {e.bidder_id}: allocated {e.bundle} at {e.payment} but book holds {booked}",
            )
        if e.bidder_id < len(models) and e.payment > utility(models[e.bidder_id], e.bundle):
            report.add("truthfulness", f"bidder {e.bidder_id}: payment {e.payment} exceeds utility of {e.bundle}")

    for model, book in zip(models, books):
        excess = book.prices > utility_table(model, config.caps)
        if np.any(excess):
            report.add("truthfulness", f"bidder {model.bidder_id}: {int(excess.sum())} booked bids exceed utility")

    if result.closed:
        outcome = check_exclusion(books, config.goods, alloc)
        if not outcome.exclusion_ok:
            report.add("exclusion", f"excluded revenues {outcome.excluded_revenues} exceed {alloc.revenue}")
        best = find_max_allocation(books, config.goods)
        if best.revenue != alloc.revenue:
            report.add("exclusion", f"allocation revenue {alloc.revenue} is not the maximum {best.revenue}")
    elif any(e.payment or any(e.bundle) for e in alloc.per_bidder):
        report.add("round_limit", "round-limited result must carry the empty allocation")
    return report
