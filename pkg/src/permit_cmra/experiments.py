"""Seeded batches of auctions and the two market metrics.

Transaction proportion is the share of each permit cap that was sold.
Transaction price is a winner's payment divided by the permit units it
received, in money units per permit.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from statistics import fmean
from typing import Sequence

from .cost_model import Bundle, GoodSpec
from .engine import AuctionConfig, AuctionResult, ConfigError, run_auction
from .money import MINOR_PER_UNIT

log = logging.getLogger(__name__)


def transaction_proportion(result: AuctionResult, goods: Sequence[GoodSpec]) -> tuple[float | None, ...]:
    """Fraction of each good's cap that was allocated; None where the cap is 0."""
    sold = [0] * len(goods)
    for e in result.allocation.per_bidder:
        for j, q in enumerate(e.bundle):
            sold[j] += q
    return tuple(None if g.cap == 0 else s / g.cap for s, g in zip(sold, goods))


def transaction_price(result: AuctionResult, bidder_id: int) -> float | None:
    """Payment per permit unit for one bidder; None if it won nothing."""
    entry = next(e for e in result.allocation.per_bidder if e.bidder_id == bidder_id)
    units = sum(entry.bundle)
    if units == 0:
        return None
    return entry.payment / MINOR_PER_UNIT / units


@dataclass(frozen=True)
class BatchConfig:
    base: AuctionConfig
    instances: int = 50
    master_seed: int = 0

    def __post_init__(self):
        if self.instances < 1:
            raise ConfigError(f"instances: must be >= 1, got {self.instances}")

    def seeds(self) -> list[int]:
        """Instance ``k`` runs with seed ``master_seed + k``."""
        return [self.master_seed + k for k in range(self.instances)]


@dataclass(frozen=True)
class InstanceRow:
    seed: int
    terminated_by: str
    rounds: int
    proportions: tuple[float | None, ...]
    prices: tuple[float | None, ...]
    bundles: tuple[Bundle, ...]
    payments: tuple[int, ...]


@dataclass(frozen=True)
class BatchSummary:
    goods: tuple[GoodSpec, ...]
    per_instance: tuple[InstanceRow, ...]
    proportion_mean: tuple[float | None, ...]
    proportion_min: tuple[float | None, ...]
    proportion_max: tuple[float | None, ...]
    unsold_fraction: tuple[float | None, ...]
    price_mean: tuple[float | None, ...]
    price_count: tuple[int, ...]
    round_limit_count: int

    @property
    def closed_rows(self) -> list[InstanceRow]:
        return [r for r in self.per_instance if r.terminated_by == "closed"]


def instance_row(result: AuctionResult, config: AuctionConfig) -> InstanceRow:
    alloc = result.allocation
    return InstanceRow(
        seed=config.seed,
        terminated_by=result.terminated_by,
        rounds=len(result.rounds),
        proportions=transaction_proportion(result, config.goods),
        prices=tuple(transaction_price(result, i) for i in range(len(config.bidders))),
        bundles=tuple(e.bundle for e in alloc.per_bidder),
        payments=tuple(e.payment for e in alloc.per_bidder),
    )


def _run_one(config: AuctionConfig) -> InstanceRow:
    return instance_row(run_auction(config), config)


def _stat(values: list[float], fn) -> float | None:
    return fn(values) if values else None


def summarize(goods: Sequence[GoodSpec], rows: Sequence[InstanceRow], n_bidders: int) -> BatchSummary:
    """Aggregate instance rows; round-limited instances are left out of every statistic."""
    rows = tuple(sorted(rows, key=lambda r: r.seed))
    closed = [r for r in rows if r.terminated_by == "closed"]
    failed = len(rows) - len(closed)
    if failed:
        log.warning("%d of %d instances hit the round limit and are excluded", failed, len(rows))

    def per_good(fn):
        out = []
        for j in range(len(goods)):
            vals = [r.proportions[j] for r in closed if r.proportions[j] is not None]
            out.append(_stat(vals, fn))
        return tuple(out)

    mean = per_good(fmean)
    prices = [[r.prices[i] for r in closed if r.prices[i] is not None] for i in range(n_bidders)]
    return BatchSummary(
        goods=tuple(goods),
        per_instance=rows,
        proportion_mean=mean,
        proportion_min=per_good(min),
        proportion_max=per_good(max),
        unsold_fraction=tuple(None if p is None else 1.0 - p for p in mean),
        price_mean=tuple(_stat(p, fmean) for p in prices),
        price_count=tuple(len(p) for p in prices),
        round_limit_count=failed,
    )


def run_batch(config: BatchConfig, workers: int | None = None) -> BatchSummary:
    """Run ``config.instances`` auctions with fresh cost noise each.

    With ``workers`` > 1 instances run in a process pool; output is the
    same as a sequential run.
    """
    configs = [replace(config.base, seed=s) for s in config.seeds()]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, configs))
    else:
        rows = [_run_one(c) for c in configs]
    return summarize(config.base.goods, rows, len(config.base.bidders))


def mean_gap(summary: BatchSummary, high: int, low: int) -> float:
    """Relative excess of bidder ``high``'s mean price over bidder ``low``'s."""
    a, b = summary.price_mean[high], summary.price_mean[low]
    if a is None or b is None or b == 0:
        return math.nan
    return (a - b) / b
