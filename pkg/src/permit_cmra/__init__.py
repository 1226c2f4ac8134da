"""Combinatorial multi-round ascending auction for correlated pollution permits.

Agents with correlated abatement costs (abating greenhouse gas co-abates some
nutrient runoff) bid on bundles of escape permits while per-unit clock prices
rise on over-demanded goods; each round the auctioneer searches for the
revenue-maximizing allocation over every bid placed so far.

Typical use::

    from permit_cmra import parse_config, run_auction

    result = run_auction(parse_config("configs/default.json"))
    print(result.allocation.bundles, result.allocation.revenue)
"""

from .bidding import BidBook, ClockPrice, additional_bids, excess_demand, headline_demand, update_bid_book
from .clearing import Allocation, AllocationEntry, check_exclusion, find_max_allocation, try_close
from .cost_model import (
    CostModel,
    CostParams,
    GoodSpec,
    InputError,
    combined_cost,
    per_good_cost,
    sample_instance,
    utility,
)
from .engine import (
    AuctionConfig,
    AuctionResult,
    ConfigError,
    assert_result_invariants,
    round_bound,
    run_auction,
)
from .experiments import BatchConfig, BatchSummary, run_batch, transaction_price, transaction_proportion
from .io import parse_config, write_plotdata, write_results

__all__ = [
    "Allocation",
    "AllocationEntry",
    "AuctionConfig",
    "AuctionResult",
    "BatchConfig",
    "BatchSummary",
    "BidBook",
    "ClockPrice",
    "ConfigError",
    "CostModel",
    "CostParams",
    "GoodSpec",
    "InputError",
    "additional_bids",
    "assert_result_invariants",
    "check_exclusion",
    "combined_cost",
    "excess_demand",
    "find_max_allocation",
    "headline_demand",
    "parse_config",
    "per_good_cost",
    "round_bound",
    "run_auction",
    "run_batch",
    "sample_instance",
    "transaction_price",
    "transaction_proportion",
    "try_close",
    "update_bid_book",
    "utility",
    "write_plotdata",
    "write_results",
]
