"""Correlated abatement costs and the permit utilities they induce.

Each bidder abates pollutant ``j`` at a convex quadratic cost
``a_j * x + b_j * x**2``. Abating GHG (good 0) co-abates ``floor(rho * g)``
units of nutrient runoff (good 1) at no extra charge, so the combined cost
of a reduction vector is at most the sum of the independent costs.

A permit bundle is valued at exactly the abatement cost it lets the bidder
avoid, so :func:`utility` is :func:`combined_cost` evaluated on the bundle.
All costs are integer minor units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from functools import lru_cache
from typing import Sequence

import numpy as np

from .money import MINOR_PER_UNIT, to_decimal


class InputError(ValueError):
    """Raised for out-of-range goods, negative amounts or malformed bundles."""


Bundle = tuple[int, ...]


@dataclass(frozen=True)
class GoodSpec:
    """One auctioned permit good: a pollutant with a permit cap."""

    good_id: int
    pollutant_name: str
    unit_label: str
    cap: int

    def __post_init__(self):
        if self.good_id < 0:
            raise InputError(f"good_id must be >= 0, got {self.good_id}")
        if self.cap < 0:
            raise InputError(f"cap must be >= 0, got {self.cap}")


def validate_goods(goods: Sequence[GoodSpec]) -> None:
    """Check good ids are distinct and contiguous from 0, in order."""
    ids = [g.good_id for g in goods]
    if not ids:
        raise InputError("at least one good is required")
    seen = set()
    for pos, gid in enumerate(ids):
        if gid in seen:
            raise InputError(f"duplicate good_id {gid}")
        seen.add(gid)
        if gid != pos:
            raise InputError(f"good ids must be contiguous from 0 in order; goods[{pos}] has good_id {gid}")


def caps_of(goods: Sequence[GoodSpec]) -> tuple[int, ...]:
    return tuple(g.cap for g in goods)


@dataclass(frozen=True)
class CostParams:
    """Cost coefficients for one bidder.

    Attributes:
        linear_coeff: ``a_j`` per good, money per unit.
        quad_coeff: ``b_j`` per good, money per unit squared.
        correlation: runoff units co-abated per unit of GHG abated, in [0, 1].
        noise_sigma: relative std-dev of the per-instance coefficient noise.
    """

    linear_coeff: tuple[float, ...]
    quad_coeff: tuple[float, ...]
    correlation: float = 0.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "linear_coeff", tuple(float(a) for a in self.linear_coeff))
        object.__setattr__(self, "quad_coeff", tuple(float(b) for b in self.quad_coeff))
        if len(self.linear_coeff) != len(self.quad_coeff):
            raise InputError("linear_coeff and quad_coeff must have the same length")
        if not self.linear_coeff:
            raise InputError("cost parameters need at least one good")
        if any(not math.isfinite(a) or a < 0 for a in self.linear_coeff):
            raise InputError(f"linear_coeff must be finite and >= 0, got {self.linear_coeff}")
        if any(not math.isfinite(b) or b < 0 for b in self.quad_coeff):
            raise InputError(f"quad_coeff must be finite and >= 0, got {self.quad_coeff}")
        if not 0.0 <= self.correlation <= 1.0:
            raise InputError(f"correlation must lie in [0, 1], got {self.correlation}")
        if not math.isfinite(self.noise_sigma) or self.noise_sigma < 0:
            raise InputError(f"noise_sigma must be >= 0, got {self.noise_sigma}")

    @property
    def n_goods(self) -> int:
        return len(self.linear_coeff)


@dataclass(frozen=True)
class CostModel:
    bidder_id: int
    params: CostParams = field(repr=True)

    @property
    def n_goods(self) -> int:
        return self.params.n_goods


def per_good_cost(model: CostModel, good_id: int, amount: int) -> int:
    """Cost in minor units of abating ``amount`` units of one pollutant alone."""
    if not 0 <= good_id < model.n_goods:
        raise InputError(f"unknown good_id {good_id} (model has {model.n_goods} goods)")
    if amount < 0:
        raise InputError(f"amount must be >= 0, got {amount}")
    return _per_good_cost(model.params.linear_coeff[good_id], model.params.quad_coeff[good_id], int(amount))


@lru_cache(maxsize=65536)
def _per_good_cost(a: float, b: float, amount: int) -> int:
    if amount == 0:
        return 0
    cost = to_decimal(a) * amount + to_decimal(b) * amount * amount
    return int((cost * MINOR_PER_UNIT).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def co_abated(correlation: float, ghg_units: int) -> int:
    """Runoff units removed for free by abating ``ghg_units`` of GHG."""
    return math.floor(to_decimal(correlation) * ghg_units)


def _check_bundle(model: CostModel, bundle: Sequence[int]) -> tuple[int, ...]:
    x = tuple(int(v) for v in bundle)
    if len(x) != model.n_goods:
        raise InputError(f"bundle has length {len(x)}, expected {model.n_goods}")
    if any(v < 0 for v in x):
        raise InputError(f"bundle quantities must be >= 0, got {x}")
    return x


def combined_cost(model: CostModel, reduction: Sequence[int]) -> int:
    """Joint abatement cost of a reduction vector, in minor units.

    Only good 0 co-abates good 1; any further goods are independent.
    """
    x = _check_bundle(model, reduction)
    total = per_good_cost(model, 0, x[0])
    if len(x) >= 2:
        residual = max(0, x[1] - co_abated(model.params.correlation, x[0]))
        total += per_good_cost(model, 1, residual)
    for j in range(2, len(x)):
        total += per_good_cost(model, j, x[j])
    return total


def uncorrelated_cost(model: CostModel, reduction: Sequence[int]) -> int:
    """Sum of the independent per-good costs (no co-abatement)."""
    x = _check_bundle(model, reduction)
    return sum(per_good_cost(model, j, v) for j, v in enumerate(x))


def utility(model: CostModel, bundle: Sequence[int]) -> int:
    """Value of a permit bundle: the abatement cost it avoids."""
    return combined_cost(model, bundle)


def utility_table(model: CostModel, caps: Sequence[int]) -> np.ndarray:
    """Utility of every bundle within ``caps`` as an int64 array of shape ``caps + 1``.

    The returned array is shared between calls; do not modify it.
    """
    caps = tuple(int(c) for c in caps)
    if len(caps) != model.n_goods:
        raise InputError(f"caps has length {len(caps)}, expected {model.n_goods}")
    return _utility_table(model.params, caps)


@lru_cache(maxsize=1024)
def _utility_table(params: CostParams, caps: tuple[int, ...]) -> np.ndarray:
    per_good = [
        np.array([_per_good_cost(a, b, x) for x in range(c + 1)], dtype=np.int64)
        for a, b, c in zip(params.linear_coeff, params.quad_coeff, caps)
    ]
    grids = np.indices(tuple(c + 1 for c in caps))
    table = per_good[0][grids[0]]
    if len(caps) >= 2:
        coab = np.array([co_abated(params.correlation, g) for g in range(caps[0] + 1)], dtype=np.int64)
        residual = np.maximum(0, grids[1] - coab[grids[0]])
        table = table + per_good[1][residual]
    for j in range(2, len(caps)):
        table = table + per_good[j][grids[j]]
    table = np.ascontiguousarray(table, dtype=np.int64)
    table.setflags(write=False)
    return table


def sample_instance(base: CostParams, seed: int | Sequence[int] | None) -> CostParams:
    """Perturb the cost coefficients with multiplicative Gaussian noise.

    Every ``a_j`` and ``b_j`` is scaled by ``max(0, 1 + N(0, sigma))``; draws
    are taken for all ``a`` first, then all ``b``. Correlation and sigma are
    kept. The same seed always yields the same parameters.
    """
    if base.noise_sigma == 0:
        return base
    rng = np.random.default_rng(seed)
    m = base.n_goods
    factors = np.maximum(0.0, 1.0 + rng.normal(0.0, base.noise_sigma, size=2 * m))
    return replace(
        base,
        linear_coeff=tuple(float(a * f) for a, f in zip(base.linear_coeff, factors[:m])),
        quad_coeff=tuple(float(b * f) for b, f in zip(base.quad_coeff, factors[m:])),
    )
