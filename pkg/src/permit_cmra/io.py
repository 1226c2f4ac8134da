"""JSON config parsing and deterministic result serialization.

Config file layout::

    {
      "goods":   [{"good_id": 0, "pollutant_name": "GHG", "unit_label": "kgCO2e", "cap": 10}, ...],
      "bidders": [{"correlation": 0.5, "linear_coeff": [...], "quad_coeff": [...], "noise_sigma": 0.1}, ...],
      "engine":  {"start_price": [0, 0], "delta": [1, 1], "max_rounds": 10000, "seed": 0},
      "batch":   {"instances": 50, "master_seed": 0}
    }

``engine`` is optional, and so are the cost coefficients of a bidder when
there are exactly two goods (the default calibration fills them in). A
``batch`` section turns the file into a batch config. Prices in ``engine``
are integer minor units; cost coefficients are money units.

CSV column orders (stable, consumed by plotting scripts):

* ``rounds.csv``: round, clock_<j>..., headline_<i>_<j>..., over_demanded_<j>..., closed
* ``allocation.csv``: bidder_id, qty_<j>..., payment
* ``instances.csv``: seed, terminated_by, rounds, proportion_<j>..., price_<i>...
* ``fig1_transaction_proportion.csv``: seed, good_id, pollutant_name, proportion
* ``fig2_transaction_price.csv``: seed, bidder_id, correlation, price
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .cost_model import CostParams, GoodSpec
from .engine import AuctionConfig, AuctionResult, ConfigError
from .experiments import BatchConfig, BatchSummary
from .money import CURRENCY_SCALE, MINOR_PER_UNIT

DEFAULT_LINEAR = (2.0, 5.0)
DEFAULT_QUAD = (0.05, 0.70)
DEFAULT_SIGMA = 0.1


def tool_version() -> str:
    try:
        return version("permit-cmra")
    except PackageNotFoundError:
        return "0+unknown"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=False)


class _Good(_Strict):
    good_id: int = Field(ge=0)
    pollutant_name: str
    unit_label: str
    cap: int = Field(ge=0)


class _Bidder(_Strict):
    correlation: float = Field(ge=0.0, le=1.0)
    linear_coeff: Optional[list[float]] = None
    quad_coeff: Optional[list[float]] = None
    noise_sigma: float = Field(default=DEFAULT_SIGMA, ge=0.0)


class _Engine(_Strict):
    start_price: Optional[list[int]] = None
    delta: Optional[list[int]] = None
    max_rounds: int = Field(default=10_000, ge=1)
    seed: int = 0


class _Batch(_Strict):
    instances: int = Field(default=50, ge=1)
    master_seed: int = 0


class _Config(_Strict):
    goods: list[_Good] = Field(min_length=1)
    bidders: list[_Bidder] = Field(min_length=1)
    engine: _Engine = Field(default_factory=_Engine)
    batch: Optional[_Batch] = None


def _loc(loc: tuple) -> str:
    out = ""
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def parse_config_dict(data: Any) -> AuctionConfig | BatchConfig:
    """Validate a decoded config document. Every error names its field."""
    try:
        raw = _Config.model_validate(data)
    except ValidationError as e:
        msgs = [f"{_loc(err['loc'])}: {err['msg']}" for err in e.errors()]
        raise ConfigError("; ".join(msgs)) from None

    seen: dict[int, int] = {}
    for pos, g in enumerate(raw.goods):
        if g.good_id in seen:
            raise ConfigError(f"goods[{pos}].good_id: duplicate good_id {g.good_id} (also goods[{seen[g.good_id]}])")
        seen[g.good_id] = pos
    for pos, g in enumerate(raw.goods):
        if g.good_id != pos:
            raise ConfigError(f"goods[{pos}].good_id: ids must be contiguous from 0 in order, got {g.good_id}")
    goods = tuple(GoodSpec(g.good_id, g.pollutant_name, g.unit_label, g.cap) for g in raw.goods)
    m = len(goods)

    bidders = []
    for i, b in enumerate(raw.bidders):
        coeffs = {}
        for name, default in (("linear_coeff", DEFAULT_LINEAR), ("quad_coeff", DEFAULT_QUAD)):
            value = getattr(b, name)
            if value is None:
                if m != len(default):
                    raise ConfigError(f"bidders[{i}].{name}: required when there are {m} goods")
                value = default
            if len(value) != m:
                raise ConfigError(f"bidders[{i}].{name}: expected {m} values, got {len(value)}")
            if any(v < 0 for v in value):
                raise ConfigError(f"bidders[{i}].{name}: coefficients must be >= 0")
            coeffs[name] = tuple(value)
        bidders.append(CostParams(coeffs["linear_coeff"], coeffs["quad_coeff"], b.correlation, b.noise_sigma))

    eng = raw.engine
    for name in ("start_price", "delta"):
        value = getattr(eng, name)
        if value is not None and len(value) != m:
            raise ConfigError(f"engine.{name}: expected {m} values, got {len(value)}")
    if eng.start_price is not None and any(p < 0 for p in eng.start_price):
        raise ConfigError("engine.start_price: prices must be >= 0")
    if eng.delta is not None and any(d <= 0 for d in eng.delta):
        raise ConfigError("engine.delta: increments must be > 0")
    base = AuctionConfig(
        goods,
        tuple(bidders),
        start_price=None if eng.start_price is None else tuple(eng.start_price),
        delta=None if eng.delta is None else tuple(eng.delta),
        max_rounds=eng.max_rounds,
        seed=eng.seed,
    )
    if raw.batch is None:
        return base
    return BatchConfig(base, raw.batch.instances, raw.batch.master_seed)


def parse_config(path: str | os.PathLike) -> AuctionConfig | BatchConfig:
    """Read and validate a JSON config file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except OSError as e:
        raise ConfigError(f"cannot read config file {p}: {e}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {p}: line {e.lineno} column {e.colno}: {e.msg}") from None
    return parse_config_dict(data)


def config_to_dict(config: AuctionConfig | BatchConfig) -> dict:
    """Fully explicit config document (all defaults filled in)."""
    base = config.base if isinstance(config, BatchConfig) else config
    doc = {
        "goods": [asdict(g) for g in base.goods],
        "bidders": [
            {
                "correlation": b.correlation,
                "linear_coeff": list(b.linear_coeff),
                "quad_coeff": list(b.quad_coeff),
                "noise_sigma": b.noise_sigma,
            }
            for b in base.bidders
        ],
        "engine": {
            "start_price": list(base.start_price),
            "delta": list(base.delta),
            "max_rounds": base.max_rounds,
            "seed": base.seed,
        },
    }
    if isinstance(config, BatchConfig):
        doc["batch"] = {"instances": config.instances, "master_seed": config.master_seed}
    return doc


def dumps(doc: Any) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def config_digest(config: AuctionConfig | BatchConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    config_digest: str
    tool_version: str
    timestamp: str
    outputs: tuple[str, ...]


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return now.strftime("%Y-%m-%dT%H:%M:%SZ")


def _money_header() -> dict:
    return {"currency_scale": CURRENCY_SCALE, "minor_per_unit": MINOR_PER_UNIT, "money_unit": "minor"}


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6f}"


def result_to_dict(result: AuctionResult, config: AuctionConfig) -> dict:
    return {
        **_money_header(),
        "config": config_to_dict(config),
        "terminated_by": result.terminated_by,
        "final_clock": {"round": result.final_clock.round, "per_unit": list(result.final_clock.per_unit)},
        "bidder_params": [
            {"correlation": p.correlation, "linear_coeff": list(p.linear_coeff), "quad_coeff": list(p.quad_coeff)}
            for p in result.bidder_params
        ],
        "allocation": {
            "revenue": result.allocation.revenue,
            "per_bidder": [
                {"bidder_id": e.bidder_id, "bundle": list(e.bundle), "payment": e.payment}
                for e in result.allocation.per_bidder
            ],
        },
        "rounds": [
            {
                "round": r.round,
                "clock": list(r.clock.per_unit),
                "headlines": [list(h) for h in r.headlines],
                "additional_count": list(r.additional_count),
                "over_demanded": sorted(r.over_demanded),
                "closed": r.closed,
            }
            for r in result.rounds
        ],
        "books": [
            {
                "bidder_id": b.bidder_id,
                "entries": [{"bundle": list(k), "price": v} for k, v in sorted(b.entries.items())],
            }
            for b in result.books
        ],
    }


def summary_to_dict(summary: BatchSummary, config: BatchConfig) -> dict:
    return {
        **_money_header(),
        "price_unit": "money per permit unit",
        "config": config_to_dict(config),
        "aggregates": {
            "proportion_mean": list(summary.proportion_mean),
            "proportion_min": list(summary.proportion_min),
            "proportion_max": list(summary.proportion_max),
            "unsold_fraction": list(summary.unsold_fraction),
            "price_mean": list(summary.price_mean),
            "price_count": list(summary.price_count),
            "round_limit_count": summary.round_limit_count,
        },
        "per_instance": [
            {
                "seed": r.seed,
                "terminated_by": r.terminated_by,
                "rounds": r.rounds,
                "proportions": list(r.proportions),
                "prices": list(r.prices),
                "bundles": [list(b) for b in r.bundles],
                "payments": list(r.payments),
            }
            for r in summary.per_instance
        ],
    }


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_auction(result: AuctionResult, config: AuctionConfig, out: Path) -> list[str]:
    m, n = len(config.goods), len(config.bidders)
    (out / "result.json").write_text(dumps(result_to_dict(result, config)), encoding="utf-8")
    header = (
        ["round"]
        + [f"clock_{j}" for j in range(m)]
        + [f"headline_{i}_{j}" for i in range(n) for j in range(m)]
        + [f"over_demanded_{j}" for j in range(m)]
        + ["closed"]
    )
    rows = [
        [r.round, *r.clock.per_unit, *(q for h in r.headlines for q in h)]
        + [int(j in r.over_demanded) for j in range(m)]
        + [int(r.closed)]
        for r in result.rounds
    ]
    _write_csv(out / "rounds.csv", header, rows)
    _write_csv(
        out / "allocation.csv",
        ["bidder_id", *(f"qty_{j}" for j in range(m)), "payment"],
        [[e.bidder_id, *e.bundle, e.payment] for e in result.allocation.per_bidder],
    )
    return ["result.json", "rounds.csv", "allocation.csv"]


def _write_batch(summary: BatchSummary, config: BatchConfig, out: Path) -> list[str]:
    m, n = len(config.base.goods), len(config.base.bidders)
    (out / "summary.json").write_text(dumps(summary_to_dict(summary, config)), encoding="utf-8")
    _write_csv(
        out / "instances.csv",
        ["seed", "terminated_by", "rounds", *(f"proportion_{j}" for j in range(m)), *(f"price_{i}" for i in range(n))],
        [
            [r.seed, r.terminated_by, r.rounds, *map(_fmt, r.proportions), *map(_fmt, r.prices)]
            for r in summary.per_instance
        ],
    )
    return ["summary.json", "instances.csv"]


def write_results(
    result: AuctionResult | BatchSummary,
    out_dir: str | os.PathLike,
    config: AuctionConfig | BatchConfig,
) -> RunManifest:
    """Write JSON, CSV tables and ``manifest.json`` into ``out_dir``.

    Everything except the manifest timestamp is a pure function of the inputs.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(result, BatchSummary):
        if not isinstance(config, BatchConfig):
            raise TypeError("a BatchSummary needs its BatchConfig")
        files = _write_batch(result, config, out)
    else:
        base = config.base if isinstance(config, BatchConfig) else config
        files = _write_auction(result, base, out)
    manifest = RunManifest(config_digest(config), tool_version(), _timestamp(), tuple(files))
    (out / "manifest.json").write_text(
        dumps({**asdict(manifest), "outputs": list(manifest.outputs)}), encoding="utf-8"
    )
    return manifest


def write_plotdata(summary_path: str | os.PathLike, out_dir: str | os.PathLike) -> list[str]:
    """Per-instance scatter tables for the proportion and price figures."""
    doc = json.loads(Path(summary_path).read_text(encoding="utf-8"))
    goods = doc["config"]["goods"]
    bidders = doc["config"]["bidders"]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = sorted(doc["per_instance"], key=lambda r: r["seed"])
    _write_csv(
        out / "fig1_transaction_proportion.csv",
        ["seed", "good_id", "pollutant_name", "proportion"],
        [
            [r["seed"], g["good_id"], g["pollutant_name"], _fmt(r["proportions"][j])]
            for r in rows
            if r["terminated_by"] == "closed"
            for j, g in enumerate(goods)
        ],
    )
    _write_csv(
        out / "fig2_transaction_price.csv",
        ["seed", "bidder_id", "correlation", "price"],
        [
            [r["seed"], i, f"{b['correlation']:g}", _fmt(r["prices"][i])]
            for r in rows
            if r["terminated_by"] == "closed"
            for i, b in enumerate(bidders)
            if r["prices"][i] is not None
        ],
    )
    return ["fig1_transaction_proportion.csv", "fig2_transaction_price.csv"]
