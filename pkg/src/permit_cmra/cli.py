"""Command line: ``permit-cmra {run,batch,check,plotdata}``.

Exit codes: 0 success, 1 validation error, 2 runtime failure, 3 round limit reached.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .engine import AuctionConfig, ConfigError, run_auction
from .experiments import BatchConfig, run_batch
from .io import parse_config, write_plotdata, write_results

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_ROUND_LIMIT = 0, 1, 2, 3

log = logging.getLogger("permit_cmra")


def _as_auction(cfg: AuctionConfig | BatchConfig) -> AuctionConfig:
    return cfg.base if isinstance(cfg, BatchConfig) else cfg


def _as_batch(cfg: AuctionConfig | BatchConfig, instances: int | None, seed: int | None) -> BatchConfig:
    batch = cfg if isinstance(cfg, BatchConfig) else BatchConfig(cfg)
    if instances is not None:
        batch = replace(batch, instances=instances)
    if seed is not None:
        batch = replace(batch, master_seed=seed)
    return batch


def cmd_run(args) -> int:
    config = _as_auction(parse_config(args.config))
    result = run_auction(config)
    write_results(result, args.out, config)
    print(f"{result.terminated_by} after {len(result.rounds)} rounds, revenue {result.allocation.revenue} (minor units)")
    return EXIT_OK if result.closed else EXIT_ROUND_LIMIT


def cmd_batch(args) -> int:
    config = _as_batch(parse_config(args.config), args.instances, args.seed)
    summary = run_batch(config, workers=args.workers)
    write_results(summary, args.out, config)
    print(
        f"{len(summary.per_instance)} instances, {summary.round_limit_count} hit the round limit; "
        f"mean proportion {summary.proportion_mean}, mean price {summary.price_mean}"
    )
    return EXIT_ROUND_LIMIT if summary.round_limit_count else EXIT_OK


def cmd_check(args) -> int:
    cfg = parse_config(args.config)
    kind = "batch" if isinstance(cfg, BatchConfig) else "auction"
    print(f"{args.config}: valid {kind} config")
    return EXIT_OK


def cmd_plotdata(args) -> int:
    for name in write_plotdata(args.summary, args.out):
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permit-cmra", description="Multi-pollutant permit CMRA simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a single auction")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="run seeded auction instances and compute metrics")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--instances", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("check", help="validate a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("plotdata", help="emit figure tables from a stored summary.json")
    p.add_argument("--summary", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:  # noqa: BLE001
        log.exception("run failed")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
