"""``prism-sim``: run one scenario or a seeded batch from the command line.

Every flag can also come from an environment variable (``--time-limit`` reads
``PRISM_TIME_LIMIT``, and so on); an explicit flag wins.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .harness import PROTOCOL_ALIASES, SOLVERS, RunConfig, run_batch

_ENV_PREFIX = "PRISM_"


def _env(name: str, default=None):
    return os.environ.get(_ENV_PREFIX + name.upper().replace("-", "_"), default)


def parse_range(text: str) -> float | None:
    if text.strip().lower() == "min":
        return None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must be 'min' or a fraction, got {text!r}") from None
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError("range fraction must lie in (0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prism-sim", description=__doc__.splitlines()[0])
    p.add_argument("--map", default=_env("map", "random-32-32-20"),
                   help="MovingAI .map file, or random-W-H-PCT / maze-W-H-CORRIDOR")
    p.add_argument("--scen", default=_env("scen"), help="MovingAI .scen file (default: sample tasks from the seed)")
    p.add_argument("--solver", choices=SOLVERS, default=_env("solver", "prism"))
    p.add_argument("--protocol", choices=("prox", "los", "full"), default=_env("protocol", "prox"))
    p.add_argument("--range", dest="range_fraction", type=parse_range, default=_env("range", "min"),
                   help="proximity diameter as a fraction of the longer map side, or 'min'")
    p.add_argument("--agents", type=int, default=int(_env("agents", 4)))
    p.add_argument("--tasks", type=int, default=int(_env("tasks", 8)))
    p.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    p.add_argument("--time-limit", type=float, default=float(_env("time-limit", 120.0)))
    p.add_argument("--out", default=_env("out"), help="directory for JSON results and CSV traces")
    p.add_argument("--count", type=int, default=int(_env("count", 1)),
                   help="number of scenarios, seeded SEED, SEED+1, ...")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.count < 0:
        parser.error("--count must be non-negative")
    try:
        config = RunConfig(
            map=args.map, scen=args.scen, solver=args.solver, protocol=PROTOCOL_ALIASES[args.protocol],
            range_fraction=args.range_fraction, agents=args.agents, tasks=args.tasks, seed=args.seed,
            time_limit=args.time_limit, out=args.out,
        )
    except ValueError as exc:
        parser.error(str(exc))
    report = run_batch(config, args.count)
    for row in report["rows"]:
        print(f"seed={row['seed']} status={row['status']} cost={row.get('sum_of_costs')} ticks={row.get('ticks')}")
    print(json.dumps(report["aggregate"], sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
