"""Command-line entry point: validate, simulate, sweep, compare.

Exit codes: 0 success, 1 invalid config, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

from .config import ConfigError, build_scenario, load_config
from .domain import validate_topology
from .engine import run
from .experiments import compare_baseline, sweep
from .report import emit_csv

log = logging.getLogger("fogfed")


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _param(text: str):
    name, sep, vals = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected NAME=V1,V2,...")
    return name.strip(), [v.strip() for v in vals.split(",") if v.strip()]


def _budget(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fogfed", description="Federated fog computing simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="parse a scenario and check its topology")
    v.add_argument("--config", required=True)

    s = sub.add_parser("simulate", help="run one scenario and write CSVs")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)

    w = sub.add_parser("sweep", help="cross product of parameter values and seeds")
    w.add_argument("--config", required=True)
    w.add_argument("--param", required=True, type=_param, help="NAME=V1,V2,... (interarrival, devices, locations)")
    w.add_argument("--seeds", required=True, type=_ints)
    w.add_argument("--out", required=True)
    w.add_argument("--jobs", type=int, default=1)

    c = sub.add_parser("compare", help="supported users, federated vs a non-federated baseline")
    c.add_argument("--config", required=True)
    c.add_argument("--budget", required=True, type=_budget, help="p95 latency budget, s")
    c.add_argument("--seeds", required=True, type=_ints)
    c.add_argument("--out", required=True)
    c.add_argument("--max-devices", type=int)
    c.add_argument("--baseline", choices=["single", "isolated"], default="single",
                   help="single: all load at one location; isolated: each location alone")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        scenario = build_scenario(cfg, getattr(args, "seed", None))
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "validate":
            problems = validate_topology(scenario.topology)
            if problems:
                for msg in problems:
                    print(msg, file=sys.stderr)
                return 1
            t = scenario.topology
            print(f"ok: {len(t.locations)} locations, {len(t.fog_nodes)} fog nodes, {len(t.brokers)} brokers, "
                  f"{len(t.access_points)} access points, {len(t.devices)} devices, {cfg.run.duration:g} s")
        elif args.command == "simulate":
            rep = run(scenario, args.seed)
            emit_csv(rep, args.out)
            sm = rep.summary
            print(f"generated={sm.generated} completed={sm.completed} dropped={sm.dropped} "
                  f"p95_latency_s={sm.p95_latency_s:.4f} total_energy_j={sm.total_energy_j:.1f}")
        elif args.command == "sweep":
            name, values = args.param
            res = sweep(cfg, name, values, args.seeds, args.out, args.jobs)
            print(f"{len(res.rows)} runs written to {args.out}")
        elif args.command == "compare":
            rep = compare_baseline(cfg, args.budget, args.seeds, args.out, args.max_devices, args.baseline)
            for r in rep.rows:
                print(f"seed={r.seed} federated={r.federated} single={r.single}")
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.debug("run failed", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
