"""Parameter sweeps and the federated vs non-federated supported-users comparison."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .config import ScenarioConfig
from .engine import RunSummary, run
from .report import SUMMARY_COLUMNS, emit_csv, summary_row, write_table

# sweep name -> (section, key, type)
SWEEPABLE = {
    "interarrival": ("workload", "mean_interarrival", float),
    "mean_interarrival": ("workload", "mean_interarrival", float),
    "devices": ("workload", "devices", int),
    "locations": ("topology", "locations", int),
}


def apply_param(cfg: ScenarioConfig, name: str, value) -> ScenarioConfig:
    try:
        section, key, typ = SWEEPABLE[name]
    except KeyError:
        raise ValueError(f"unknown sweep parameter {name!r}; choose from {sorted(SWEEPABLE)}") from None
    return cfg.with_value(section, key, typ(value))


def _one(args):
    cfg, seed, out = args
    rep = run(cfg, seed)
    if out is not None:
        emit_csv(rep, out)
    return rep.summary


@dataclass
class SweepResult:
    parameter: str
    rows: list = field(default_factory=list)  # (value, seed, RunSummary)


def sweep(cfg: ScenarioConfig, parameter: str, values, seeds, out_dir=None, jobs: int = 1) -> SweepResult:
    """Run every (value, seed) pair independently; optionally write per-run CSVs and a combined summary."""
    values, seeds = list(values), list(seeds)
    if not values:
        raise ValueError("sweep needs at least one value")
    if not seeds:
        raise ValueError("sweep needs at least one seed")
    tasks = []
    for v in values:
        vcfg = apply_param(cfg, parameter, v)
        for s in seeds:
            out = os.path.join(out_dir, f"{parameter}={v}", f"seed={s}") if out_dir else None
            tasks.append((vcfg, s, out))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            summaries = list(pool.map(_one, tasks))
    else:
        summaries = [_one(t) for t in tasks]
    result = SweepResult(parameter)
    i = 0
    for v in values:
        for s in seeds:
            result.rows.append((v, s, summaries[i]))
            i += 1
    if out_dir:
        write_table(
            os.path.join(out_dir, "summary.csv"),
            ["parameter", "value"] + SUMMARY_COLUMNS,
            [[parameter, v] + summary_row(sm) for v, _, sm in result.rows],
        )
    return result


@dataclass
class ArmSearch:
    supported: int
    probes: dict  # devices -> p95 latency


def supported_users(cfg: ScenarioConfig, seed: int, budget: float, max_devices: int, start=None) -> ArmSearch:
    """Largest device count whose run keeps p95 latency within ``budget``.

    Doubles from ``start`` until a count fails or ``max_devices`` passes,
    then bisects between the last pass and the first failure.
    """
    probes: dict = {}

    def ok(n: int) -> bool:
        if n == 0:
            return True
        if n not in probes:
            probes[n] = run(cfg.with_value("workload", "devices", n), seed).summary.p95_latency_s
        return probes[n] <= budget

    if max_devices <= 0:
        return ArmSearch(0, probes)
    if math.isinf(budget):
        return ArmSearch(max_devices, probes)
    n = min(max_devices, start or max(1, max_devices // 32))
    lo = 0
    while ok(n):
        lo = n
        if n == max_devices:
            return ArmSearch(max_devices, probes)
        n = min(2 * n, max_devices)
    hi = n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return ArmSearch(lo, probes)


@dataclass(frozen=True)
class ComparisonRow:
    seed: int
    federated: int
    single: int


@dataclass
class ComparisonReport:
    budget: float
    max_devices: int
    rows: list = field(default_factory=list)
    probes: list = field(default_factory=list)  # (arm, seed, devices, p95)

    @property
    def federated_wins(self) -> int:
        return sum(r.federated >= r.single for r in self.rows)


BASELINES = ("single", "isolated")


def baseline_config(cfg: ScenarioConfig, baseline: str = "single") -> ScenarioConfig:
    """The non-federated arm: leasing off, and for ``single`` all load homed at one location."""
    if baseline not in BASELINES:
        raise ValueError(f"unknown baseline {baseline!r}; choose from {list(BASELINES)}")
    out = cfg.with_value("topology", "leasing", False)
    if baseline == "single":
        out = out.with_value("topology", "confine_load", True)
    return out


def compare_baseline(cfg: ScenarioConfig, budget: float, seeds, out_dir=None, max_devices=None,
                     baseline: str = "single") -> ComparisonReport:
    """Supported users, federated vs a non-federated arm.

    ``baseline="single"`` sends all traffic to one location with no leasing;
    ``"isolated"`` keeps nearest-broker homing but turns leasing off, so each
    location serves only its own area. ``max_devices`` defaults to the
    config's device count.
    """
    if not budget > 0:
        raise ValueError("budget must be positive")
    if cfg.topology.locations < 2:
        raise ValueError("comparison needs at least 2 locations")
    seeds = list(seeds)
    if not seeds:
        raise ValueError("comparison needs at least one seed")
    max_devices = cfg.workload.devices if max_devices is None else max_devices
    arms = {"federated": cfg, "single": baseline_config(cfg, baseline)}
    report = ComparisonReport(budget, max_devices)
    for s in seeds:
        found = {}
        for arm, acfg in arms.items():
            res = supported_users(acfg, s, budget, max_devices)
            found[arm] = res.supported
            report.probes.extend((arm, s, n, p) for n, p in sorted(res.probes.items()))
        report.rows.append(ComparisonRow(s, found["federated"], found["single"]))
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        write_table(
            os.path.join(out_dir, "compare.csv"),
            ["seed", "federated_supported", "single_supported", "budget_s", "max_devices", "baseline"],
            [[r.seed, r.federated, r.single, budget, max_devices, baseline] for r in report.rows],
        )
        write_table(os.path.join(out_dir, "compare_probes.csv"), ["arm", "seed", "devices", "p95_latency_s"], report.probes)
    return report


def light_load_p95(cfg: ScenarioConfig, seed: int, devices: int) -> float:
    return run(cfg.with_value("workload", "devices", devices), seed).summary.p95_latency_s


__all__ = ["BASELINES", "SWEEPABLE", "RunSummary", "apply_param", "baseline_config", "compare_baseline", "light_load_p95", "supported_users", "sweep"]
