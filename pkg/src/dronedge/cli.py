"""Experiment harness and command-line entry point.

Runs a grid of (seed, uncertainty, policy) simulations on one scenario,
sharing one flight-time trace per (seed, u) cell across policies, and
writes event logs, metrics CSVs, comparison tables, and replay manifests.

Exit codes: 0 success, 1 usage/config error, 2 simulation invariant
violation (energy or trace inconsistency).
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from . import engine, fileio, metrics, planner, scenarios
from .errors import ScenarioError, SimulationError
from .policies import PolicyKind

__version__ = "1.0.0"

_POLICY_NAMES = {
    "proposed": PolicyKind.PROPOSED,
    "follow_plan": PolicyKind.FOLLOW_PLAN,
    "opportunistic": PolicyKind.OPPORTUNISTIC,
    "oracle": PolicyKind.ORACLE,
}


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    scenario: str
    seeds: list
    uncertainty_levels: list = field(default_factory=lambda: [0.2, 0.3])
    policies: list = field(default_factory=lambda: list(_POLICY_NAMES))
    output_dir: str = "out"
    trace_in: str = None
    trace_out: str = None
    conservative_safety: bool = True
    emit_boxplot: bool = False

    def __post_init__(self):
        if not self.seeds:
            raise UsageError("at least one seed required")
        if not self.uncertainty_levels:
            raise UsageError("at least one uncertainty level required")
        if not self.policies:
            raise UsageError("at least one policy required")
        for p in self.policies:
            if p not in _POLICY_NAMES:
                raise UsageError(
                    f"unknown policy {p!r}; choose from {sorted(_POLICY_NAMES)}")
        for u in self.uncertainty_levels:
            if not (0.0 <= u < 1.0):
                raise UsageError(f"uncertainty {u} outside [0, 1)")


def parse_seeds(text: str):
    """'1..10' or '1,2,5' or a single integer."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    return seeds


def load_scenario(name_or_path: str):
    if name_or_path in scenarios.BUILTINS:
        return scenarios.get_builtin(name_or_path)
    if not os.path.exists(name_or_path):
        raise UsageError(
            f"scenario {name_or_path!r} is neither a built-in "
            f"({sorted(set(scenarios.BUILTINS) - {'mixed10_10'})}) nor a file")
    return scenarios.parse_scenario(name_or_path)


def _u_tag(u: float) -> str:
    return f"u{u:g}".replace(".", "p")


def run_cell(scenario, bundle, policy_name, flight_trace, conservative):
    """One (policy, trace) simulation; returns (RunResult, RunMetrics)."""
    kind = _POLICY_NAMES[policy_name]
    if kind is PolicyKind.ORACLE:
        plan_bundle = planner.build_oracle_bundle(
            scenario, flight_trace, conservative)
    else:
        plan_bundle = bundle
    plans = [p.copy() for p in plan_bundle.plans]
    result = engine.run(scenario, plans, plan_bundle.default_times, kind,
                        flight_trace, conservative_safety=conservative)
    defaults_by_id = {
        d.id: t for d, t in zip(scenario.drones, plan_bundle.default_times)
    }
    return result, metrics.summarize(result.records, defaults_by_id)


def run_experiment(config: ExperimentConfig) -> int:
    scenario = load_scenario(config.scenario)
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    bundle = planner.build_offline_bundle(scenario, config.conservative_safety)
    boxplot_values = {p: [] for p in config.policies}

    for u in config.uncertainty_levels:
        sc = scenario.with_uncertainty(u)
        for seed in config.seeds:
            tag = f"{scenario.name}_s{seed}_{_u_tag(u)}"
            if config.trace_in:
                trace_path = os.path.join(config.trace_in, f"trace_{tag}.csv")
                flight_trace = fileio.read_trace(trace_path)
            else:
                flight_trace = planner.sample_trace(sc, seed, u)
            if config.trace_out:
                fileio.write_trace(
                    flight_trace,
                    os.path.join(config.trace_out, f"trace_{tag}.csv"))

            cell = {}
            for policy_name in config.policies:
                result, m = run_cell(sc, bundle, policy_name, flight_trace,
                                     config.conservative_safety)
                cell[policy_name] = m
                boxplot_values[policy_name].append(m.fleet["min_reduction"])
                base = os.path.join(out, f"{tag}_{policy_name}")
                fileio.write_event_log(result.records, base + ".events")
                fileio.write_metrics_csv(m, base + ".metrics.csv")
                fileio.write_manifest({
                    "scenario": scenario.name,
                    "seed": seed,
                    "u": u,
                    "policy": policy_name,
                    "trace_checksum": result.trace_checksum,
                    "conservative_safety": config.conservative_safety,
                    "version": __version__,
                    "min_reduction": m.fleet["min_reduction"],
                }, base + ".manifest.json")

            table = metrics.compare(cell)
            fileio.write_manifest(table, os.path.join(out, f"{tag}_compare.json"))

    if config.emit_boxplot:
        data = {
            p: metrics.boxplot_summary(vals)
            for p, vals in boxplot_values.items() if vals
        }
        fileio.write_manifest(data, os.path.join(out, "boxplot.json"))
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="dronedge",
        description="Deterministic multi-drone edge-offloading simulator.")
    parser.add_argument("--scenario", required=True,
                        help="built-in name (small20, large20, mixed10+10) "
                             "or scenario JSON file")
    parser.add_argument("--seeds", default="1",
                        help="seed list: '1..10' or '1,2,5' (default: 1)")
    parser.add_argument("--u", default="0.2,0.3",
                        help="comma-separated uncertainty levels "
                             "(default: 0.2,0.3)")
    parser.add_argument("--policies",
                        default="proposed,follow_plan,opportunistic,oracle",
                        help="comma-separated subset of "
                             "proposed,follow_plan,opportunistic,oracle")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--trace-in", default=None,
                        help="directory with pre-generated trace files")
    parser.add_argument("--trace-out", default=None,
                        help="directory to write trace files to")
    parser.add_argument("--conservative-safety", choices=("on", "off"),
                        default="on",
                        help="reserve the worst-case return leg in the "
                             "energy safety check (default: on)")
    parser.add_argument("--emit-boxplot", action="store_true",
                        help="write boxplot summary data per policy")
    parser.add_argument("--version", action="version", version=__version__)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = ExperimentConfig(
            scenario=args.scenario,
            seeds=parse_seeds(args.seeds),
            uncertainty_levels=[float(v) for v in args.u.split(",") if v],
            policies=[p.strip() for p in args.policies.split(",") if p.strip()],
            output_dir=args.out,
            trace_in=args.trace_in,
            trace_out=args.trace_out,
            conservative_safety=args.conservative_safety == "on",
            emit_boxplot=args.emit_boxplot,
        )
        return run_experiment(config)
    except (UsageError, ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"simulation invariant violated: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
