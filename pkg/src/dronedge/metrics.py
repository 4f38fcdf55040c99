"""Evaluation quantities: per-drone reductions, fleet min-reduction,
detours, flight time, server utilization, and policy comparison tables.

Everything is recomputed from the event log alone, with all times handled
as integer microseconds so the per-drone time partition
(flight + at-POI + depot = mission time) is exact.
"""

import statistics
from dataclasses import dataclass, field

from . import model
from .fileio import us


@dataclass
class RunMetrics:
    per_drone: list
    fleet: dict
    servers: dict


def summarize(records, default_times_by_drone) -> RunMetrics:
    """Single source of truth: every field is derived from the log records.

    `default_times_by_drone` maps drone id to the analytic baseline mission
    time in seconds (the plan bundle's missionT of the default plan).
    """
    # per-drone timeline: list of (time_us, tag) in record order
    timelines = {}
    counters = {}
    servers = {}

    def drone(did):
        if did not in timelines:
            timelines[did] = []
            counters[did] = {
                "detours": 0, "local": 0, "offloads": 0,
                "wait_us": 0, "done_us": None,
            }
        return timelines[did], counters[did]

    def server(sid):
        if sid not in servers:
            servers[sid] = {
                "busy_us": 0, "requests_served": 0, "requests_declined": 0,
                "_start_us": None,
            }
        return servers[sid]

    for rec in records:
        kind, t = rec[0], rec[1]
        t_us = us(t)
        if kind == "depart":
            tl, _ = drone(rec[2])
            tl.append((t_us, "fly"))
        elif kind == "arrive":
            tl, c = drone(rec[2])
            tl.append((t_us, "depot" if rec[4] else "poi"))
        elif kind == "battery_start":
            _, c = drone(rec[2])
            c["detours"] += 1
        elif kind == "local_start":
            _, c = drone(rec[2])
            c["local"] += 1
        elif kind == "result_recv":
            _, c = drone(rec[2])
            c["offloads"] += 1
            c["wait_us"] += us(rec[4])
        elif kind == "mission_done":
            _, c = drone(rec[2])
            c["done_us"] = t_us
        elif kind == "dispatch_start":
            s = server(rec[2])
            s["_start_us"] = t_us
        elif kind == "dispatch_done":
            s = server(rec[2])
            s["requests_served"] += 1
            if s["_start_us"] is not None:
                s["busy_us"] += t_us - s["_start_us"]
                s["_start_us"] = None
        elif kind == "msg" and rec[4] == "reoffer":
            sid = int(rec[2][1:])
            server(sid)["requests_declined"] += 1

    per_drone = []
    for did in sorted(timelines):
        tl, c = timelines[did], counters[did]
        flight = at_poi = depot = 0
        # phases alternate: depart..arrive = flight; arrive..next depart =
        # at-POI hover or depot ground time; the integer timestamps telescope
        for (t0, tag0), (t1, _) in zip(tl, tl[1:]):
            span = t1 - t0
            if tag0 == "fly":
                flight += span
            elif tag0 == "poi":
                at_poi += span
            else:
                depot += span
        mission_us = c["done_us"]
        default = default_times_by_drone[did]
        reduction = model.relative_reduction(default, mission_us / 1_000_000)
        per_drone.append({
            "drone": did,
            "mission_time_us": mission_us,
            "default_time_us": us(default),
            "reduction": reduction,
            "detours": c["detours"],
            "flight_us": flight,
            "at_poi_us": at_poi,
            "depot_us": depot,
            "local_computes": c["local"],
            "offloads": c["offloads"],
            "total_wait_us": c["wait_us"],
        })

    reductions = [row["reduction"] for row in per_drone]
    fleet = {
        "min_reduction": min(reductions),
        "mean_reduction": statistics.fmean(reductions),
        "median_reduction": statistics.median(reductions),
        "quartiles": quartiles(reductions),
    }
    for s in servers.values():
        s.pop("_start_us", None)
    return RunMetrics(per_drone, fleet, servers)


def quartiles(values):
    """(q1, median, q3) with the inclusive-median convention."""
    if len(values) == 1:
        v = values[0]
        return (v, v, v)
    q = statistics.quantiles(values, n=4, method="inclusive")
    return (q[0], q[1], q[2])


def boxplot_summary(values):
    """Quartiles, whiskers at 1.5 IQR, and outliers beyond them."""
    q1, med, q3 = quartiles(values)
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = [v for v in values if lo_fence <= v <= hi_fence]
    return {
        "q1": q1, "median": med, "q3": q3,
        "whisker_low": min(inside), "whisker_high": max(inside),
        "outliers": sorted(v for v in values if v < lo_fence or v > hi_fence),
    }


def compare(labeled_metrics) -> dict:
    """Pairwise policy deltas over one (seed, u) cell.

    `labeled_metrics` maps policy name to RunMetrics. Reduction deltas are
    in percentage points; detour and flight deltas are fleet totals.
    """
    table = {"per_policy": {}, "deltas": {}}
    for name, m in labeled_metrics.items():
        table["per_policy"][name] = {
            "min_reduction": m.fleet["min_reduction"],
            "mean_reduction": m.fleet["mean_reduction"],
            "total_detours": sum(r["detours"] for r in m.per_drone),
            "total_flight_us": sum(r["flight_us"] for r in m.per_drone),
        }

    def delta(a, b, key):
        if a not in labeled_metrics or b not in labeled_metrics:
            return None
        return (table["per_policy"][a][key] - table["per_policy"][b][key])

    for a, b in (("proposed", "follow_plan"),
                 ("oracle", "proposed"),
                 ("proposed", "opportunistic")):
        d = delta(a, b, "min_reduction")
        if d is not None:
            table["deltas"][f"{a}-{b}"] = {
                "min_reduction_pp": 100.0 * d,
                "detours": delta(a, b, "total_detours"),
                "flight_us": delta(a, b, "total_flight_us"),
            }
    return table
