"""Line-oriented file formats: traces, event logs, metrics, manifests.

All simulation times are serialized as integer microseconds and all random
factors as exact float hex, so output files are bit-exact across platforms
and diff-able. Files are written atomically (temp file + rename).
"""

import json
import os
import tempfile

from .errors import ScenarioError
from .trace import FlightTimeTrace


def us(t: float) -> int:
    """Seconds to integer microseconds."""
    return round(t * 1_000_000)


def _atomic_write(path, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _field(value) -> str:
    if isinstance(value, float):
        return value.hex()
    if isinstance(value, tuple):
        return ":".join(str(v) for v in value)
    return str(value)


EVENT_LOG_HEADER = "# dronedge event log v1: kind,time_us,fields..."


def format_event(record) -> str:
    kind, t = record[0], record[1]
    cols = [kind, str(us(t))] + [_field(v) for v in record[2:]]
    return ",".join(cols)


def write_event_log(records, path):
    lines = [EVENT_LOG_HEADER]
    lines.extend(format_event(r) for r in records)
    _atomic_write(path, "\n".join(lines) + "\n")


TRACE_HEADER = "# dronedge flight-time trace v1: drone,from,to,factor_hex"


def write_trace(trace: FlightTimeTrace, path):
    lines = [
        TRACE_HEADER,
        f"u,{trace.u.hex()}",
        f"seed,{trace.seed}",
    ]
    for key in sorted(trace.factors):
        drone_id, frm, to = key
        lines.append(
            f"{drone_id},{frm[0]}:{frm[1]},{to[0]}:{to[1]},"
            f"{trace.factors[key].hex()}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_trace(path) -> FlightTimeTrace:
    u = None
    seed = None
    factors = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if parts[0] == "u":
                u = float.fromhex(parts[1])
            elif parts[0] == "seed":
                seed = int(parts[1])
            else:
                if len(parts) != 4:
                    raise ScenarioError(f"{path}:{lineno}: malformed trace line")
                drone = int(parts[0])
                frm = tuple(int(v) for v in parts[1].split(":"))
                to = tuple(int(v) for v in parts[2].split(":"))
                factors[(drone, frm, to)] = float.fromhex(parts[3])
    if u is None or seed is None:
        raise ScenarioError(f"{path}: trace file missing u/seed header")
    return FlightTimeTrace(u, seed, factors)


METRICS_HEADER = ("drone,mission_time_us,default_time_us,reduction,detours,"
                  "flight_us,at_poi_us,depot_us,local_computes,offloads,"
                  "total_wait_us")


def write_metrics_csv(metrics, path):
    lines = [METRICS_HEADER]
    for row in metrics.per_drone:
        lines.append(",".join(str(row[k]) for k in (
            "drone", "mission_time_us", "default_time_us", "reduction",
            "detours", "flight_us", "at_poi_us", "depot_us",
            "local_computes", "offloads", "total_wait_us")))
    lines.append("")
    lines.append("server,busy_us,requests_served,requests_declined")
    for sid in sorted(metrics.servers):
        s = metrics.servers[sid]
        lines.append(
            f"{sid},{s['busy_us']},{s['requests_served']},"
            f"{s['requests_declined']}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_manifest(data: dict, path):
    _atomic_write(path, json.dumps(data, indent=2, sort_keys=True) + "\n")
