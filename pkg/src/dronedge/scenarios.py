"""Scenario definitions: built-in topologies and the scenario file format."""

import dataclasses
import json
import os
from dataclasses import dataclass, field

from . import model
from .errors import ScenarioError

GRID_SIZE = 21
SPACING = 20.0


@dataclass
class Scenario:
    name: str
    grid_width: int
    grid_height: int
    spacing: float
    depot: model.GridPoint
    missions: list            # per-drone list[GridPoint]
    drones: list              # list[DroneSpec]
    servers: list             # list[ServerSpec]
    uncertainty: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.uncertainty < 1.0):
            raise ScenarioError("uncertainty must be in [0, 1)")
        if len(self.missions) != len(self.drones):
            raise ScenarioError("one mission per drone required")
        for pts in self.missions:
            for p in pts:
                if not (0 <= p.x < self.grid_width and 0 <= p.y < self.grid_height):
                    raise ScenarioError(f"point {p.key} outside grid")
                if p.key == self.depot.key:
                    raise ScenarioError("the depot is never a point of interest")

    def with_uncertainty(self, u: float) -> "Scenario":
        return dataclasses.replace(self, uncertainty=u)

    @property
    def servers_by_id(self):
        return {s.id: s for s in self.servers}

    def depot_waypoint(self) -> model.Waypoint:
        return model.depot_waypoint(self.depot)


def _point(x, y, spacing=SPACING):
    return model.GridPoint(x, y, spacing)


def _rect(x0, y0, w, h, spacing=SPACING):
    return [_point(x, y, spacing) for y in range(y0, y0 + h) for x in range(x0, x0 + w)]


# Mission rectangles and server placement follow the reference topology:
# a 21x21 grid, 20 m spacing, depot at the center, two 200 m-range servers
# placed symmetrically so their cells overlap near the middle. The small
# mission covers a 12x7 sub-grid (84 points), the large one 14x9 (126).
SMALL_RECT = (4, 2, 12, 7)
LARGE_RECT = (3, 1, 14, 9)
SERVER_POSITIONS = ((5, 6), (15, 6))


def _default_servers():
    return [
        model.ServerSpec(id=k + 1, location=_point(x, y))
        for k, (x, y) in enumerate(SERVER_POSITIONS)
    ]


def _builtin(name: str, mission_rects) -> Scenario:
    missions = [_rect(*rect) for rect in mission_rects]
    drones = [model.DroneSpec(id=m) for m in range(len(missions))]
    return Scenario(
        name=name,
        grid_width=GRID_SIZE,
        grid_height=GRID_SIZE,
        spacing=SPACING,
        depot=_point(10, 10),
        missions=missions,
        drones=drones,
        servers=_default_servers(),
    )


def small20() -> Scenario:
    return _builtin("small20", [SMALL_RECT] * 20)


def large20() -> Scenario:
    return _builtin("large20", [LARGE_RECT] * 20)


def mixed10_10() -> Scenario:
    return _builtin("mixed10+10", [SMALL_RECT] * 10 + [LARGE_RECT] * 10)


BUILTINS = {
    "small20": small20,
    "large20": large20,
    "mixed10+10": mixed10_10,
    "mixed10_10": mixed10_10,
}


def get_builtin(name: str) -> Scenario:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise ScenarioError(
            f"unknown built-in scenario {name!r}; choose from "
            f"{sorted(set(BUILTINS) - {'mixed10_10'})}"
        ) from None


# --- scenario files ---------------------------------------------------------


def _require(obj, key, kind, where):
    if key not in obj:
        raise ScenarioError(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ScenarioError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _parse_point(obj, spacing, where):
    if not (isinstance(obj, list) and len(obj) == 2 and all(isinstance(v, int) for v in obj)):
        raise ScenarioError(f"{where}: expected [x, y] integer pair")
    return _point(obj[0], obj[1], spacing)


def parse_scenario(path) -> Scenario:
    """Load a scenario from a JSON file (schema documented in the README)."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    return scenario_from_dict(raw, name=str(path))


def scenario_from_dict(raw: dict, name: str = "scenario") -> Scenario:
    grid = _require(raw, "grid", dict, name)
    width = _require(grid, "width", int, f"{name}.grid")
    height = _require(grid, "height", int, f"{name}.grid")
    spacing = _require(grid, "spacing", float, f"{name}.grid")
    depot = _parse_point(_require(raw, "depot", list, name), spacing, f"{name}.depot")

    servers = []
    for idx, srv in enumerate(_require(raw, "servers", list, name)):
        where = f"{name}.servers[{idx}]"
        servers.append(model.ServerSpec(
            id=_require(srv, "id", int, where),
            location=_parse_point(_require(srv, "location", list, where), spacing, where),
            proc_time=_require(srv, "proc_time", float, where) if "proc_time" in srv else 1.8,
            bandwidth=_require(srv, "bandwidth", float, where) if "bandwidth" in srv else 50e6,
            comm_range=_require(srv, "comm_range", float, where) if "comm_range" in srv else 200.0,
            msg_latency=_require(srv, "msg_latency", float, where) if "msg_latency" in srv else 0.010,
        ))

    missions, drones = [], []
    for idx, dr in enumerate(_require(raw, "drones", list, name)):
        where = f"{name}.drones[{idx}]"
        if "mission_rect" in dr:
            rect = dr["mission_rect"]
            if not (isinstance(rect, list) and len(rect) == 4):
                raise ScenarioError(f"{where}.mission_rect: expected [x0, y0, w, h]")
            pts = _rect(*rect, spacing=spacing)
        else:
            pts = [_parse_point(p, spacing, f"{where}.mission[{j}]")
                   for j, p in enumerate(_require(dr, "mission", list, where))]
        missions.append(pts)
        overrides = {k: float(v) for k, v in dr.items()
                     if k not in ("mission", "mission_rect", "id")}
        try:
            drones.append(model.DroneSpec(id=idx, **overrides))
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"{where}: {exc}") from exc

    if raw.get("name"):
        label = str(raw["name"])
    elif name != "scenario":
        # fall back to the file name, without directories or extension
        label = os.path.splitext(os.path.basename(name))[0]
    else:
        label = name
    try:
        return Scenario(
            name=label,
            grid_width=width, grid_height=height, spacing=spacing,
            depot=depot, missions=missions, drones=drones, servers=servers,
            uncertainty=float(raw.get("uncertainty", 0.0)),
        )
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{name}: {exc}") from exc
