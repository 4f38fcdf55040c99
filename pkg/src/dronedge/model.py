"""Domain types and closed-form timing/energy math.

Everything here is a pure function over value types. The rest of the
simulator (planner, protocol, engine) computes through this module so the
timing model lives in exactly one place.
"""

from dataclasses import dataclass, field
from enum import Enum
import math

from .errors import EnergyViolation


class WaypointKind(Enum):
    POI = "poi"
    DEPOT = "depot"


@dataclass(frozen=True)
class GridPoint:
    """A node of the scenario grid. Distances are spacing * euclidean."""

    x: int
    y: int
    spacing: float = 20.0

    def distance_to(self, other: "GridPoint") -> float:
        return self.spacing * math.hypot(self.x - other.x, self.y - other.y)

    @property
    def key(self):
        return (self.x, self.y)


@dataclass(frozen=True)
class Waypoint:
    location: GridPoint
    kind: WaypointKind = WaypointKind.POI

    @property
    def is_depot(self) -> bool:
        return self.kind is WaypointKind.DEPOT


def depot_waypoint(location: GridPoint) -> Waypoint:
    return Waypoint(location, WaypointKind.DEPOT)


def poi_waypoint(location: GridPoint) -> Waypoint:
    return Waypoint(location, WaypointKind.POI)


@dataclass(frozen=True)
class DroneSpec:
    """Physical and compute parameters of one drone.

    Defaults reflect a small quadcopter with a 15-minute battery and an
    onboard object-detection workload: energy is normalized to 1.0 full
    battery with the same 1/900 per-second drain whether cruising or
    hovering.
    """

    id: int = 0
    cruise_speed: float = 4.0           # m/s
    h_accel: float = 0.8                # m/s^2
    h_decel: float = 1.6                # m/s^2
    takeoff_time: float = 5.0           # s
    land_time: float = 20.0             # s
    sense_time: float = 1.0             # s
    local_proc_time: float = 10.0       # s
    data_in: float = 1_000_000.0        # bytes
    data_out: float = 1_000.0           # bytes
    energy_capacity: float = 1.0        # battery fraction
    beta: float = 1.0 / 900.0           # energy per flying second
    gamma: float = 1.0 / 900.0          # energy per hovering second
    depot_service_time: float = 180.0   # s, battery switch

    def __post_init__(self):
        for name in (
            "cruise_speed", "h_accel", "h_decel", "takeoff_time", "land_time",
            "sense_time", "local_proc_time", "data_in", "energy_capacity",
            "beta", "gamma", "depot_service_time",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"DroneSpec.{name} must be strictly positive")
        if self.data_out < 0:
            raise ValueError("DroneSpec.data_out must be non-negative")


@dataclass(frozen=True)
class ServerSpec:
    """One edge server: a sequential micro-service behind a local WiFi cell."""

    id: int
    location: GridPoint
    proc_time: float = 1.8              # s per offloaded computation
    bandwidth: float = 50e6             # bits/s
    comm_range: float = 200.0           # meters
    msg_latency: float = 0.010          # s per protocol message

    def __post_init__(self):
        for name in ("proc_time", "bandwidth", "comm_range", "msg_latency"):
            if getattr(self, name) <= 0:
                raise ValueError(f"ServerSpec.{name} must be strictly positive")

    def in_range(self, point: GridPoint) -> bool:
        return self.location.distance_to(point) <= self.comm_range


LOCAL = 0  # schedule entry meaning "compute on board"
NEGOTIATE_ANY = -1  # planning sentinel: try offloading, server not fixed yet

# messages exchanged before an offload's data transfer starts
# (inquiry, offer, reserve, ack for the negotiating policies; the
# plan-following policies use a request/grant handshake of equal cost)
OFFLOAD_HANDSHAKE_MSGS = 4


@dataclass
class MissionPlan:
    """The (P, S, W) triplet: path, offloading schedule, planned waits."""

    path: list          # list[Waypoint]
    schedule: list      # list[int], server id, LOCAL, or NEGOTIATE_ANY
    waits: list         # list[float], seconds >= 0

    def __post_init__(self):
        self.validate()

    def validate(self, servers=None):
        n = len(self.path)
        if n < 2:
            raise ValueError("plan path needs at least start and end depot")
        if len(self.schedule) != n or len(self.waits) != n:
            raise ValueError("schedule/waits must have the same length as path")
        if not (self.path[0].is_depot and self.path[-1].is_depot):
            raise ValueError("plan must start and end at the depot")
        for i in range(n - 1):
            if self.path[i].is_depot and self.path[i + 1].is_depot:
                raise ValueError(f"consecutive depot entries at index {i}")
        for i, wp in enumerate(self.path):
            if wp.is_depot and (self.schedule[i] != LOCAL or self.waits[i] != 0.0):
                raise ValueError(f"depot entry {i} must have schedule 0 and wait 0")
            if self.waits[i] < 0:
                raise ValueError(f"negative wait at index {i}")
            if servers is not None and self.schedule[i] not in (LOCAL, NEGOTIATE_ANY):
                srv = servers[self.schedule[i]]
                if not srv.in_range(wp.location):
                    raise ValueError(
                        f"waypoint {i} assigned to server {srv.id} out of range"
                    )

    def copy(self):
        return MissionPlan(list(self.path), list(self.schedule), list(self.waits))


@dataclass
class EnergyState:
    remaining: float


class DebitKind(Enum):
    FLY = "fly"
    HOVER = "hover"


# --- timing equations ------------------------------------------------------


def cruise_time(a: GridPoint, b: GridPoint, spec: DroneSpec) -> float:
    """Horizontal traversal time between two grid points.

    Trapezoidal velocity profile (accelerate, cruise, decelerate); degrades
    to a triangular profile when the hop is too short to reach cruise speed.
    """
    distance = a.distance_to(b)
    return cruise_time_for_distance(distance, spec)


def cruise_time_for_distance(distance: float, spec: DroneSpec) -> float:
    if distance <= 0:
        raise ValueError("degenerate hop: zero distance")
    v, acc, dec = spec.cruise_speed, spec.h_accel, spec.h_decel
    ramp_dist = v * v / (2 * acc) + v * v / (2 * dec)
    if distance >= ramp_dist:
        return v / acc + v / dec + (distance - ramp_dist) / v
    peak = math.sqrt(2 * acc * dec * distance / (acc + dec))
    return peak / acc + peak / dec


def fly_time(origin: Waypoint, dest: Waypoint, cruise: float, spec: DroneSpec) -> float:
    """Total hop time: cruise plus vertical take-off/landing overhead."""
    if origin.is_depot and dest.is_depot:
        raise ValueError("malformed path: depot-to-depot hop")
    if origin.is_depot:
        return cruise + spec.takeoff_time
    if dest.is_depot:
        return cruise + spec.land_time
    return cruise


def hop_fly_max(origin: Waypoint, dest: Waypoint, spec: DroneSpec) -> float:
    """Worst-case flight time for a hop (planning-time value)."""
    return fly_time(origin, dest, cruise_time(origin.location, dest.location, spec), spec)


def transfer_time(drone: DroneSpec, server: ServerSpec) -> float:
    """Input + output data transfer time over the server's link."""
    return (drone.data_in + drone.data_out) * 8.0 / server.bandwidth


def input_transfer_time(drone: DroneSpec, server: ServerSpec) -> float:
    return drone.data_in * 8.0 / server.bandwidth


def output_transfer_time(drone: DroneSpec, server: ServerSpec) -> float:
    return drone.data_out * 8.0 / server.bandwidth


def offload_time(drone: DroneSpec, server: ServerSpec, response_time: float) -> float:
    """End-to-end offloaded computation time for a given response time.

    With response_time equal to the server's uncontended processing time
    this is the planning value; the protocol substitutes offered response
    times that include queueing.
    """
    if response_time < server.proc_time:
        raise ValueError("response_time below the server's processing time")
    return response_time + transfer_time(drone, server)


def visit_time(drone: DroneSpec, wait: float, comp_time: float) -> float:
    """Time spent hovering at a point of interest."""
    if wait < 0:
        raise ValueError("negative wait")
    return drone.sense_time + wait + comp_time


def depot_visit_time(drone: DroneSpec, index: int, path_len: int) -> float:
    """Time spent at a depot stop: battery switch, or zero at the endpoints."""
    if index == 0 or index == path_len - 1:
        return 0.0
    return drone.depot_service_time


def mission_time(hop_times, visit_times) -> float:
    """Total plan execution time from per-hop and per-waypoint components."""
    if len(visit_times) != len(hop_times) + 1:
        raise ValueError("need one visit per waypoint and one hop between each")
    total = visit_times[0]
    for i, hop in enumerate(hop_times):
        total += hop + visit_times[i + 1]
    return total


def relative_reduction(default_time: float, actual_time: float) -> float:
    """Fractional mission-time improvement over the default plan."""
    if default_time <= 0:
        raise ValueError("default_time must be positive")
    return (default_time - actual_time) / default_time


def energy_debit(state: EnergyState, kind: DebitKind, duration: float,
                 spec: DroneSpec, drone_id: int = 0, time: float = 0.0) -> EnergyState:
    """Drain the battery for a flight or hover segment. Strictly positive result."""
    if duration < 0:
        raise ValueError("negative duration")
    rate = spec.beta if kind is DebitKind.FLY else spec.gamma
    remaining = state.remaining - rate * duration
    if remaining <= 0:
        raise EnergyViolation(drone_id, time)
    return EnergyState(remaining)


# --- planned-plan evaluation ----------------------------------------------


def negotiation_overhead(server: ServerSpec) -> float:
    """Clock cost of the pre-transfer message exchange for one offload."""
    return OFFLOAD_HANDSHAKE_MSGS * server.msg_latency


def planned_comp_time(drone: DroneSpec, servers_by_id, schedule_entry: int) -> float:
    """Planned computation time at a waypoint: local, or offloaded per plan."""
    if schedule_entry == LOCAL:
        return drone.local_proc_time
    if schedule_entry == NEGOTIATE_ANY:
        # planning sentinel: outcome unknown, assume local (worst case)
        return drone.local_proc_time
    server = servers_by_id[schedule_entry]
    return offload_time(drone, server, server.proc_time)


def planned_visit_time(plan: MissionPlan, i: int, drone: DroneSpec, servers_by_id) -> float:
    """Planned visit duration at plan index i, with the depot special cases.

    Offloaded visits include the protocol handshake latency so plan-time
    estimates match what the runtime actually spends at the waypoint.
    """
    wp = plan.path[i]
    if wp.is_depot:
        return depot_visit_time(drone, i, len(plan.path))
    entry = plan.schedule[i]
    if entry == LOCAL or entry == NEGOTIATE_ANY:
        return visit_time(drone, plan.waits[i], planned_comp_time(drone, servers_by_id, entry))
    server = servers_by_id[entry]
    comp = planned_comp_time(drone, servers_by_id, entry)
    return negotiation_overhead(server) + visit_time(drone, plan.waits[i], comp)


def plan_hop_times(plan: MissionPlan, drone: DroneSpec):
    """Worst-case fly time for every hop of a plan."""
    return [
        hop_fly_max(plan.path[i], plan.path[i + 1], drone)
        for i in range(len(plan.path) - 1)
    ]


def plan_mission_time(plan: MissionPlan, drone: DroneSpec, servers_by_id) -> float:
    """Analytic worst-case mission time of a plan."""
    hops = plan_hop_times(plan, drone)
    visits = [planned_visit_time(plan, i, drone, servers_by_id) for i in range(len(plan.path))]
    return mission_time(hops, visits)


def plan_remainder_time(plan: MissionPlan, from_index: int, drone: DroneSpec, servers_by_id) -> float:
    """Worst-case time from just after the visit at from_index to mission end."""
    total = 0.0
    for j in range(from_index, len(plan.path) - 1):
        total += hop_fly_max(plan.path[j], plan.path[j + 1], drone)
        total += planned_visit_time(plan, j + 1, drone, servers_by_id)
    return total
