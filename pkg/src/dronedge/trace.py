"""Pre-sampled flight-time traces for reproducible cross-policy replay.

Actual hop times are uniform in [(1-u)*flyMax, flyMax]. The trace stores
one multiplicative factor per (drone, segment geometry): a hop's actual
time is factor * flyMax. Keying by segment endpoints rather than by path
index means a dynamically inserted or removed depot detour changes only its
own legs, never the draw used by any other hop, so every policy consumes a
consistent view of the same random weather.
"""

import hashlib
import random

from .errors import TraceMismatch


class FlightTimeTrace:
    """Factors keyed by (drone_id, (x1, y1), (x2, y2))."""

    def __init__(self, u: float, seed: int, factors: dict):
        if not (0.0 <= u < 1.0):
            raise ValueError("uncertainty must be in [0, 1)")
        self.u = u
        self.seed = seed
        self.factors = factors

    def factor(self, drone_id: int, from_key, to_key) -> float:
        try:
            return self.factors[(drone_id, from_key, to_key)]
        except KeyError:
            raise TraceMismatch(
                f"trace has no entry for drone {drone_id} segment "
                f"{from_key}->{to_key}"
            ) from None

    def checksum(self) -> str:
        digest = hashlib.sha256()
        for key in sorted(self.factors):
            digest.update(repr(key).encode())
            digest.update(self.factors[key].hex().encode())
        return digest.hexdigest()


class WorstCaseTrace:
    """Factor 1.0 for every segment: planning-time (u = 0) flight times."""

    u = 0.0
    seed = 0

    def factor(self, drone_id: int, from_key, to_key) -> float:
        return 1.0

    def checksum(self) -> str:
        return "worst-case"


def segment_pairs_for_drone(tour_points, depot_point):
    """Every segment geometry a mission can fly, in a fixed enumeration order.

    Covers the planned tour hops plus a depot detour leg to and from every
    point, so dynamically inserted detours always find an entry.
    """
    dep = depot_point.key
    pairs = []
    seen = set()

    def add(a, b):
        if a != b and (a, b) not in seen:
            seen.add((a, b))
            pairs.append((a, b))

    pts = [p.key for p in tour_points]
    route = [dep] + pts + [dep]
    for i in range(len(route) - 1):
        add(route[i], route[i + 1])
    for p in pts:
        add(p, dep)
        add(dep, p)
    return pairs


def sample_trace_from_tours(u: float, seed: int, tours, depot_point,
                            drone_ids=None) -> FlightTimeTrace:
    """Seeded sampling: one uniform factor in [1-u, 1] per segment geometry.

    `tours` is the per-drone list of point-of-interest visit orders. Same
    (u, seed, tours) always yields an identical trace.
    """
    if not (0.0 <= u < 1.0):
        raise ValueError("uncertainty must be in [0, 1)")
    if drone_ids is None:
        drone_ids = range(len(tours))
    factors = {}
    for drone_id, tour in zip(drone_ids, tours):
        # hashlib-derived seed: random.Random(tuple) would go through the
        # per-process salted hash() and break cross-process reproducibility
        digest = hashlib.sha256(f"dronedge-trace:{seed}:{drone_id}".encode()).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        for a, b in segment_pairs_for_drone(tour, depot_point):
            factors[(drone_id, a, b)] = 1.0 - u * rng.random()
    return FlightTimeTrace(u, seed, factors)
