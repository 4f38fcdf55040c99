"""Offline mission planning.

Builds, per drone, the default (no-offloading) plan that anchors the
fairness baseline, and the offloading-aware offline plan the runtime
policies start from. The offline schedule is produced by a greedy global
timeline simulation: all drones are run through the real engine under
worst-case flight times, the servers each drone actually committed to are
frozen into the schedule, and the process repeats until the plan replays
itself exactly. This guarantees plan-time visit estimates (including
waiting times) agree with what the runtime mechanics produce.
"""

from dataclasses import dataclass

from . import engine, model, trace as trace_mod
from .errors import InfeasibleMission, TraceMismatch
from .policies import PolicyKind

_TOUR_CACHE: dict = {}
_BUNDLE_CACHE: dict = {}


# --- tour construction -------------------------------------------------------


def nearest_neighbor_tour(points, depot):
    """Visit order by repeated nearest neighbor from the depot.

    Ties break on the lowest index in the mission's point list, so the tour
    is fully deterministic for a given scenario.
    """
    remaining = list(range(len(points)))
    tour = []
    cur = depot
    while remaining:
        best = min(remaining, key=lambda i: (cur.distance_to(points[i]), i))
        remaining.remove(best)
        tour.append(best)
        cur = points[best]
    return tour


def two_opt(points, order, depot):
    """First-improvement 2-opt on total tour distance, to a local optimum."""

    def dist(a, b):
        return a.distance_to(b)

    stops = [depot] + [points[i] for i in order] + [depot]
    n = len(stops)
    improved = True
    while improved:
        improved = False
        for i in range(1, n - 2):
            for j in range(i + 1, n - 1):
                delta = (dist(stops[i - 1], stops[j]) + dist(stops[i], stops[j + 1])
                         - dist(stops[i - 1], stops[i]) - dist(stops[j], stops[j + 1]))
                if delta < -1e-12:
                    stops[i:j + 1] = reversed(stops[i:j + 1])
                    improved = True
    index_of = {p.key: i for i, p in enumerate(points)}
    return [index_of[p.key] for p in stops[1:-1]]


def plan_tour(points, depot):
    """Deterministic visit order for one mission (memoized across drones)."""
    key = (depot.key, tuple(p.key for p in points))
    if key not in _TOUR_CACHE:
        _TOUR_CACHE[key] = two_opt(points, nearest_neighbor_tour(points, depot), depot)
    return _TOUR_CACHE[key]


# --- energy feasibility -------------------------------------------------------


def verify_feasible(plan, drone, hop_times, visit_times) -> bool:
    """True iff the battery stays strictly positive through the whole plan.

    Intermediate depot stops restore a full battery; hover energy is charged
    at points of interest only (the drone is on the ground at the depot).
    """
    if len(visit_times) != len(plan.path) or len(hop_times) != len(plan.path) - 1:
        raise ValueError("hop/visit time lists inconsistent with the plan")
    e = drone.energy_capacity
    for i, hop in enumerate(hop_times):
        e -= drone.beta * hop
        if e <= 0.0:
            return False
        wp = plan.path[i + 1]
        if wp.is_depot:
            if i + 2 < len(plan.path):
                e = drone.energy_capacity
        else:
            e -= drone.gamma * visit_times[i + 1]
            if e <= 0.0:
                return False
    return True


def _hop_bound(drone, origin, target, depot_wp):
    """Energy needed to safely commit to the next hop: worst-case flight
    there, a full locally-computed visit, and the worst-case return leg."""
    return (drone.beta * model.hop_fly_max(origin, target, drone)
            + drone.gamma * (drone.sense_time + drone.local_proc_time)
            + drone.beta * model.hop_fly_max(target, depot_wp, drone))


def worst_case_safe(plan, drone, servers_by_id=None) -> bool:
    """Does the plan pass the pre-hop safety check at every point?"""
    servers_by_id = servers_by_id or {}
    depot_wp = plan.path[0]
    e = drone.energy_capacity
    i = 0
    while i < len(plan.path) - 1:
        origin, target = plan.path[i], plan.path[i + 1]
        hop = drone.beta * model.hop_fly_max(origin, target, drone)
        if target.is_depot:
            if e - hop <= 0.0:
                return False
            e = drone.energy_capacity if i + 2 < len(plan.path) else e - hop
        else:
            if e <= _hop_bound(drone, origin, target, depot_wp):
                return False
            e -= hop + drone.gamma * model.planned_visit_time(
                plan, i + 1, drone, servers_by_id)
        i += 1
    return True


def _engine_hop_bound(scenario, conservative):
    """The runtime's pre-hop safety bound, for plan walks that must agree
    with where the engine actually inserts depot detours."""
    if scenario.servers:
        latency = max(s.msg_latency for s in scenario.servers)
    else:
        latency = 0.0
    margin = (2 + 4 * len(scenario.servers)) * latency

    def bound(drone, origin, target, depot_wp):
        b = (drone.beta * model.hop_fly_max(origin, target, drone)
             + drone.gamma * (drone.sense_time + drone.local_proc_time))
        if conservative:
            b += drone.beta * model.hop_fly_max(target, depot_wp, drone)
            b += drone.gamma * margin
        return b

    return bound


def insert_detours(plan, drone, servers_by_id=None, bound_fn=None,
                   fly_time_fn=None):
    """Insert depot detours at the latest safe positions.

    Walks the plan forward simulating the flight energy spend; whenever the
    next POI hop fails the safety bound, a depot stop is inserted right
    before it. Latest-possible insertion with full battery swaps is
    detour-count minimal for this feasibility notion. By default the walk
    charges worst-case hop times; `fly_time_fn` substitutes known (traced)
    hop times so the walk mirrors a concrete run.
    """
    servers_by_id = servers_by_id or {}
    bound_fn = bound_fn or _hop_bound
    fly_time_fn = fly_time_fn or (
        lambda origin, target: model.hop_fly_max(origin, target, drone))
    if len(plan.path) < 3:
        raise InfeasibleMission("mission has no points of interest")
    path = list(plan.path)
    sched = list(plan.schedule)
    waits = list(plan.waits)
    depot_wp = path[0]
    view = engine._PlanView(path, sched, waits)
    e = drone.energy_capacity
    i = 0
    while i < len(path) - 1:
        origin, target = path[i], path[i + 1]
        if target.is_depot:
            if e - drone.beta * fly_time_fn(origin, target) <= 0.0:
                raise InfeasibleMission(
                    f"cannot reach the depot from {origin.location.key}")
            if i + 2 < len(path):
                e = drone.energy_capacity
            i += 1
            continue
        if e <= bound_fn(drone, origin, target, depot_wp):
            if origin.is_depot:
                raise InfeasibleMission(
                    f"point {target.location.key} unreachable on a full battery")
            path.insert(i + 1, depot_wp)
            sched.insert(i + 1, model.LOCAL)
            waits.insert(i + 1, 0.0)
            continue
        e -= drone.beta * fly_time_fn(origin, target)
        e -= drone.gamma * model.planned_visit_time(view, i + 1, drone, servers_by_id)
        i += 1
    return model.MissionPlan(path, sched, waits)


def _plan_walk_feasible(plan, drone, servers_by_id, bound_fn, fly_time_fn):
    """True when the forward energy walk never trips the safety bound, so a
    run that follows the plan will not have to insert extra depot stops."""
    path = plan.path
    depot_wp = path[0]
    view = engine._PlanView(path, plan.schedule, plan.waits)
    e = drone.energy_capacity
    for i in range(len(path) - 1):
        origin, target = path[i], path[i + 1]
        if target.is_depot:
            if e - drone.beta * fly_time_fn(origin, target) <= 0.0:
                return False
            if i + 2 < len(path):
                e = drone.energy_capacity
            continue
        if e <= bound_fn(drone, origin, target, depot_wp):
            return False
        e -= drone.beta * fly_time_fn(origin, target)
        e -= drone.gamma * model.planned_visit_time(
            view, i + 1, drone, servers_by_id)
    return True


def relocate_detours(plan, drone, servers_by_id=None, bound_fn=None,
                     fly_time_fn=None):
    """Move each depot stop to its cheapest feasible slot.

    Keeps the stop count and the POI order; within the stretch between its
    neighbouring depot stops, each stop is shifted to the position with the
    smallest extra flight time (latest such position on ties) among those
    that keep the whole plan feasible under `_plan_walk_feasible`. With
    traced hop times this mirrors — and slightly generalizes — the runtime
    postponement rule, which only ever shifts stops later."""
    servers_by_id = servers_by_id or {}
    bound_fn = bound_fn or _hop_bound
    fly_time_fn = fly_time_fn or (
        lambda origin, target: model.hop_fly_max(origin, target, drone))

    def leg_cost(a, b):
        depot_wp = plan.path[0]
        return (fly_time_fn(a, depot_wp) + fly_time_fn(depot_wp, b)
                - fly_time_fn(a, b))

    path = list(plan.path)
    sched = list(plan.schedule)
    waits = list(plan.waits)

    def with_stop_at(base, base_s, base_w, k, j):
        """Re-insert the stop taken from index j after base index k."""
        return model.MissionPlan(
            base[:k + 1] + [path[j]] + base[k + 1:],
            base_s[:k + 1] + [sched[j]] + base_s[k + 1:],
            base_w[:k + 1] + [waits[j]] + base_w[k + 1:])

    for _ in range(4):
        moved = False
        j = 1
        while j < len(path) - 1:
            if not path[j].is_depot:
                j += 1
                continue
            prev_stop = max(i for i in range(j) if path[i].is_depot)
            next_stop = min(i for i in range(j + 1, len(path))
                            if path[i].is_depot)
            base = path[:j] + path[j + 1:]
            base_s = sched[:j] + sched[j + 1:]
            base_w = waits[:j] + waits[j + 1:]
            k0 = j - 1  # current slot: the stop sits after base[k0]
            best_k, best_cost = k0, leg_cost(base[k0], base[k0 + 1])
            for k in range(prev_stop + 1, next_stop - 2):
                if k == k0:
                    continue
                cost = leg_cost(base[k], base[k + 1])
                better = cost < best_cost - 1e-12
                tie_later = abs(cost - best_cost) <= 1e-12 and k > best_k
                if not (better or tie_later):
                    continue
                trial = with_stop_at(base, base_s, base_w, k, j)
                if _plan_walk_feasible(trial, drone, servers_by_id,
                                       bound_fn, fly_time_fn):
                    best_k, best_cost = k, cost
            if best_k != k0:
                trial = with_stop_at(base, base_s, base_w, best_k, j)
                path = list(trial.path)
                sched = list(trial.schedule)
                waits = list(trial.waits)
                moved = True
                j = max(j, best_k + 1)
            j += 1
        if not moved:
            break
    return model.MissionPlan(path, sched, waits)


# --- plans --------------------------------------------------------------------


def build_default_plan(scenario, drone_index):
    """No-offloading baseline plan and its analytic worst-case mission time."""
    points = scenario.missions[drone_index]
    drone = scenario.drones[drone_index]
    if not points:
        raise InfeasibleMission("mission has no points of interest")
    depot_wp = scenario.depot_waypoint()
    order = plan_tour(points, scenario.depot)
    path = [depot_wp] + [model.poi_waypoint(points[i]) for i in order] + [depot_wp]
    plan = model.MissionPlan(path, [model.LOCAL] * len(path), [0.0] * len(path))
    plan = insert_detours(plan, drone)
    default_time = model.plan_mission_time(plan, drone, scenario.servers_by_id)
    return plan, default_time


@dataclass
class PlanBundle:
    plans: list          # per-drone offline MissionPlan
    default_plans: list  # per-drone no-offloading MissionPlan
    default_times: list  # per-drone analytic worst-case baseline seconds
    iterations: int = 0
    converged: bool = True


def _paths_equal(a_path, b_path) -> bool:
    if len(a_path) != len(b_path):
        return False
    return all(
        wa.is_depot == wb.is_depot and wa.location.key == wb.location.key
        for wa, wb in zip(a_path, b_path)
    )


def _poi_states_to_schedule(path, states):
    """Expand per-visit states back onto a concrete path (depots stay local)."""
    sched = []
    k = 0
    for wp in path:
        if wp.is_depot:
            sched.append(model.LOCAL)
        else:
            sched.append(states[k])
            k += 1
    return sched


class _TimelineScheduler:
    """Greedy global-timeline scheduling, iterated to self-consistency.

    The fleet is run through the real engine under the given flight times;
    visits that land a clean reservation (single attempt, admitted at the
    queue tail, at the server free selection would pick) get that server
    frozen into the schedule, anything else computes locally. The process
    repeats until a run realizes exactly the planned path and schedule, so
    executing the published plan is guaranteed to reproduce the planned
    offloads - with or without renegotiation enabled.

    Planned waits are informative estimates (they feed visit-time budgets),
    so they are refreshed from each run but deliberately excluded from the
    convergence test: requiring exact wait replay makes admission cascades
    collapse the schedule.
    """

    def __init__(self, scenario, flight_trace, conservative,
                 strict_clean: bool = True):
        self.scenario = scenario
        self.trace = flight_trace
        self.conservative = conservative
        # strict mode keeps only clean (single-attempt, tail-admitted)
        # reservations; relaxed mode keeps anything that replays to the same
        # server, which the shrink loop still verifies run over run
        self.strict_clean = strict_clean
        self.bound_fn = _engine_hop_bound(scenario, conservative)
        self.n = len(scenario.drones)
        self.iterations = 0
        self.defaults = []
        self.default_times = []
        self.states = []  # per drone: per-POI entry, NEGOTIATE_ANY while open
        self.paths = []
        self.waits = []
        for m in range(self.n):
            dplan, dtime = build_default_plan(scenario, m)
            self.defaults.append(dplan)
            self.default_times.append(dtime)
            st = [
                model.NEGOTIATE_ANY
                if any(s.in_range(wp.location) for s in scenario.servers)
                else model.LOCAL
                for wp in dplan.path if not wp.is_depot
            ]
            self.states.append(st)
            self.paths.append(list(dplan.path))
            self.waits.append(list(dplan.waits))

    def seed_from(self, bundle):
        """Warm-start the schedule from another bundle's plans."""
        for m in range(self.n):
            entries = [bundle.plans[m].schedule[i]
                       for i, wp in enumerate(bundle.plans[m].path)
                       if not wp.is_depot]
            st = self.states[m]
            for k, entry in enumerate(entries):
                if st[k] != model.LOCAL:
                    st[k] = entry if entry != model.LOCAL else model.NEGOTIATE_ANY
            self.paths[m] = list(bundle.plans[m].path)
            self.waits[m] = list(bundle.plans[m].waits)

    def plans(self):
        return [
            model.MissionPlan(
                self.paths[m],
                _poi_states_to_schedule(self.paths[m], self.states[m]),
                self.waits[m])
            for m in range(self.n)
        ]

    def _run(self):
        self.iterations += 1
        return engine.run(self.scenario, self.plans(), self.default_times,
                          PolicyKind.PROPOSED, self.trace,
                          conservative_safety=self.conservative)

    def _poi_outcomes(self, result, m):
        realized, clean = result.realized_plans[m], result.realized_clean[m]
        return [(realized.schedule[i], clean[i])
                for i, wp in enumerate(realized.path) if not wp.is_depot]

    def _take_paths_waits(self, result, m):
        """Refresh the drone's planned path and waits from a run.

        The path is rebuilt canonically: intermediate depot stops are
        stripped and re-inserted at the latest position the runtime safety
        check would accept given the current schedule, so stops shifted by
        transient schedule churn can never accumulate across iterations.
        """
        realized = result.realized_plans[m]
        pois = [(wp, realized.waits[i])
                for i, wp in enumerate(realized.path) if not wp.is_depot]
        st = self.states[m]
        depot_wp = realized.path[0]
        path = [depot_wp] + [wp for wp, _ in pois] + [depot_wp]
        sched = _poi_states_to_schedule(path, st)
        waits = [0.0] + [
            w if st[k] not in (model.LOCAL, model.NEGOTIATE_ANY) else 0.0
            for k, (_, w) in enumerate(pois)
        ] + [0.0]
        drone = self.scenario.drones[m]

        def traced_fly(origin, target):
            factor = self.trace.factor(
                drone.id, origin.location.key, target.location.key)
            return factor * model.hop_fly_max(origin, target, drone)

        plan = insert_detours(
            model.MissionPlan(path, sched, waits),
            drone, self.scenario.servers_by_id,
            bound_fn=self.bound_fn, fly_time_fn=traced_fly)
        self.paths[m] = list(plan.path)
        self.waits[m] = list(plan.waits)

    def explore(self, iters):
        """Open visits grab clean admissions; broken ones retry next round."""
        for _ in range(iters):
            result = self._run()
            for m in range(self.n):
                st = self.states[m]
                for k, (entry, ok) in enumerate(self._poi_outcomes(result, m)):
                    if st[k] == model.LOCAL:
                        continue
                    if entry != model.LOCAL and (ok or not self.strict_clean):
                        st[k] = entry
                    elif st[k] != model.NEGOTIATE_ANY:
                        st[k] = model.NEGOTIATE_ANY
                self._take_paths_waits(result, m)

    def freeze_open(self):
        for st in self.states:
            for k, entry in enumerate(st):
                if entry == model.NEGOTIATE_ANY:
                    st[k] = model.LOCAL

    def shrink(self, cap):
        """Demote (or cleanly reassign) until path+schedule replay exactly."""
        for it in range(cap):
            before = self.plans()
            result = self._run()
            stable = True
            for m in range(self.n):
                st = self.states[m]
                for k, (entry, ok) in enumerate(self._poi_outcomes(result, m)):
                    if st[k] == model.LOCAL:
                        continue
                    keep = ok or not self.strict_clean
                    if entry == st[k] and keep:
                        continue
                    st[k] = entry if (entry != model.LOCAL and keep) else model.LOCAL
                    stable = False
                if not _paths_equal(before[m].path,
                                    result.realized_plans[m].path):
                    stable = False
                self._take_paths_waits(result, m)
            if stable:
                return True
        return False

    def repair(self):
        """One run with local visits reopened; keep only clean upgrades."""
        saved = [list(st) for st in self.states]
        for st in self.states:
            for k, entry in enumerate(st):
                if entry == model.LOCAL:
                    st[k] = model.NEGOTIATE_ANY
        result = self._run()
        added = 0
        for m in range(self.n):
            st = self.states[m]
            for k, (entry, ok) in enumerate(self._poi_outcomes(result, m)):
                if (saved[m][k] == model.LOCAL and entry != model.LOCAL
                        and (ok or not self.strict_clean)):
                    st[k] = entry
                    added += 1
                else:
                    st[k] = saved[m][k]
            self._take_paths_waits(result, m)
        return added


def _timeline_fixpoint(scenario, flight_trace, conservative,
                       explore_iters=12, repair_rounds=3, shrink_cap=25,
                       warm_bundle=None, strict_clean=True):
    sched = _TimelineScheduler(scenario, flight_trace, conservative,
                               strict_clean=strict_clean)
    if warm_bundle is not None:
        sched.seed_from(warm_bundle)
    if explore_iters:
        sched.explore(explore_iters)
    sched.freeze_open()
    converged = False
    for _ in range(repair_rounds):
        converged = sched.shrink(shrink_cap)
        if sched.repair() == 0 and converged:
            break
    converged = sched.shrink(shrink_cap)
    return PlanBundle(sched.plans(), sched.defaults, sched.default_times,
                      sched.iterations, converged)


def build_offline_bundle(scenario, conservative: bool = True) -> PlanBundle:
    """Offline plans under worst-case flight times (cached per scenario)."""
    key = (_scenario_key(scenario), conservative, "worst-case")
    if key not in _BUNDLE_CACHE:
        _BUNDLE_CACHE[key] = _timeline_fixpoint(
            scenario, trace_mod.WorstCaseTrace(), conservative)
    return _BUNDLE_CACHE[key]


def _realized_bundle(scenario, flight_trace, conservative, base):
    """Schedule an adaptive run actually realized, plus its fleet-min score.

    With full knowledge of the traced flight times, any executed outcome is
    itself a feasible static plan: rerun the fleet adaptively from the base
    plans under the trace, adopt every realized offload wholesale, and
    canonicalize the detour placement.
    """
    sched = _TimelineScheduler(scenario, flight_trace, conservative)
    result = engine.run(scenario, [p.copy() for p in base.plans],
                        base.default_times, PolicyKind.PROPOSED,
                        flight_trace, conservative_safety=conservative)
    run_min = _fleet_min(base.default_times, result.mission_times)
    for m in range(sched.n):
        sched.states[m] = [entry for entry, _ in sched._poi_outcomes(result, m)]
        sched._take_paths_waits(result, m)
    bundle = PlanBundle(sched.plans(), sched.defaults, sched.default_times,
                        1, True)
    return bundle, run_min


def _fleet_min(default_times, mission_times) -> float:
    """Minimum reduction over the fleet, on microsecond-quantized times so
    bundle scores compare exactly like the reported metrics."""
    return min(
        model.relative_reduction(dt, round(mt * 1_000_000) / 1_000_000)
        for dt, mt in zip(default_times, mission_times))


def _relocated_bundle(scenario, bundle, flight_trace, conservative) -> PlanBundle:
    """Copy of a bundle with every depot stop moved to its cheapest slot
    under the traced flight times."""
    bound_fn = _engine_hop_bound(scenario, conservative)
    plans = []
    for idx, plan in enumerate(bundle.plans):
        drone = scenario.drones[idx]

        def traced_fly(origin, target, drone=drone):
            factor = flight_trace.factor(
                drone.id, origin.location.key, target.location.key)
            return factor * model.hop_fly_max(origin, target, drone)

        plans.append(relocate_detours(
            plan, drone, scenario.servers_by_id,
            bound_fn=bound_fn, fly_time_fn=traced_fly))
    return PlanBundle(plans, bundle.default_plans, bundle.default_times,
                      bundle.iterations, bundle.converged)


def _bundle_fleet_min(scenario, bundle, flight_trace, conservative) -> float:
    result = engine.run(scenario, [p.copy() for p in bundle.plans],
                        bundle.default_times, PolicyKind.ORACLE,
                        flight_trace, conservative_safety=conservative)
    return _fleet_min(bundle.default_times, result.mission_times)


def build_oracle_bundle(scenario, flight_trace, conservative: bool = True) -> PlanBundle:
    """Plans built with the actual traced flight times (upper-bound benchmark).

    The timeline fixpoint is warm-started from the worst-case offline
    bundle. When its replayed fleet-minimum reduction falls short of what
    online adaptation achieves under the same trace, further fixpoints are
    warm-started from the realized schedules of adaptive runs (a legitimate
    move for an oracle: it knows the actual flight times) until one replays
    at least as well as the adaptive baseline, keeping the best overall.
    """
    factors = getattr(flight_trace, "factors", None)
    if factors is not None and all(f == 1.0 for f in factors.values()):
        # zero uncertainty: the traced times are the worst-case times, so
        # the oracle plan is by definition the offline plan
        return build_offline_bundle(scenario, conservative)
    key = (_scenario_key(scenario), conservative, flight_trace.checksum())
    if key not in _BUNDLE_CACHE:
        offline = build_offline_bundle(scenario, conservative)
        best = _timeline_fixpoint(scenario, flight_trace, conservative,
                                  explore_iters=4, repair_rounds=2,
                                  warm_bundle=offline)
        best_min = _bundle_fleet_min(scenario, best, flight_trace, conservative)

        def consider(cand, best, best_min):
            """Score the candidate and its relocated variant; keep the best."""
            for bundle in (cand, _relocated_bundle(scenario, cand,
                                                   flight_trace, conservative)):
                score = _bundle_fleet_min(scenario, bundle, flight_trace,
                                          conservative)
                if score > best_min:
                    best, best_min = bundle, score
            return best, best_min

        best, best_min = consider(best, best, best_min)
        target = None
        bases = [offline, best]
        for _ in range(5):
            if not bases:
                break
            realized, run_min = _realized_bundle(
                scenario, flight_trace, conservative, bases.pop(0))
            if target is None:
                # what the adaptive policy scores from the offline plan
                target = run_min
            if best_min >= target:
                break
            cand = _timeline_fixpoint(scenario, flight_trace, conservative,
                                      explore_iters=4, repair_rounds=2,
                                      warm_bundle=realized)
            best, best_min = consider(cand, best, best_min)
            bases.append(cand)
        _BUNDLE_CACHE[key] = best
    return _BUNDLE_CACHE[key]


def _scenario_key(scenario):
    return (
        scenario.name, scenario.grid_width, scenario.grid_height,
        scenario.spacing, scenario.depot.key,
        tuple(tuple(p.key for p in pts) for pts in scenario.missions),
        tuple(scenario.drones), tuple(scenario.servers),
    )


def sample_trace(scenario, seed: int, u: float = None):
    """Seeded flight-time trace covering every segment any policy can fly."""
    if u is None:
        u = scenario.uncertainty
    tours = []
    for m in range(len(scenario.drones)):
        points = scenario.missions[m]
        order = plan_tour(points, scenario.depot)
        tours.append([points[i] for i in order])
    return trace_mod.sample_trace_from_tours(
        u, seed, tours, scenario.depot,
        drone_ids=[d.id for d in scenario.drones])
