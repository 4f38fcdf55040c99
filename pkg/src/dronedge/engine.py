"""Deterministic discrete-event simulation kernel.

One shared clock drives every drone and server. Events are dispatched in
(time, insertion-sequence) order, so equal-time events replay identically
and protocol races are reproducible. All physical processes (flying,
sensing, computing, transfers, battery switches) are expressed through the
timing model in `model`; actual hop times come from the flight-time trace.
"""

import heapq
from dataclasses import dataclass, field

from . import model
from .errors import EnergyViolation, TraceMismatch
from .policies import PolicyKind, profile_for
from .protocol import Decision, Discipline, Negotiator, ServerNode


@dataclass
class RunResult:
    records: list                 # event log, list of tuples (kind, t, ...)
    realized_plans: list          # per drone: (path, schedule, waits) as flown
    mission_times: list           # per drone, seconds
    realized_clean: list = field(default_factory=list)  # per drone: list[bool]
    trace_checksum: str = ""


class _PlanView:
    """Zero-copy adapter exposing live drone lists as a plan triplet."""

    __slots__ = ("path", "schedule", "waits")

    def __init__(self, path, schedule, waits):
        self.path = path
        self.schedule = schedule
        self.waits = waits


class _DroneRt:
    __slots__ = (
        "spec", "path", "sched", "waits", "i", "default_time", "red",
        "flown_since", "hover_since", "flown_total", "hover_total",
        "depot_total", "phase_mark", "sense_done_t", "negotiator",
        "session_seq", "r_path", "r_sched", "r_waits", "r_clean",
        "done", "done_at",
    )

    def __init__(self, spec, plan, default_time, servers_by_id):
        self.spec = spec
        self.path = list(plan.path)
        self.sched = list(plan.schedule)
        self.waits = list(plan.waits)
        self.i = 0
        self.default_time = default_time
        self.red = model.relative_reduction(
            default_time,
            model.plan_mission_time(plan, spec, servers_by_id),
        )
        self.flown_since = 0.0   # flying seconds since last battery switch
        self.hover_since = 0.0   # hovering seconds since last battery switch
        self.flown_total = 0.0
        self.hover_total = 0.0
        self.depot_total = 0.0
        self.phase_mark = 0.0
        self.sense_done_t = 0.0
        self.negotiator = None
        self.session_seq = 0
        self.r_path = [plan.path[0]]
        self.r_sched = [model.LOCAL]
        self.r_waits = [0.0]
        self.r_clean = [True]  # per visit: offload handshake had no re-offers
        self.done = False
        self.done_at = 0.0

    def energy(self, at_poi_extra=0.0) -> float:
        return (self.spec.energy_capacity
                - self.spec.beta * self.flown_since
                - self.spec.gamma * (self.hover_since + at_poi_extra))

    def view(self) -> _PlanView:
        return _PlanView(self.path, self.sched, self.waits)


class Simulation:
    def __init__(self, scenario, plans, default_times, policy: PolicyKind,
                 trace, conservative_safety: bool = True):
        self.scenario = scenario
        self.policy = policy
        self.profile = profile_for(policy)
        self.trace = trace
        self.conservative = conservative_safety
        self.servers_by_id = scenario.servers_by_id
        self.nodes = {
            s.id: ServerNode(s, self.profile.discipline) for s in scenario.servers
        }
        self.drones = [
            _DroneRt(spec, plan, dt, self.servers_by_id)
            for spec, plan, dt in zip(scenario.drones, plans, default_times)
        ]
        self.drones_by_id = {d.spec.id: d for d in self.drones}
        self.depot_wp = scenario.depot_waypoint()
        self.now = 0.0
        self._heap = []
        self._seq = 0
        self.records = []
        # clock cost of a full negotiation round, charged to the safety
        # margin so a visit's protocol chatter can never strand the drone
        latency = max(s.msg_latency for s in scenario.servers) if scenario.servers else 0.0
        k = len(scenario.servers)
        self.protocol_margin = (2 + 4 * k) * latency

    # -- kernel ---------------------------------------------------------------

    def at(self, time, fn, *args):
        self._seq += 1
        heapq.heappush(self._heap, (time, self._seq, fn, args))

    def log(self, kind, *cols):
        self.records.append((kind, self.now) + cols)

    def run(self) -> RunResult:
        for d in self.drones:
            self._begin_hop(d)
        while self._heap:
            self.now, _, fn, args = heapq.heappop(self._heap)
            fn(*args)
        realized = [
            model.MissionPlan(d.r_path, d.r_sched, d.r_waits) for d in self.drones
        ]
        return RunResult(
            records=self.records,
            realized_plans=realized,
            mission_times=[d.done_at for d in self.drones],
            realized_clean=[d.r_clean for d in self.drones],
            trace_checksum=self.trace.checksum(),
        )

    # -- energy ---------------------------------------------------------------

    def _check_energy(self, d, at_poi_extra=0.0):
        if d.energy(at_poi_extra) <= 0.0:
            raise EnergyViolation(d.spec.id, self.now)

    def _fly_max(self, a, b, spec):
        return model.hop_fly_max(a, b, spec)

    def _safety_bound(self, d, origin, target):
        """Worst-case energy needed for the next hop and visit; conservative
        mode also reserves the return leg to the depot and the negotiation
        chatter of one visit."""
        spec = d.spec
        e_fly = spec.beta * self._fly_max(origin, target, spec)
        e_visit = spec.gamma * (spec.sense_time + spec.local_proc_time)
        bound = e_fly + e_visit
        if self.conservative:
            bound += spec.beta * self._fly_max(target, self.depot_wp, spec)
            bound += spec.gamma * self.protocol_margin
        return bound

    def _needs_detour(self, d) -> bool:
        origin, target = d.path[d.i], d.path[d.i + 1]
        return d.energy() <= self._safety_bound(d, origin, target)

    def _insert_detour(self, d, index):
        d.path.insert(index, self.depot_wp)
        d.sched.insert(index, model.LOCAL)
        d.waits.insert(index, 0.0)
        self.log("detour_insert", d.spec.id, index)

    # -- flight ---------------------------------------------------------------

    def _begin_hop(self, d):
        if d.i >= len(d.path) - 1:
            return
        if not d.path[d.i + 1].is_depot and self._needs_detour(d):
            self._insert_detour(d, d.i + 1)
        origin, target = d.path[d.i], d.path[d.i + 1]
        factor = self.trace.factor(d.spec.id, origin.location.key, target.location.key)
        dur = factor * self._fly_max(origin, target, d.spec)
        self.log("depart", d.spec.id, origin.location.key, target.location.key, dur)
        self.at(self.now + dur, self._arrive, d, dur)

    def _arrive(self, d, dur):
        d.flown_since += dur
        d.flown_total += dur
        self._check_energy(d)
        d.i += 1
        wp = d.path[d.i]
        self.log("arrive", d.spec.id, wp.location.key, int(wp.is_depot), dur, d.energy())
        d.r_path.append(wp)
        d.r_sched.append(model.LOCAL)
        d.r_waits.append(0.0)
        d.r_clean.append(True)
        if wp.is_depot:
            if d.i == len(d.path) - 1:
                d.done = True
                d.done_at = self.now
                self.log("mission_done", d.spec.id,
                         d.flown_total, d.hover_total, d.depot_total, d.energy())
            else:
                self.log("battery_start", d.spec.id)
                self.at(self.now + d.spec.depot_service_time, self._battery_done, d)
        else:
            d.phase_mark = self.now
            self.at(self.now + d.spec.sense_time, self._sense_done, d)

    def _battery_done(self, d):
        d.flown_since = 0.0
        d.hover_since = 0.0
        d.depot_total += d.spec.depot_service_time
        self.log("battery_done", d.spec.id)
        self._post_visit(d)

    # -- visits ---------------------------------------------------------------

    def _sense_done(self, d):
        d.hover_since += d.spec.sense_time
        d.hover_total += d.spec.sense_time
        d.phase_mark = self.now
        d.sense_done_t = self.now
        self._check_energy(d)
        self.log("sense_done", d.spec.id)

        entry = d.sched[d.i]
        wants_offload = (
            self.profile.negotiate_everywhere
            or (entry != model.LOCAL and (self.profile.negotiates or self.profile.follow_schedule))
        )
        if not wants_offload:
            self._start_local(d)
            return
        point = d.path[d.i].location
        if self.profile.negotiate_everywhere:
            # plan-agnostic: willing to wait at most what local compute costs
            budget = d.spec.local_proc_time
        else:
            budget = (
                model.planned_visit_time(d.view(), d.i, d.spec, self.servers_by_id)
                - d.spec.sense_time
            )
        if self.profile.follow_schedule:
            servers = [self.servers_by_id[entry]]
            force = entry
        else:
            servers = [s for s in self.scenario.servers if s.in_range(point)]
            force = None
        if not servers:
            self._start_local(d)
            return
        d.session_seq += 1
        session = (d.spec.id, d.session_seq)
        d.negotiator = Negotiator(d.spec, servers, d.red, budget, session,
                                  force_server=force)
        d.negotiator.start()
        for srv in servers:
            self.at(self.now + srv.msg_latency, self._server_inquiry, d, srv.id, session)

    def _server_inquiry(self, d, server_id, session):
        from .protocol import Inquiry

        node = self.nodes[server_id]
        inq = Inquiry(d.spec.id, session, d.red)
        self.log("msg", f"d{d.spec.id}", f"s{server_id}", "inquiry", f"red={d.red:.6f}")
        offer = node.handle_inquiry(inq, d.spec, self.now)
        self.at(self.now + node.spec.msg_latency, self._drone_offer, d, offer)

    def _drone_offer(self, d, offer):
        self.log("msg", f"s{offer.server}", f"d{d.spec.id}", "offer",
                 f"resp={offer.resp_time:.6f}")
        action = d.negotiator.on_offer(offer)
        if action is not None:
            self._exec_action(d, action)

    def _exec_action(self, d, action):
        if action.decision is Decision.LOCAL:
            self._start_local(d)
        elif action.decision is Decision.SEND_RESERVE:
            node = self.nodes[action.server]
            self.log("msg", f"d{d.spec.id}", f"s{action.server}", "reserve",
                     f"resp={action.reserve.resp_time:.6f};max={action.reserve.resp_time_max:.6f}")
            self.at(self.now + node.spec.msg_latency,
                    self._server_reserve, d, node, action.reserve)
        else:  # OFFLOAD: ship the input data
            node = self.nodes[action.server]
            arrival = self.now + model.input_transfer_time(d.spec, node.spec)
            self.at(arrival, self._data_arrived, d, node, action.deadline)

    def _server_reserve(self, d, node, reserve):
        from .protocol import Ack

        reply = node.handle_reserve(reserve, d.spec, self.now)
        if isinstance(reply, Ack):
            self.log("msg", f"s{node.spec.id}", f"d{d.spec.id}", "ack",
                     f"deadline={reply.deadline:.6f}")
            self.at(self.now + node.spec.msg_latency, self._drone_ack, d, reply)
        else:
            self.log("msg", f"s{node.spec.id}", f"d{d.spec.id}", "reoffer",
                     f"resp={reply.resp_time:.6f}")
            self.at(self.now + node.spec.msg_latency, self._drone_reoffer, d, reply)

    def _drone_ack(self, d, ack):
        self._exec_action(d, d.negotiator.on_ack(ack))

    def _drone_reoffer(self, d, msg):
        self._exec_action(d, d.negotiator.on_reoffer(msg))

    def _data_arrived(self, d, node, deadline):
        self.log("data_arrived", node.spec.id, d.spec.id)
        self._pump(node)

    def _pump(self, node):
        act = node.next_dispatch(self.now)
        if act is None:
            return
        if act[0] == "wait":
            self.at(act[1], self._pump, node)
            return
        _, commitment, done_at = act
        wait = max(0.0, self.now - commitment.data_ready_at)
        self.log("dispatch_start", node.spec.id, commitment.drone,
                 commitment.data_ready_at, wait)
        self.at(done_at, self._dispatch_done, node, commitment, wait)

    def _dispatch_done(self, node, commitment, wait):
        node.finish_running(self.now)
        self.log("dispatch_done", node.spec.id, commitment.drone,
                 commitment.deadline)
        d = self.drones_by_id[commitment.drone]
        out = model.output_transfer_time(d.spec, node.spec)
        self.at(self.now + out, self._result_received, d, node, wait)
        self._pump(node)

    def _result_received(self, d, node, wait):
        span = self.now - d.phase_mark
        d.hover_since += span
        d.hover_total += span
        d.phase_mark = self.now
        self._check_energy(d)
        d.r_sched[-1] = node.spec.id
        d.r_waits[-1] = wait
        d.r_clean[-1] = (d.negotiator.reserve_attempts == 1
                         and d.negotiator.acked_appended)
        d.negotiator = None
        self.log("result_recv", d.spec.id, node.spec.id, wait)
        self._post_visit(d)

    def _start_local(self, d):
        d.negotiator = None
        self.log("local_start", d.spec.id)
        self.at(self.now + d.spec.local_proc_time, self._local_done, d)

    def _local_done(self, d):
        span = self.now - d.phase_mark
        d.hover_since += span
        d.hover_total += span
        d.phase_mark = self.now
        self._check_energy(d)
        self.log("local_done", d.spec.id)
        self._post_visit(d)

    # -- after every hop's visit ----------------------------------------------

    def _post_visit(self, d):
        if self.profile.optimizes_path:
            self._optimize_path(d)
        self._update_reduction(d)
        self._begin_hop(d)

    def _update_reduction(self, d):
        remainder = model.plan_remainder_time(
            d.view(), d.i, d.spec, self.servers_by_id)
        d.red = model.relative_reduction(d.default_time, self.now + remainder)

    def _detour_leg_cost(self, d, a, b):
        """Extra flight seconds of a depot stop between a and b, using the
        flight times this drone will actually realize on those legs."""
        spec = d.spec

        def leg(x, y):
            factor = self.trace.factor(
                d.spec.id, x.location.key, y.location.key)
            return factor * self._fly_max(x, y, spec)

        return leg(a, self.depot_wp) + leg(self.depot_wp, b) - leg(a, b)

    def _optimize_path(self, d):
        """Postpone the next planned depot detour when flight-time savings
        let the drone fly further before switching batteries.

        The detour is moved only when (a) a forward worst-case walk shows
        the per-hop safety check would still accept it strictly later, and
        (b) the relocated detour legs are no costlier than the current ones
        under the realized flight times. The stop is re-inserted at the
        walk's position immediately, so the detour is shifted, never lost,
        and total flight time can only shrink."""
        path, spec = d.path, d.spec
        j = None
        for idx in range(d.i + 1, len(path) - 1):
            if path[idx].is_depot:
                j = idx
                break
        if j is None:
            return
        e = d.energy()
        pos = d.i
        trimmed = path[:j] + path[j + 1:]
        t_sched = d.sched[:j] + d.sched[j + 1:]
        t_waits = d.waits[:j] + d.waits[j + 1:]
        walk_view = _PlanView(trimmed, t_sched, t_waits)
        refail = None  # hop index in `trimmed` where the check would fire
        while pos < len(trimmed) - 1:
            origin, target = trimmed[pos], trimmed[pos + 1]
            if target.is_depot:
                # Reaching the next stop (or the final landing) without the
                # detour would merge battery legs and change the stop count;
                # only in-segment postponement is allowed.
                return
            if e <= self._safety_bound(d, origin, target):
                refail = pos
                break
            e -= spec.beta * self._fly_max(origin, target, spec)
            e -= spec.gamma * model.planned_visit_time(
                walk_view, pos + 1, spec, self.servers_by_id)
            pos += 1
        if refail is None:
            return
        if refail + 1 <= j:
            return  # would re-insert where it already is: no gain
        saved = self._detour_leg_cost(d, path[j - 1], path[j + 1])
        cost = self._detour_leg_cost(
            d, trimmed[refail], trimmed[refail + 1])
        if cost > saved + 1e-12:
            return  # relocation would lengthen the flight: keep it
        depot_wp = d.path[j]
        depot_sched = d.sched[j]
        depot_wait = d.waits[j]
        del d.path[j]
        del d.sched[j]
        del d.waits[j]
        self.log("detour_remove", d.spec.id, j)
        # `refail` indexes the trimmed path; the depot goes right after it.
        new_j = refail + 1
        d.path.insert(new_j, depot_wp)
        d.sched.insert(new_j, depot_sched)
        d.waits.insert(new_j, depot_wait)
        self.log("detour_insert", d.spec.id, new_j)


def run(scenario, plans, default_times, policy: PolicyKind, trace,
        conservative_safety: bool = True) -> RunResult:
    """Execute all drones concurrently and return the metrics source log."""
    sim = Simulation(scenario, plans, default_times, policy, trace,
                     conservative_safety)
    return sim.run()
