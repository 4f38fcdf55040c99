"""Decentralized offloading negotiation: drone and server state machines.

Both endpoints are sans-IO: they consume messages plus the current
simulation time and return messages/decisions, so the same code runs under
the event engine and under synchronous test drivers.

Server admission keeps two promises at once: pending requests are ordered
so drones with a worse expected reduction go first, and an ACKed request is
a hard commitment that is never pushed past its accepted deadline. A new
request is therefore inserted at the best priority position that preserves
every existing deadline, or re-offered.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from . import model
from .errors import ProtocolError


class Discipline(Enum):
    PRIORITY_BY_REDUCTION = "priority"
    FCFS = "fcfs"


@dataclass(frozen=True)
class Inquiry:
    drone: int
    session: tuple
    reduction: float  # drone's current expected relative reduction, <= 1


@dataclass(frozen=True)
class Offer:
    server: int
    session: tuple
    resp_time: float


@dataclass(frozen=True)
class Reserve:
    drone: int
    session: tuple
    resp_time: float      # the offer being accepted
    resp_time_max: float  # hard upper bound the drone will tolerate
    reduction: float
    proc_needed: float


@dataclass(frozen=True)
class Ack:
    server: int
    session: tuple
    deadline: float  # absolute time by which the result will be dispatched
    appended: bool = True  # admitted at the queue tail (no priority jump)


@dataclass(frozen=True)
class ReOffer:
    server: int
    session: tuple
    resp_time: float


@dataclass
class Commitment:
    drone: int
    session: tuple
    reduction: float
    proc_needed: float
    resp_time_max: float
    admitted_at: float
    data_ready_at: float  # when the input data will have fully arrived
    deadline: float       # absolute dispatch deadline (hard)
    seq: int = 0          # admission order tie-breaker


class ServerNode:
    """Queue state and message handlers for one edge server."""

    def __init__(self, spec: model.ServerSpec, discipline: Discipline):
        self.spec = spec
        self.discipline = discipline
        self.queue: list[Commitment] = []
        self.running: Optional[Commitment] = None
        self.running_done_at: float = 0.0
        self._session_floor: dict = {}
        self._admit_seq = 0
        self.requests_served = 0
        self.requests_declined = 0
        self.busy_seconds = 0.0

    # -- internals ----------------------------------------------------------

    def _residual(self, now: float) -> float:
        if self.running is None:
            return 0.0
        return max(0.0, self.running_done_at - now)

    def _natural_position(self, reduction: float) -> int:
        if self.discipline is Discipline.FCFS:
            return len(self.queue)
        # worse (lower) reduction first; existing entries win ties
        pos = 0
        for c in self.queue:
            if c.reduction <= reduction:
                pos += 1
            else:
                break
        return pos

    def _deadline_arrival_offset(self, now: float) -> float:
        # ack latency plus input transfer: earliest the data can be here
        return now + self.spec.msg_latency + 0.0  # input transfer added per drone

    def _chain_ok(self, candidate_idx: int, cand_proc: float,
                  cand_data_ready: float, now: float) -> bool:
        """Would inserting the candidate at candidate_idx violate a deadline?"""
        t = max(now, self.running_done_at if self.running else now)
        items = self.queue[:candidate_idx] + [None] + self.queue[candidate_idx:]
        for item in items:
            if item is None:
                t = max(t, cand_data_ready) + cand_proc
            else:
                t = max(t, item.data_ready_at) + item.proc_needed
                if t > item.deadline + 1e-12:
                    return False
        return True

    def _feasible_position(self, reduction: float, proc: float,
                           data_ready: float, now: float) -> int:
        for idx in range(self._natural_position(reduction), len(self.queue) + 1):
            if self._chain_ok(idx, proc, data_ready, now):
                return idx
        return len(self.queue)  # appending never delays anyone

    def _plain_response(self, idx: int, proc: float, now: float) -> float:
        return self._residual(now) + sum(c.proc_needed for c in self.queue[:idx]) + proc

    def _response_estimate(self, drone_spec: model.DroneSpec, reduction: float,
                           now: float) -> float:
        proc = self.spec.proc_time
        data_ready = now + self.spec.msg_latency + model.input_transfer_time(
            drone_spec, self.spec)
        idx = self._feasible_position(reduction, proc, data_ready, now)
        return self._plain_response(idx, proc, now)

    def _monotone(self, session: tuple, resp: float) -> float:
        resp = max(resp, self._session_floor.get(session, 0.0))
        self._session_floor[session] = resp
        return resp

    # -- message handlers ----------------------------------------------------

    def handle_inquiry(self, inq: Inquiry, drone_spec: model.DroneSpec,
                       now: float) -> Offer:
        """Non-binding offer: the queue is left untouched."""
        resp = self._response_estimate(drone_spec, inq.reduction, now)
        return Offer(self.spec.id, inq.session, self._monotone(inq.session, resp))

    def handle_reserve(self, msg: Reserve, drone_spec: model.DroneSpec, now: float):
        """Admit the request, or re-offer if its bound can no longer be met."""
        if msg.resp_time_max < msg.resp_time:
            raise ProtocolError("resp_time_max below accepted resp_time")
        proc = self.spec.proc_time
        data_ready = now + self.spec.msg_latency + model.input_transfer_time(
            drone_spec, self.spec)
        idx = self._feasible_position(msg.reduction, proc, data_ready, now)
        achievable = self._plain_response(idx, proc, now)
        if achievable > msg.resp_time_max + 1e-12:
            self.requests_declined += 1
            return ReOffer(self.spec.id, msg.session,
                           self._monotone(msg.session, achievable))
        self._admit_seq += 1
        commitment = Commitment(
            drone=msg.drone,
            session=msg.session,
            reduction=msg.reduction,
            proc_needed=proc,
            resp_time_max=msg.resp_time_max,
            admitted_at=now,
            data_ready_at=data_ready,
            deadline=data_ready + msg.resp_time_max,
            seq=self._admit_seq,
        )
        appended = idx == len(self.queue)
        self.queue.insert(idx, commitment)
        self._session_floor.pop(msg.session, None)
        return Ack(self.spec.id, msg.session, now + achievable, appended)

    # -- service loop --------------------------------------------------------

    def next_dispatch(self, now: float):
        """What the sequential service loop should do next.

        Returns ('start', commitment, done_at), ('wait', wake_time) when the
        head's input has not fully arrived, or None when idle/empty.
        """
        if self.running is not None or not self.queue:
            return None
        head = self.queue[0]
        if head.data_ready_at > now + 1e-12:
            return ("wait", head.data_ready_at)
        head = self.queue.pop(0)
        self.running = head
        self.running_done_at = now + head.proc_needed
        self.busy_seconds += head.proc_needed
        self.requests_served += 1
        return ("start", head, self.running_done_at)

    def finish_running(self, now: float) -> Commitment:
        if self.running is None:
            raise ProtocolError("no computation running")
        done = self.running
        self.running = None
        return done


class Decision(Enum):
    SEND_RESERVE = "reserve"
    OFFLOAD = "offload"
    LOCAL = "local"


@dataclass
class Action:
    decision: Decision
    server: int = model.LOCAL
    reserve: Optional[Reserve] = None
    deadline: float = 0.0


class Negotiator:
    """Drone-side inquiry/selection/reservation loop for one waypoint visit.

    Terminates within 2*K reserve attempts (K = servers in range): offers
    per session never decrease and the drone falls back to local computation
    once no offer beats onboard processing.
    """

    def __init__(self, drone: model.DroneSpec, servers: list, reduction: float,
                 planned_offload_budget: float, session: tuple,
                 force_server: Optional[int] = None):
        self.drone = drone
        self.servers = {s.id: s for s in servers}
        self.reduction = reduction
        self.budget = planned_offload_budget
        self.session = session
        self.force_server = force_server  # plan-following mode: no selection
        self.offers: dict = {}
        self.reserve_attempts = 0
        self.max_attempts = 2 * len(servers)
        self.finished = False
        self.acked_appended = True  # whether the final Ack appended at tail

    def start(self) -> list:
        """Inquiries to broadcast; empty means compute locally right away."""
        if not self.servers:
            self.finished = True
            return []
        return [Inquiry(self.drone.id, self.session, self.reduction)
                for _ in self.servers]

    def inquiry_targets(self) -> list:
        return sorted(self.servers)

    def on_offer(self, offer: Offer) -> Optional[Action]:
        if offer.session != self.session:
            raise ProtocolError("offer for unknown session")
        self.offers[offer.server] = offer.resp_time
        if len(self.offers) < len(self.servers):
            return None  # still collecting the broadcast round
        return self._select()

    def on_reoffer(self, msg: ReOffer) -> Action:
        if msg.session != self.session:
            raise ProtocolError("re-offer for unknown session")
        self.offers[msg.server] = msg.resp_time
        return self._select()

    def on_ack(self, ack: Ack) -> Action:
        if ack.session != self.session:
            raise ProtocolError("ack for unknown session")
        self.finished = True
        self.acked_appended = ack.appended
        return Action(Decision.OFFLOAD, server=ack.server, deadline=ack.deadline)

    def _select(self) -> Action:
        if self.force_server is not None:
            best_id = self.force_server
            best_resp = self.offers[best_id]
        else:
            best_resp, best_id = min(
                (resp, sid) for sid, resp in self.offers.items())
            beneficial = model.offload_time(
                self.drone, self.servers[best_id], best_resp
            ) < self.drone.local_proc_time
            if not beneficial:
                self.finished = True
                return Action(Decision.LOCAL)
        if self.force_server is None and self.reserve_attempts >= self.max_attempts:
            self.finished = True
            return Action(Decision.LOCAL)
        self.reserve_attempts += 1
        reserve = Reserve(
            drone=self.drone.id,
            session=self.session,
            resp_time=best_resp,
            resp_time_max=max(best_resp, self.budget),
            reduction=self.reduction,
            proc_needed=self.servers[best_id].proc_time,
        )
        return Action(Decision.SEND_RESERVE, server=best_id, reserve=reserve)
