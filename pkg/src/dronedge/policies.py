"""The four per-drone execution strategies wired over the engine."""

from dataclasses import dataclass
from enum import Enum

from .protocol import Discipline


class PolicyKind(Enum):
    PROPOSED = "proposed"
    FOLLOW_PLAN = "follow_plan"
    OPPORTUNISTIC = "opportunistic"
    ORACLE = "oracle"


@dataclass(frozen=True)
class PolicyProfile:
    negotiates: bool          # run the selection protocol where the plan offloads
    negotiate_everywhere: bool  # ignore the plan's schedule, try every point
    follow_schedule: bool     # reserve the planned server directly, wait as needed
    optimizes_path: bool      # postpone/eliminate depot detours from savings
    discipline: Discipline


# The oracle follows, literally and without renegotiation, a plan built
# from the actual flight times; it differs from follow_plan only in the
# plan it is handed.
PROFILES = {
    PolicyKind.PROPOSED: PolicyProfile(
        negotiates=True, negotiate_everywhere=False, follow_schedule=False,
        optimizes_path=True, discipline=Discipline.PRIORITY_BY_REDUCTION),
    PolicyKind.FOLLOW_PLAN: PolicyProfile(
        negotiates=False, negotiate_everywhere=False, follow_schedule=True,
        optimizes_path=False, discipline=Discipline.FCFS),
    PolicyKind.OPPORTUNISTIC: PolicyProfile(
        negotiates=True, negotiate_everywhere=True, follow_schedule=False,
        optimizes_path=True, discipline=Discipline.FCFS),
    PolicyKind.ORACLE: PolicyProfile(
        negotiates=False, negotiate_everywhere=False, follow_schedule=True,
        optimizes_path=False, discipline=Discipline.FCFS),
}


def profile_for(kind: PolicyKind) -> PolicyProfile:
    return PROFILES[kind]
