"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class EnergyViolation(SimulationError):
    """A drone's energy reserve reached zero mid-air. The run is invalid."""

    def __init__(self, drone_id, time, message=""):
        self.drone_id = drone_id
        self.time = time
        super().__init__(
            message or f"drone {drone_id} ran out of energy at t={time:.3f}s"
        )


class TraceMismatch(SimulationError):
    """A flight-time trace does not cover the hop a run needs."""


class InfeasibleMission(SimulationError):
    """No detour placement can keep the mission energy-safe."""


class ProtocolError(SimulationError):
    """Malformed or out-of-session protocol message."""


class ScenarioError(SimulationError):
    """Scenario/config file failed validation."""
