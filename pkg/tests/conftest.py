"""Shared fixtures: micro scenarios, cached bundles, and audit helpers."""

import pytest

from dronedge import model, planner, scenarios


def micro_scenario(with_server: bool) -> scenarios.Scenario:
    """One drone, one point of interest 20 m from the depot."""
    servers = []
    if with_server:
        servers = [model.ServerSpec(id=1, location=model.GridPoint(10, 10))]
    return scenarios.Scenario(
        name="micro",
        grid_width=21, grid_height=21, spacing=20.0,
        depot=model.GridPoint(10, 10),
        missions=[[model.GridPoint(10, 11)]],
        drones=[model.DroneSpec(id=0)],
        servers=servers,
    )


@pytest.fixture(scope="session")
def small20():
    return scenarios.small20()


@pytest.fixture(scope="session")
def large20():
    return scenarios.large20()


@pytest.fixture(scope="session")
def mixed10_10():
    return scenarios.mixed10_10()


@pytest.fixture(scope="session")
def small20_bundle(small20):
    return planner.build_offline_bundle(small20, True)


def audit_commitments(records):
    """Every completed offload must finish by its committed deadline.

    Returns the number of audited completions; raises AssertionError on any
    violation.
    """
    audited = 0
    for rec in records:
        if rec[0] == "dispatch_done":
            kind, t, server_id, drone_id, deadline = rec
            assert t <= deadline + 1e-9, (
                f"server {server_id} finished drone {drone_id}'s job at "
                f"{t:.6f}, past its committed deadline {deadline:.6f}")
            audited += 1
    return audited
