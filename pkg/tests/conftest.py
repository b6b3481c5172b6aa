"""Shared world builders for the test suite."""

from __future__ import annotations

import random

import pytest

from planproj.geomworld import (
    Body,
    ObjectInstance,
    Pose2D,
    Pose3D,
    Rect,
    RobotState,
    WorldState,
)


def make_table_world(
    robot_pose: Pose2D = Pose2D(0.0, 0.0, 0.0),
    bounds: Rect | None = Rect(-3.0, -3.0, 4.0, 4.0),
) -> WorldState:
    """One table at the origin-east with a cup standing on it."""
    world = WorldState(
        bodies={"table": Body("table", Rect(0.8, -0.6, 2.0, 0.6), 0.0, 0.75, "surface")},
        robot=RobotState(base=robot_pose),
        bounds=bounds,
    )
    world.add_object(
        ObjectInstance("cup-1", "cup", Pose3D(1.1, 0.0, 0.8, 0.0), (0.08, 0.08, 0.1), "table")
    )
    return world


def make_two_surface_world() -> WorldState:
    """Pick surface and a separate delivery surface, one cup, free space around."""
    world = WorldState(
        bodies={
            "counter": Body("counter", Rect(0.8, -0.6, 2.0, 0.6), 0.0, 0.75, "surface"),
            "table": Body("table", Rect(-2.4, -0.6, -1.2, 0.6), 0.0, 0.7, "surface"),
        },
        robot=RobotState(base=Pose2D(0.0, 1.8, 0.0)),
        bounds=Rect(-3.6, -3.0, 3.6, 3.0),
    )
    world.add_object(
        ObjectInstance("cup-1", "cup", Pose3D(1.1, 0.0, 0.8, 0.0), (0.08, 0.08, 0.1), "counter")
    )
    return world


@pytest.fixture
def table_world() -> WorldState:
    return make_table_world()


@pytest.fixture
def transport_world() -> WorldState:
    return make_two_surface_world()


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)
