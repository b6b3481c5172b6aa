"""Geometric oracles, discrete motions, and snapshot/restore."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planproj.geomworld import (
    Body,
    ForeignSnapshotError,
    MotionPreconditionError,
    NoiseModel,
    ObjectInstance,
    Pose2D,
    Pose3D,
    Rect,
    RobotState,
    WorldState,
    base_collision_free,
    base_route,
    detect,
    normalize_angle,
    reachable,
    segment_obstruction,
    stable_placement,
    visible,
)

from conftest import make_table_world
from geom_oracles import brute_base_collision, brute_reachable, brute_stable_placement, brute_visible


def test_normalize_angle_range():
    for angle in (-7.0, -math.pi, 0.0, math.pi, 9.42, 100.0):
        wrapped = normalize_angle(angle)
        assert -math.pi < wrapped <= math.pi
    assert normalize_angle(math.pi) == pytest.approx(math.pi)
    assert normalize_angle(-math.pi) == pytest.approx(math.pi)
    assert normalize_angle(3 * math.pi) == pytest.approx(math.pi)


# -- base collision -------------------------------------------------------------


def _one_rect_world(radius: float = 0.3) -> WorldState:
    robot = RobotState(base_radius=radius)
    return WorldState(
        bodies={"block": Body("block", Rect(0.0, 0.0, 1.0, 1.0), 0.0, 1.0, "furniture")},
        robot=robot,
    )


def test_base_collision_clearance_cases():
    world = _one_rect_world()
    # clearance to the unit square from (2, 2) is sqrt(2) ~ 1.414
    assert base_collision_free(world, Pose2D(2.0, 2.0, 0.0))
    # pose inside the rectangle
    assert not base_collision_free(world, Pose2D(0.5, 0.5, 0.0))
    # clearance 0.2 < radius 0.3
    assert not base_collision_free(world, Pose2D(1.2, 0.5, 0.0))


def test_base_collision_agrees_with_disk_sampling():
    world = _one_rect_world()
    rng = random.Random(5)
    for _ in range(60):
        pose = Pose2D(rng.uniform(-1.0, 2.5), rng.uniform(-1.0, 2.5), 0.0)
        expected, margin = brute_base_collision(world, pose)
        if margin <= 0.02:
            continue
        assert base_collision_free(world, pose) == expected


# -- visibility -------------------------------------------------------------------


def test_visible_empty_world():
    world = WorldState()
    assert visible(world, Pose3D(0, 0, 1.4), Pose3D(2, 0, 0.8))


def test_visible_blocked_by_tall_body():
    world = WorldState(
        bodies={"wall": Body("wall", Rect(0.9, -0.5, 1.1, 0.5), 0.0, 2.0, "furniture")}
    )
    assert not visible(world, Pose3D(0, 0, 1.4), Pose3D(2, 0, 0.8))


def test_visible_over_low_occluder():
    world = WorldState(
        bodies={"crate": Body("crate", Rect(0.9, -0.5, 1.1, 0.5), 0.0, 0.5, "furniture")}
    )
    assert visible(world, Pose3D(0, 0, 1.4), Pose3D(2, 0, 0.8))


def test_visible_agrees_with_segment_walk():
    rng = random.Random(6)
    world = WorldState(
        bodies={
            "a": Body("a", Rect(0.5, -0.4, 1.0, 0.4), 0.0, 1.1, "furniture"),
            "b": Body("b", Rect(1.4, -1.0, 1.9, -0.2), 0.0, 0.7, "furniture"),
        }
    )
    for _ in range(80):
        eye = Pose3D(rng.uniform(-1, 0.4), rng.uniform(-1.5, 1.5), rng.uniform(1.0, 1.6))
        target = Pose3D(rng.uniform(1.0, 2.5), rng.uniform(-1.5, 1.5), rng.uniform(0.5, 1.2))
        expected, margin = brute_visible(world, eye, target)
        if margin <= 0.02:
            continue
        assert visible(world, eye, target) == expected


# -- reachability ------------------------------------------------------------------


def test_reachable_basic_annulus():
    world = WorldState()
    robot = world.robot  # base at origin facing +x; right shoulder at (0, -0.22)
    config = reachable(world, robot, "right", Pose3D(0.6, -0.22, 0.8, 0.0), "front")
    assert config is not None
    assert config.extension == pytest.approx(0.6)
    assert reachable(world, robot, "right", Pose3D(2.0, -0.22, 0.8, 0.0), "front") is None
    # the shoulder point itself is inside the annulus hole
    assert reachable(world, robot, "right", Pose3D(0.0, -0.22, 0.8, 0.0), "front") is None


def test_reachable_height_band():
    world = WorldState()
    robot = world.robot
    assert reachable(world, robot, "left", Pose3D(0.6, 0.22, 0.1, 0.0), "front") is None
    assert reachable(world, robot, "left", Pose3D(0.6, 0.22, 1.5, 0.0), "front") is None


def test_reachable_blocked_by_furniture():
    world = WorldState(
        bodies={"fridge": Body("fridge", Rect(0.3, -0.6, 0.5, 0.6), 0.0, 1.9, "furniture")}
    )
    robot = world.robot
    assert reachable(world, robot, "right", Pose3D(0.7, -0.22, 0.8, 0.0), "front") is None


def test_reachable_agrees_with_brute_force():
    rng = random.Random(7)
    world = WorldState(
        bodies={"hutch": Body("hutch", Rect(0.4, 0.1, 0.9, 0.9), 0.0, 1.6, "furniture")}
    )
    for _ in range(80):
        pose = Pose3D(rng.uniform(-1, 1.2), rng.uniform(-1, 1.2), rng.uniform(0.2, 1.4), 0.0)
        arm = rng.choice(("left", "right"))
        expected, margin = brute_reachable(world, arm, pose)
        if margin <= 0.02:
            continue
        assert (reachable(world, world.robot, arm, pose, "front") is not None) == expected


# -- placement ---------------------------------------------------------------------


def test_stable_placement_on_empty_table(table_world):
    assert stable_placement(table_world, "cup", Pose3D(1.6, 0.3, 0.8, 0.0))


def test_stable_placement_rejects_overhang(table_world):
    # footprint hangs over the table's eastern edge
    assert not stable_placement(table_world, "cup", Pose3D(2.0, 0.0, 0.8, 0.0))


def test_stable_placement_rejects_object_overlap(table_world):
    # cup-1 stands at (1.1, 0.0); placing another cup on top of it must fail
    assert not stable_placement(table_world, "cup", Pose3D(1.12, 0.02, 0.8, 0.0))


def test_stable_placement_rejects_wrong_height(table_world):
    assert not stable_placement(table_world, "cup", Pose3D(1.6, 0.3, 0.9, 0.0))


def test_stable_placement_agrees_with_brute_force(table_world):
    rng = random.Random(8)
    dims = (0.08, 0.08, 0.1)
    for _ in range(60):
        pose = Pose3D(rng.uniform(0.7, 2.2), rng.uniform(-0.8, 0.8), 0.8, 0.0)
        expected, margin = brute_stable_placement(table_world, "cup", pose, dims)
        if margin <= 0.02:
            continue
        assert stable_placement(table_world, "cup", pose, ignore={"probe"}) == expected


# -- motions -------------------------------------------------------------------------


def test_set_base_round_trip(table_world):
    pose = Pose2D(0.5, -0.5, 1.0)
    table_world.set_base(pose)
    assert table_world.robot.base == pose


def test_attach_moves_rigidly_with_base(table_world):
    cup = table_world.objects["cup-1"]
    grasp_point = Pose3D(cup.pose.x - 0.02, cup.pose.y, cup.pose.z, 0.0)
    table_world.set_tool("right", grasp_point)
    table_world.attach("right", "cup-1", grasp_point)
    before = cup.pose
    base = table_world.robot.base
    table_world.set_base(Pose2D(base.x + 1.0, base.y, base.theta))
    assert cup.pose.x == pytest.approx(before.x + 1.0)
    assert cup.pose.y == pytest.approx(before.y)
    assert cup.pose.z == pytest.approx(before.z)


def test_attach_requires_tool_at_grasp_point(table_world):
    cup = table_world.objects["cup-1"]
    far = Pose3D(cup.pose.x - 0.2, cup.pose.y, cup.pose.z, 0.0)
    table_world.set_tool("right", far)
    with pytest.raises(MotionPreconditionError):
        table_world.attach("right", "cup-1", cup.pose)


def test_detach_without_attachment(table_world):
    with pytest.raises(MotionPreconditionError):
        table_world.detach("left", Pose3D(1.5, 0.0, 0.8, 0.0))


def test_detach_assigns_support(table_world):
    cup = table_world.objects["cup-1"]
    grasp_point = Pose3D(cup.pose.x, cup.pose.y, cup.pose.z, 0.0)
    table_world.set_tool("left", grasp_point)
    table_world.attach("left", "cup-1", grasp_point)
    assert cup.support is None
    table_world.detach("left", Pose3D(1.6, 0.3, 0.8, 0.0))
    assert cup.support == "table"
    table_world.validate()


@settings(max_examples=60, deadline=None)
@given(
    moves=st.lists(
        st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-math.pi, math.pi)),
        min_size=1,
        max_size=6,
    )
)
def test_rigid_attachment_invariant(moves):
    """Tool->object offset stays constant through arbitrary motion chains."""
    world = make_table_world(bounds=None)
    cup = world.objects["cup-1"]
    grasp_point = Pose3D(cup.pose.x, cup.pose.y, cup.pose.z, 0.0)
    world.set_tool("right", grasp_point)
    world.attach("right", "cup-1", grasp_point)
    offset = world.robot.arms["right"].attach_offset
    for dx, dy, dtheta in moves:
        base = world.robot.base
        world.set_base(Pose2D(base.x + dx, base.y + dy, base.theta + dtheta))
        tool = world.robot.arms["right"].tool_pose
        world.set_tool("right", Pose3D(tool.x + dx / 2, tool.y - dy / 2, tool.z, tool.yaw))
        from planproj.geomworld import pose_in_frame

        current = pose_in_frame(world.robot.arms["right"].tool_pose, cup.pose)
        assert all(abs(a - b) < 1e-9 for a, b in zip(current[:3], offset[:3]))


# -- perception ------------------------------------------------------------------------


def test_detect_zero_noise_is_identity(table_world, rng):
    eye = Pose3D(0.0, 0.0, 1.4, 0.0)
    pose = detect(table_world, eye, "cup", NoiseModel.zero(), rng)
    assert pose == table_world.objects["cup-1"].pose


def test_detect_none_when_occluded(table_world, rng):
    table_world.add_body(Body("screen", Rect(0.5, -0.4, 0.7, 0.4), 0.0, 2.0, "furniture"))
    eye = Pose3D(0.0, 0.0, 1.4, 0.0)
    assert detect(table_world, eye, "cup", NoiseModel.zero(), rng) is None


def test_detect_none_beyond_range(table_world, rng):
    eye = Pose3D(-2.5, 0.0, 1.4, 0.0)
    assert detect(table_world, eye, "cup", NoiseModel.zero(), rng) is None


def test_detect_forced_yaw_flip(table_world, rng):
    eye = Pose3D(0.0, 0.0, 1.4, 0.0)
    noise = NoiseModel(sigma=0.0, clip=0.0, p_flip=1.0)
    pose = detect(table_world, eye, "cup", noise, rng)
    true_yaw = table_world.objects["cup-1"].pose.yaw
    assert normalize_angle(pose.yaw - true_yaw) == pytest.approx(math.pi)


def test_detect_noise_is_clipped(table_world):
    eye = Pose3D(0.0, 0.0, 1.4, 0.0)
    noise = NoiseModel(sigma=0.5, clip=0.05, p_flip=0.0)
    true_pose = table_world.objects["cup-1"].pose
    for seed in range(30):
        pose = detect(table_world, eye, "cup", noise, random.Random(seed))
        assert abs(pose.x - true_pose.x) <= 0.05 + 1e-12
        assert abs(pose.y - true_pose.y) <= 0.05 + 1e-12
        assert abs(pose.z - true_pose.z) <= 0.05 + 1e-12


# -- snapshot / restore -------------------------------------------------------------------


def test_snapshot_restore_round_trip(table_world):
    token = table_world.snapshot()
    state = table_world.canonical_state()
    cup = table_world.objects["cup-1"]
    grasp_point = Pose3D(cup.pose.x, cup.pose.y, cup.pose.z, 0.0)
    table_world.set_tool("left", grasp_point)
    table_world.attach("left", "cup-1", grasp_point)
    table_world.set_base(Pose2D(1.0, 1.0, 0.5))
    table_world.set_gripper("right", 0.02)
    assert table_world.canonical_state() != state
    table_world.restore(token)
    assert table_world.canonical_state() == state


def test_restore_twice_is_idempotent(table_world):
    token = table_world.snapshot()
    state = table_world.canonical_state()
    table_world.set_base(Pose2D(2.0, 2.0, 0.0))
    table_world.restore(token)
    table_world.restore(token)
    assert table_world.canonical_state() == state


def test_restore_foreign_token(table_world):
    other = make_table_world()
    token = other.snapshot()
    with pytest.raises(ForeignSnapshotError):
        table_world.restore(token)


def test_generation_counter_advances(table_world):
    before = table_world.generation
    table_world.set_base(Pose2D(0.1, 0.0, 0.0))
    table_world.set_head(0.2, 0.1)
    assert table_world.generation == before + 2


# -- routing ----------------------------------------------------------------------------


def test_base_route_straight_when_clear(table_world):
    route = base_route(table_world, Pose2D(0.0, 0.0, 0.0), Pose2D(0.0, 2.0, 0.0))
    assert route is not None
    assert route[-1] == Pose2D(0.0, 2.0, 0.0)


def test_base_route_detours_around_furniture():
    world = WorldState(
        bodies={"wall": Body("wall", Rect(-0.2, -1.5, 0.2, 1.5), 0.0, 1.0, "furniture")},
        robot=RobotState(base=Pose2D(-1.0, 0.0, 0.0)),
        bounds=Rect(-2.0, -2.5, 2.0, 2.5),
    )
    route = base_route(world, Pose2D(-1.0, 0.0, 0.0), Pose2D(1.0, 0.0, 0.0))
    assert route is not None
    # the path must leave the wall's y-band to get around it
    assert any(abs(p.y) > 1.5 for p in route[:-1])


def test_base_route_none_when_enclosed():
    world = WorldState(
        bodies={
            "north": Body("north", Rect(-1.0, 0.6, 1.0, 1.0), 0.0, 1.0, "furniture"),
            "south": Body("south", Rect(-1.0, -1.0, 1.0, -0.6), 0.0, 1.0, "furniture"),
            "east": Body("east", Rect(0.6, -1.0, 1.0, 1.0), 0.0, 1.0, "furniture"),
            "west": Body("west", Rect(-1.0, -1.0, -0.6, 1.0), 0.0, 1.0, "furniture"),
        },
        robot=RobotState(base=Pose2D(0.0, 0.0, 0.0)),
        bounds=Rect(-2.0, -2.0, 2.0, 2.0),
    )
    assert base_route(world, Pose2D(0.0, 0.0, 0.0), Pose2D(1.7, 1.7, 0.0)) is None


def test_segment_obstruction_reports_blocker(table_world):
    # below the table top: the table blocks
    low = Pose3D(0.4, 0.0, 0.70, 0.0)
    assert segment_obstruction(table_world, low, Pose3D(1.9, 0.0, 0.70, 0.0)) == "table"
    # above the table top at cup height: only the cup blocks
    mid = Pose3D(0.4, 0.0, 0.80, 0.0)
    assert segment_obstruction(table_world, mid, Pose3D(1.9, 0.0, 0.80, 0.0)) == "cup-1"
