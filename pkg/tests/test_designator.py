"""Description construction, grounding monotonicity, and the knowledge rules."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planproj.designator import (
    DEFAULT_OBJECT_KNOWLEDGE,
    BothArmsOccupiedError,
    Description,
    DuplicateKeyError,
    KeyPoseTrajectory,
    LocationConstraint,
    MissingGraspPoseError,
    MissingTypeError,
    NoValidSampleError,
    PropertyOverrideError,
    UnknownObjectTypeError,
    allowed_grasps,
    an_action,
    choose_arm,
    choose_grasp,
    extend,
    get_property,
    grasp_params,
    grasp_pose_for,
    lifting_trajectory,
    make_description,
    reaching_trajectory,
    sample_base_location,
    the_object,
)
from planproj.geomworld import Body, Pose2D, Pose3D, Rect, RobotState, WorldState

from conftest import make_table_world


# -- construction ---------------------------------------------------------------


def test_minimal_action_description():
    desc = make_description("action", "an", [("type", "picking-up")])
    assert len(desc.properties) == 1
    assert desc.get("type") == "picking-up"


def test_nested_object_description():
    pose = Pose3D(1.0, 2.0, 0.9, 0.0)
    obj = make_description("object", "the", [("type", "cup"), ("pose", pose)])
    action = an_action("picking-up", ("object", obj))
    assert action.get("object").get("pose") == pose


def test_duplicate_key_rejected():
    with pytest.raises(DuplicateKeyError):
        make_description("action", "an", [("type", "x"), ("type", "y")])


def test_missing_type_rejected():
    with pytest.raises(MissingTypeError):
        make_description("action", "an", [("arm", "left")])


def test_extend_appends_property():
    pick = an_action("picking-up")
    grounded = extend(pick, [("arm", "left")])
    assert grounded.get("arm") == "left"
    assert pick.get("arm") is None


def test_extend_empty_is_identity():
    desc = an_action("picking-up")
    assert extend(desc, []) is desc


def test_extend_refuses_override():
    desc = extend(an_action("picking-up"), [("arm", "left")])
    with pytest.raises(PropertyOverrideError):
        extend(desc, [("arm", "right")])


def test_get_property_semantics():
    obj = the_object("cup")
    desc = extend(an_action("picking-up"), [("object", obj), ("arm", "left")])
    assert get_property(desc, "arm") == "left"
    assert get_property(desc, "missing-key") is None
    assert get_property(desc, "object") is obj


_value_strategy = st.one_of(
    st.text(min_size=1, max_size=8),
    st.integers(-1000, 1000),
    st.floats(allow_nan=False, allow_infinity=False, width=32),
)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.tuples(st.text(min_size=1, max_size=6), _value_strategy), max_size=6),
)
def test_grounding_prefix_property(additions):
    """Any extend chain keeps the original property list as a prefix."""
    desc = an_action("picking-up")
    current = desc
    for key, value in additions:
        if current.has(key):
            continue
        current = extend(current, [(key, value)])
        assert current.properties[: len(desc.properties)] == desc.properties


# -- trajectories ----------------------------------------------------------------


def test_trajectory_label_order_enforced():
    grasp = Pose3D(1.0, 0.0, 0.9, 0.0)
    pre = Pose3D(0.9, 0.0, 0.9, 0.0)
    KeyPoseTrajectory((("pre-grasp", pre), ("grasp", grasp)))
    with pytest.raises(ValueError):
        KeyPoseTrajectory((("grasp", grasp), ("pre-grasp", pre)))
    with pytest.raises(ValueError):
        KeyPoseTrajectory(())


def test_reaching_trajectory_front_grasp_offsets():
    # cup standoff is 0.02; front approach retreats along -x of the object frame
    pose = Pose3D(1.0, 0.0, 0.9, 0.0)
    traj = reaching_trajectory("cup", "right", "front", pose)
    grasp = traj.pose_for("grasp")
    pre = traj.pose_for("pre-grasp")
    assert grasp.x == pytest.approx(1.0 - 0.02)
    assert grasp.y == pytest.approx(0.0)
    assert grasp.z == pytest.approx(0.9)
    assert pre.x == pytest.approx(grasp.x - 0.10)
    assert pre.y == pytest.approx(0.0)


def test_reaching_trajectory_top_grasp_is_vertical():
    pose = Pose3D(0.5, 0.5, 0.93, 1.1)
    traj = reaching_trajectory("bowl", "left", "top", pose)
    grasp = traj.pose_for("grasp")
    pre = traj.pose_for("pre-grasp")
    assert pre.x == pytest.approx(grasp.x)
    assert pre.y == pytest.approx(grasp.y)
    assert pre.z == pytest.approx(grasp.z + 0.10)


def test_reaching_trajectory_is_pure():
    pose = Pose3D(1.0, 0.2, 0.9, 0.4)
    assert reaching_trajectory("milk", "left", "back", pose) == reaching_trajectory(
        "milk", "left", "back", pose
    )


def test_lifting_trajectory_raises_grasp_pose():
    pose = Pose3D(1.0, 0.0, 0.90, 0.0)
    reach = reaching_trajectory("cup", "right", "front", pose)
    lift = lifting_trajectory("cup", "right", "front", reach)
    lift_pose = lift.pose_for("lift")
    grasp = reach.pose_for("grasp")
    assert lift_pose.z == pytest.approx(grasp.z + 0.08)
    assert (lift_pose.x, lift_pose.y, lift_pose.yaw) == (grasp.x, grasp.y, grasp.yaw)


def test_lifting_trajectory_requires_grasp_label():
    only_pre = KeyPoseTrajectory((("pre-grasp", Pose3D(0.0, 0.0, 1.0, 0.0)),))
    with pytest.raises(MissingGraspPoseError):
        lifting_trajectory("cup", "right", "front", only_pre)


@settings(max_examples=100, deadline=None)
@given(
    object_type=st.sampled_from(sorted(DEFAULT_OBJECT_KNOWLEDGE)),
    x=st.floats(-2, 2),
    y=st.floats(-2, 2),
    yaw=st.floats(-math.pi, math.pi),
)
def test_reach_then_lift_satisfies_label_order(object_type, x, y, yaw):
    pose = Pose3D(x, y, 0.9, yaw)
    for grasp in allowed_grasps(object_type):
        reach = reaching_trajectory(object_type, "left", grasp, pose)
        lift = lifting_trajectory(object_type, "left", grasp, reach)
        combined = KeyPoseTrajectory(reach.steps + lift.steps)
        assert combined.labels == ("pre-grasp", "grasp", "lift")


# -- knowledge rules ---------------------------------------------------------------


def test_grasp_params_table_values():
    assert grasp_params("cup") == (0.09, 15.0)
    assert grasp_params("spoon") == (0.05, 10.0)


def test_grasp_params_unknown_type():
    with pytest.raises(UnknownObjectTypeError):
        grasp_params("laptop")


def test_choose_grasp_fixed_sets():
    rng = random.Random(3)
    assert choose_grasp("bowl", rng) == "top"
    assert choose_grasp("spoon", rng) == "top"
    assert choose_grasp("milk", rng) in ("front", "back")


def test_choose_grasp_image_equals_allowed_set():
    for object_type, entry in DEFAULT_OBJECT_KNOWLEDGE.items():
        seen = {choose_grasp(object_type, random.Random(seed)) for seed in range(200)}
        assert seen == set(entry.grasps)


def test_choose_grasp_deterministic_per_seed():
    picks = [choose_grasp("milk", random.Random(99)) for _ in range(5)]
    assert len(set(picks)) == 1


def test_choose_arm_prefers_free_arm():
    robot = RobotState()
    robot.arms["left"].attachment = "cup-1"
    assert choose_arm(the_object("cup"), robot, random.Random(0)) == "right"


def test_choose_arm_both_occupied():
    robot = RobotState()
    robot.arms["left"].attachment = "a"
    robot.arms["right"].attachment = "b"
    with pytest.raises(BothArmsOccupiedError):
        choose_arm(the_object("cup"), robot, random.Random(0))


def test_choose_arm_uniform_over_seeds():
    robot = RobotState()
    seen = {choose_arm(the_object("cup"), robot, random.Random(seed)) for seed in range(50)}
    assert seen == {"left", "right"}


def test_grasp_pose_back_grasp_faces_away():
    pose = Pose3D(1.0, 0.0, 0.9, 0.0)
    front = grasp_pose_for("cup", "front", pose)
    back = grasp_pose_for("cup", "back", pose)
    assert front.x < pose.x < back.x
    assert back.yaw == pytest.approx(math.pi)


# -- base-location sampling -----------------------------------------------------------


def test_sample_base_location_respects_annulus(rng):
    world = WorldState(robot=RobotState())
    reference = Pose3D(0.0, 0.0, 0.9, 0.0)
    constraint = LocationConstraint("reachable-for", reference, (0.5, 0.9))
    for _ in range(20):
        pose = sample_base_location([reference], [constraint], world, rng)
        distance = math.hypot(pose.x, pose.y)
        assert 0.5 <= distance <= 0.9
        # the sampled pose faces the reference
        bearing = math.atan2(-pose.y, -pose.x)
        assert abs(bearing - pose.theta) < 1e-9


def test_sample_base_location_deterministic():
    world = WorldState(robot=RobotState())
    reference = Pose3D(0.0, 0.0, 0.9, 0.0)
    constraint = LocationConstraint("reachable-for", reference, (0.5, 0.9))
    first = sample_base_location([reference], [constraint], world, random.Random(11))
    second = sample_base_location([reference], [constraint], world, random.Random(11))
    assert first == second


def test_sample_base_location_infeasible_world(rng):
    # one slab covers the whole annulus: every candidate collides
    world = WorldState(
        bodies={"slab": Body("slab", Rect(-2.0, -2.0, 2.0, 2.0), 0.0, 1.0, "furniture")},
        robot=RobotState(),
    )
    reference = Pose3D(0.0, 0.0, 0.9, 0.0)
    constraint = LocationConstraint("reachable-for", reference, (0.5, 0.9))
    with pytest.raises(NoValidSampleError):
        sample_base_location([reference], [constraint], world, rng, max_attempts=40)


def test_sample_base_location_honors_visibility(rng):
    world = make_table_world()
    world.add_body(Body("pillar", Rect(0.45, -0.2, 0.75, 0.2), 0.0, 2.0, "furniture"))
    target = Pose3D(1.1, 0.0, 0.8, 0.0)
    constraint = LocationConstraint("visible-from", target, (0.8, 1.6))
    from planproj.geomworld import visible

    for _ in range(10):
        pose = sample_base_location([target], [constraint], world, rng)
        eye = Pose3D(pose.x, pose.y, world.robot.eye_height, pose.theta)
        assert visible(world, eye, target)


def test_sample_base_location_requires_reference(rng):
    world = WorldState(robot=RobotState())
    with pytest.raises(ValueError):
        sample_base_location([], [], world, rng)
