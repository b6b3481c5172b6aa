"""Fetch, deliver and transport plans with failure-recovery control flow.

Plans run against an executor that has two backends: a projected one that
teleports through key poses on the belief world with zero noise, and a
simulated-real one that drives a separate ground-truth world with perception
and controller noise while updating the belief from detections. The real
backend interpolates motions finely, so projection runs orders of magnitude
faster than execution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from random import Random
from typing import Callable

from . import designator as dsg
from .designator import (
    Description,
    LocationConstraint,
    NoValidSampleError,
    an_action,
    extend,
    grasp_pose_for,
    make_description,
)
from .geomworld import (
    ARMS,
    DETECT_RANGE,
    MotionPreconditionError,
    NoiseModel,
    Pose2D,
    Pose3D,
    WorldState,
    base_collision_free,
    base_route,
    find_visible_object,
    normalize_angle,
    point_obstruction,
    reachable,
    segment_obstruction,
    stable_placement,
    visible,
)
from .tasktree import Failure, LogicalClock, TaskPath, TaskRecorder, make_failure

#: Base-to-reference distance bounds used when sampling stand locations.
#: Deliberately optimistic (wider than the arm's reach annulus): stand points
#: are drawn from a costmap-style ring and reach is discovered by the
#: reachability check, which is where manipulation failures come from.
FETCH_BASE_BOUNDS = (0.45, 1.05)
SEARCH_BASE_BOUNDS = (0.90, 2.00)
DELIVER_BASE_BOUNDS = (0.50, 1.00)

#: Placement retry poses are drawn within this radius of the goal pose.
PLACEMENT_JITTER = 0.25

#: Vertical approach offset above the placing tool pose.
PRE_PLACE_HEIGHT = 0.10

#: Height of search view targets above the searched surface.
VIEW_TARGET_HEIGHT = 0.05

_FETCH_HANDLED = frozenset(
    {
        "navigation-pose-in-collision",
        "navigation-goal-not-reached",
        "manipulation-pose-unreachable",
        "manipulation-pose-in-collision",
        "gripper-closed-completely",
    }
)
_SEARCH_HANDLED = frozenset(
    {
        "navigation-pose-in-collision",
        "navigation-goal-not-reached",
        "ptu-goal-unreachable",
        "perception-object-not-found",
    }
)
_DELIVER_OUTER_HANDLED = frozenset(
    {"navigation-pose-in-collision", "navigation-goal-not-reached"}
)
_DELIVER_INNER_HANDLED = frozenset(
    {"manipulation-pose-unreachable", "manipulation-pose-in-collision"}
)

#: Controller-level failures retried in place before they reach the plan.
_CONTROLLER_RETRIABLE = frozenset({"manipulation-goal-not-reached"})


#: Carry posture for a held object: forward of the base, above furniture tops.
CARRY_FORWARD = 0.35
CARRY_LATERAL = 0.15
CARRY_HEIGHT = 1.10


def _carry_pose(robot, arm: str) -> Pose3D:
    base = robot.base
    c, s = math.cos(base.theta), math.sin(base.theta)
    side = CARRY_LATERAL if arm == "left" else -CARRY_LATERAL
    return Pose3D(
        base.x + CARRY_FORWARD * c - side * s,
        base.y + CARRY_FORWARD * s + side * c,
        CARRY_HEIGHT,
        base.theta,
    )


class PlanFailure(Exception):
    """Raised by plan code; carries the taxonomy failure being thrown."""

    def __init__(self, failure: Failure):
        super().__init__(f"{failure.kind}")
        self.failure = failure


class UnknownActionTypeError(ValueError):
    pass


@dataclass(frozen=True)
class PlanOutcome:
    """Result of performing one action: a grounded description or a failure."""

    description: Description | None = None
    failure: Failure | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    @classmethod
    def succeeded(cls, description: Description) -> "PlanOutcome":
        return cls(description=description, failure=None)

    @classmethod
    def failed(cls, failure: Failure) -> "PlanOutcome":
        return cls(description=None, failure=failure)


@dataclass
class RetryLimits:
    k_search: int = 4
    r_fetch: int = 20
    r_deliver_outer: int = 8
    r_deliver_inner: int = 4
    controller_retries: int = 2


@dataclass
class ProjectionSettings:
    enabled: bool = False
    n_runs: int = 4
    cost_fn: str = "distance"


class Executor:
    """Low-level motion primitives over a belief world (and optionally truth).

    The projected backend mutates only the belief world and is noise-free.
    The simulated-real backend drives the ground-truth world, mirrors robot
    motions into the belief, and updates believed object poses only through
    (noisy) detections.
    """

    def __init__(
        self,
        belief: WorldState,
        truth: WorldState | None,
        noise: NoiseModel,
        rng: Random,
        clock: LogicalClock,
        knowledge: dsg.KnowledgeTable | None = None,
        limits: RetryLimits | None = None,
        projection: ProjectionSettings | None = None,
        nav_step: float = 0.0006,
        tool_step: float = 0.00025,
        run_tag: int | None = None,
    ):
        self.belief = belief
        self.truth = truth
        self.noise = noise
        self.rng = rng
        self.clock = clock
        self.knowledge = knowledge
        self.limits = limits if limits is not None else RetryLimits()
        self.projection = projection if projection is not None else ProjectionSettings()
        self.nav_step = nav_step
        self.tool_step = tool_step
        self.run_tag = run_tag
        self.stats: dict = {"controller-retries": 0, "projections": []}

    @classmethod
    def projected(
        cls,
        belief: WorldState,
        rng: Random,
        clock: LogicalClock | None = None,
        knowledge: dsg.KnowledgeTable | None = None,
        limits: RetryLimits | None = None,
        run_tag: int | None = None,
    ) -> "Executor":
        return cls(
            belief=belief,
            truth=None,
            noise=NoiseModel.zero(),
            rng=rng,
            clock=clock if clock is not None else LogicalClock(),
            knowledge=knowledge,
            limits=limits,
            run_tag=run_tag,
        )

    @classmethod
    def simulated_real(
        cls,
        truth: WorldState,
        belief: WorldState,
        noise: NoiseModel,
        rng: Random,
        clock: LogicalClock | None = None,
        knowledge: dsg.KnowledgeTable | None = None,
        limits: RetryLimits | None = None,
        projection: ProjectionSettings | None = None,
    ) -> "Executor":
        return cls(
            belief=belief,
            truth=truth,
            noise=noise,
            rng=rng,
            clock=clock if clock is not None else LogicalClock(),
            knowledge=knowledge,
            limits=limits,
            projection=projection,
        )

    @property
    def is_projected(self) -> bool:
        return self.truth is None

    @property
    def checks_world(self) -> WorldState:
        """World against which execution-time geometry is evaluated."""
        return self.truth if self.truth is not None else self.belief

    def _worlds(self) -> tuple[WorldState, ...]:
        return (self.truth, self.belief) if self.truth is not None else (self.belief,)

    # -- primitives ----------------------------------------------------------

    def navigate(self, target: Pose2D) -> None:
        """Drive to a stand point. The real backend routes around furniture and
        follows the path finely; projection teleports after checking the goal."""
        self.clock.tick()
        world = self.checks_world
        if not base_collision_free(world, target):
            raise PlanFailure(make_failure("navigation-pose-in-collision", pose=target))
        self._assume_drive_posture()
        if not self.is_projected:
            route = base_route(world, world.robot.base, target)
            if route is None:
                raise PlanFailure(make_failure("navigation-pose-unreachable", pose=target))
            cursor = world.robot.base
            for waypoint in route:
                distance = cursor.distance_to(waypoint)
                steps = max(1, math.ceil(distance / self.nav_step))
                for i in range(1, steps + 1):
                    t = i / steps
                    probe = Pose2D(
                        cursor.x + t * (waypoint.x - cursor.x),
                        cursor.y + t * (waypoint.y - cursor.y),
                        target.theta,
                    )
                    if not base_collision_free(world, probe):
                        raise PlanFailure(
                            make_failure("navigation-pose-unreachable", pose=probe)
                        )
                cursor = waypoint
            if self.rng.random() < self.noise.p_nav_miss:
                raise PlanFailure(make_failure("navigation-goal-not-reached", pose=target))
        for w in self._worlds():
            w.set_base(target)

    def _assume_drive_posture(self) -> None:
        # Tuck free arms; bring a held object to a carry pose near the chest.
        for w in self._worlds():
            robot = w.robot
            for arm in ARMS:
                if robot.arms[arm].attachment is None:
                    w.park_arm(arm)
                else:
                    w.set_tool(arm, _carry_pose(robot, arm))

    def look_at(self, target: Pose3D) -> None:
        self.clock.tick()
        robot = self.checks_world.robot
        bearing = math.atan2(target.y - robot.base.y, target.x - robot.base.x)
        twist = normalize_angle(bearing - robot.base.theta)
        if abs(twist) > robot.head_yaw_limit:
            raise PlanFailure(make_failure("ptu-goal-unreachable", target=target, twist=twist))
        ground = math.hypot(target.x - robot.base.x, target.y - robot.base.y)
        pitch = math.atan2(robot.eye_height - target.z, max(ground, 1e-6))
        for w in self._worlds():
            w.set_head(twist, pitch)

    def detect(self, object_type: str) -> Pose3D:
        """Perceive an object of the type; the real backend refreshes the belief
        pose of every currently visible object, nearest first."""
        self.clock.tick()
        if self.is_projected:
            eye = self.belief.robot.eye_pose()
            instance = find_visible_object(self.belief, eye, object_type)
            if instance is None:
                raise PlanFailure(
                    make_failure("perception-object-not-found", object_type=object_type)
                )
            return instance.pose
        eye = self.truth.robot.eye_pose()
        in_view = []
        for obj in self.truth.objects.values():
            if obj.attached_arm is not None:
                continue
            distance = eye.distance_to(obj.pose)
            if distance <= DETECT_RANGE and visible(self.truth, eye, obj.pose):
                in_view.append((distance, obj.name, obj))
        in_view.sort(key=lambda item: (item[0], item[1]))
        result: Pose3D | None = None
        for distance, _name, obj in in_view:
            noisy = self.noise.perturb(obj.pose, self.rng, distance=distance)
            snapped, support = self._snap_to_surface(noisy, obj.dims)
            self.belief.upsert_object(obj.name, obj.type, snapped, obj.dims, support)
            if result is None and obj.type == object_type:
                result = snapped
        if result is None:
            raise PlanFailure(
                make_failure("perception-object-not-found", object_type=object_type)
            )
        return result

    def _snap_to_surface(
        self, noisy: Pose3D, dims: tuple[float, float, float]
    ) -> tuple[Pose3D, str | None]:
        # Perception reads object height off the supporting plane, so the
        # believed z is exact whenever a plausible surface is underneath.
        half = dims[2] / 2.0
        for body in self.belief.bodies.values():
            if body.kind != "surface":
                continue
            if not body.footprint.contains_point(noisy.x, noisy.y):
                continue
            rest_z = body.z_hi + half
            if abs(noisy.z - rest_z) < 0.15:
                return (Pose3D(noisy.x, noisy.y, rest_z, noisy.yaw), body.name)
        return (noisy, None)

    def move_tool(
        self, arm: str, target: Pose3D, grasp: str, ignore: frozenset[str] = frozenset()
    ) -> None:
        self.clock.tick()
        world = self.checks_world
        config = reachable(world, world.robot, arm, target, grasp)
        if config is None:
            raise PlanFailure(
                make_failure("manipulation-pose-unreachable", arm=arm, pose=target)
            )
        skip = set(ignore)
        held = world.robot.arms[arm].attachment
        if held is not None:
            skip.add(held)
        start = world.effective_tool_pose(arm)
        if self.is_projected:
            obstacle = segment_obstruction(world, start, target, ignore=skip)
            if obstacle is not None:
                raise PlanFailure(
                    make_failure(
                        "manipulation-pose-in-collision", arm=arm, obstacle=obstacle, pose=target
                    )
                )
        else:
            distance = start.distance_to(target)
            steps = max(1, math.ceil(distance / self.tool_step))
            for i in range(1, steps):
                t = i / steps
                x = start.x + t * (target.x - start.x)
                y = start.y + t * (target.y - start.y)
                z = start.z + t * (target.z - start.z)
                obstacle = point_obstruction(world, x, y, z, ignore=skip)
                if obstacle is not None:
                    raise PlanFailure(
                        make_failure(
                            "manipulation-pose-in-collision",
                            arm=arm,
                            obstacle=obstacle,
                            pose=target,
                        )
                    )
            if self.rng.random() < self.noise.p_manip_miss:
                raise PlanFailure(
                    make_failure("manipulation-goal-not-reached", arm=arm, pose=target)
                )
        for w in self._worlds():
            w.set_tool(arm, target)

    def set_gripper(self, arm: str, opening: float) -> None:
        self.clock.tick()
        for w in self._worlds():
            w.set_gripper(arm, opening)

    def grip(self, arm: str, object_name: str, grasp: str, object_type: str) -> None:
        """Close the gripper on the object; grasping air is a taxonomy failure."""
        self.clock.tick()
        if self.is_projected:
            obj = self.belief.objects.get(object_name)
            if obj is None:
                raise PlanFailure(
                    make_failure("gripper-closed-completely", object_name=object_name)
                )
            grasp_point = grasp_pose_for(object_type, grasp, obj.pose, self.knowledge)
            self.belief.attach(arm, object_name, grasp_point)
            return
        true_obj = self.truth.objects.get(object_name)
        if true_obj is None or true_obj.attached_arm is not None:
            self._close_empty(arm)
            raise PlanFailure(
                make_failure("gripper-closed-completely", object_name=object_name)
            )
        true_point = grasp_pose_for(object_type, grasp, true_obj.pose, self.knowledge)
        try:
            self.truth.attach(arm, object_name, true_point)
        except MotionPreconditionError as exc:
            self._close_empty(arm)
            raise PlanFailure(
                make_failure(
                    "gripper-closed-completely", object_name=object_name, check=exc.check
                )
            ) from exc
        believed = self.belief.objects.get(object_name)
        if believed is not None:
            believed_point = grasp_pose_for(object_type, grasp, believed.pose, self.knowledge)
            self.belief.attach(arm, object_name, believed_point)

    def _close_empty(self, arm: str) -> None:
        for w in self._worlds():
            w.set_gripper(arm, 0.0)

    def release(self, arm: str, placement: Pose3D, object_type: str, object_name: str) -> None:
        """Open-place the held object; an unstable spot aborts before letting go."""
        self.clock.tick()
        if not stable_placement(self.checks_world, object_type, placement, ignore={object_name}):
            raise PlanFailure(
                make_failure(
                    "manipulation-pose-in-collision", stage="release", pose=placement, arm=arm
                )
            )
        for w in self._worlds():
            if w.robot.arms[arm].attachment == object_name:
                w.detach(arm, placement)

    def tool_pose_for_placement(self, arm: str, placement: Pose3D) -> Pose3D:
        """Tool pose that puts the held object exactly at placement."""
        offset = self.belief.robot.arms[arm].attach_offset
        if offset is None:
            raise MotionPreconditionError("no-attachment", arm)
        ox, oy, oz, oyaw = offset
        tool_yaw = placement.yaw - oyaw
        c, s = math.cos(tool_yaw), math.sin(tool_yaw)
        return Pose3D(
            placement.x - (c * ox - s * oy),
            placement.y - (s * ox + c * oy),
            placement.z - oz,
            tool_yaw,
        )


# -- perform boundary -----------------------------------------------------------


def perform(executor: Executor, recorder: TaskRecorder, action: Description) -> PlanOutcome:
    """Record a task node for the action, dispatch its plan, close with the outcome.

    Failures thrown by the plan body are recorded on the node and returned;
    they do not escape the perform boundary.
    """
    action_type = action.get("type")
    plan = _PLAN_REGISTRY.get(action_type)
    if plan is None:
        raise UnknownActionTypeError(f"no plan for action type {action_type!r}")
    handle = recorder.open_task(action_type, [action])
    try:
        grounded = plan(executor, recorder, action)
    except PlanFailure as exc:
        recorder.close_failed(handle, exc.failure)
        return PlanOutcome.failed(exc.failure)
    recorder.close_succeeded(handle, grounded)
    return PlanOutcome.succeeded(grounded)


def _run_leaf(
    executor: Executor,
    recorder: TaskRecorder,
    label: str,
    action: Description,
    steps: list[Callable[[], None]],
) -> None:
    """Run primitives under a leaf task node, retrying controller misses."""
    handle = recorder.open_task(label, [action])
    try:
        for step in steps:
            _with_controller_retry(executor, step)
    except PlanFailure as exc:
        recorder.close_failed(handle, exc.failure)
        raise
    recorder.close_succeeded(handle, action)


def _with_controller_retry(executor: Executor, step: Callable[[], None]) -> None:
    attempts = 0
    while True:
        try:
            step()
            return
        except PlanFailure as exc:
            if (
                exc.failure.kind in _CONTROLLER_RETRIABLE
                and attempts < executor.limits.controller_retries
            ):
                attempts += 1
                executor.stats["controller-retries"] += 1
                continue
            raise


def run_parallel(
    executor: Executor,
    recorder: TaskRecorder,
    children: list[tuple[str, Description, list[Callable[[], None]]]],
) -> None:
    """Deterministic round-robin parallel block: one primitive per turn,
    leftmost child first. The first failure evaporates unfinished siblings."""
    parent = recorder.current
    entries = []
    for label, action, thunks in children:
        path = recorder.open_task(label, [action], parent=parent, make_current=False)
        entries.append({"path": path, "action": action, "thunks": list(thunks), "next": 0})
    pending = set(range(len(entries)))
    while pending:
        for index, entry in enumerate(entries):
            if index not in pending:
                continue
            try:
                _with_controller_retry(executor, entry["thunks"][entry["next"]])
            except PlanFailure as exc:
                recorder.close_failed(entry["path"], exc.failure)
                pending.discard(index)
                for other_index in sorted(pending):
                    recorder.close_evaporated(entries[other_index]["path"])
                raise
            entry["next"] += 1
            if entry["next"] >= len(entry["thunks"]):
                recorder.close_succeeded(entry["path"], entry["action"])
                pending.discard(index)


# -- location grounding ----------------------------------------------------------


def _location_pose(location: Description) -> Pose2D | None:
    pose = location.get("pose")
    return pose if isinstance(pose, Pose2D) else None


def _constraints_from_location(location: Description) -> tuple[list[Pose3D], list[LocationConstraint]]:
    lo = location.get("min-radius")
    hi = location.get("max-radius")
    bounds = (
        (float(lo), float(hi))
        if lo is not None and hi is not None
        else dsg.DEFAULT_BASE_RADIUS_BOUNDS
    )
    references: list[Pose3D] = []
    constraints: list[LocationConstraint] = []
    for kind in ("reachable-for", "visible-from", "near"):
        reference = location.get(kind)
        if isinstance(reference, Pose3D):
            references.append(reference)
            constraints.append(LocationConstraint(kind, reference, bounds))
    surface = location.get("on-surface")
    if isinstance(surface, str):
        constraints.append(LocationConstraint("on-surface", surface))
    return references, constraints


def _ground_base_pose(executor: Executor, location: Description) -> Pose2D:
    bound = _location_pose(location)
    if bound is not None:
        return bound
    references, constraints = _constraints_from_location(location)
    if not references:
        raise ValueError("location description has neither a pose nor a reference")
    try:
        return dsg.sample_base_location(references, constraints, executor.belief, executor.rng)
    except NoValidSampleError as exc:
        raise PlanFailure(
            make_failure(
                "navigation-pose-in-collision", detail="no-valid-base-sample", attempts=exc.attempts
            )
        ) from exc


# -- plan bodies ------------------------------------------------------------------


def _plan_navigating(executor: Executor, recorder: TaskRecorder, action: Description) -> Description:
    location = action.get("location")
    target = _ground_base_pose(executor, location)
    executor.navigate(target)
    return extend(action, (("pose", target),))


def _plan_looking(executor: Executor, recorder: TaskRecorder, action: Description) -> Description:
    target = action.get("target")
    executor.look_at(target)
    return extend(action, (("pose", target),))


def _plan_detecting(executor: Executor, recorder: TaskRecorder, action: Description) -> Description:
    object_desc = action.get("object")
    pose = executor.detect(object_desc.get("type"))
    return extend(action, (("pose", pose),))


def _plan_searching(executor: Executor, recorder: TaskRecorder, action: Description) -> Description:
    """Sample view poses on the search surface until the object is perceived."""
    object_desc = action.get("object")
    location = action.get("location")
    surface_name = location.get("surface")
    surface = executor.belief.bodies[surface_name]
    last_failure: Failure | None = None
    for _attempt in range(executor.limits.k_search):
        view = _sample_view_target(executor, surface)
        nav_location = make_description(
            "location",
            "a",
            (
                ("type", "scan-position"),
                ("visible-from", view),
                ("min-radius", SEARCH_BASE_BOUNDS[0]),
                ("max-radius", SEARCH_BASE_BOUNDS[1]),
            ),
        )
        outcome = perform(
            executor, recorder, an_action("navigating", ("location", nav_location))
        )
        if not outcome.ok:
            last_failure = outcome.failure
            if outcome.failure.kind in _SEARCH_HANDLED:
                continue
            raise PlanFailure(outcome.failure)
        outcome = perform(executor, recorder, an_action("looking", ("target", view)))
        if not outcome.ok:
            last_failure = outcome.failure
            if outcome.failure.kind in _SEARCH_HANDLED:
                continue
            raise PlanFailure(outcome.failure)
        outcome = perform(executor, recorder, an_action("detecting", ("object", object_desc)))
        if outcome.ok:
            return extend(action, (("pose", outcome.description.get("pose")),))
        last_failure = outcome.failure
        if outcome.failure.kind not in _SEARCH_HANDLED:
            raise PlanFailure(outcome.failure)
    context = {"object_type": object_desc.get("type"), "attempts": executor.limits.k_search}
    if last_failure is not None:
        context["last_failure"] = last_failure.kind
    raise PlanFailure(make_failure("object-nowhere-to-be-found", **context))


def _sample_view_target(executor: Executor, surface) -> Pose3D:
    footprint = surface.footprint.inset(0.05)
    x = executor.rng.uniform(footprint.x_min, footprint.x_max)
    y = executor.rng.uniform(footprint.y_min, footprint.y_max)
    return Pose3D(x, y, surface.z_hi + VIEW_TARGET_HEIGHT, 0.0)


def _object_with_pose(object_desc: Description, pose: Pose3D) -> Description:
    """Fresh object description carrying a new pose estimate."""
    properties = [(k, v) for k, v in object_desc.properties if k != "pose"]
    properties.append(("pose", pose))
    return make_description("object", "the", properties)


def _grasp_combos(
    executor: Executor, object_type: str, pick_action: Description, use_bound: bool
) -> list[tuple[str, str]]:
    free = executor.belief.robot.free_arms()
    combos = [
        (arm, grasp)
        for arm in free
        for grasp in dsg.allowed_grasps(object_type, executor.knowledge)
    ]
    executor.rng.shuffle(combos)
    bound_arm = pick_action.get("arm")
    bound_grasp = pick_action.get("grasp")
    if use_bound and bound_arm is not None and bound_grasp is not None:
        # Try the suggested parameterization first, then fall back to the rest.
        bound = (bound_arm, bound_grasp)
        combos = [bound] + [combo for combo in combos if combo != bound]
    return combos


def _plan_fetching(executor: Executor, recorder: TaskRecorder, action: Description) -> Description:
    """Navigate to the object, re-perceive, and pick up; failed attempts
    resample the base location until the retry budget runs out."""
    object_desc = action.get("object")
    robot_location = action.get("robot-location")
    pick_action = action.get("pick-up-action")
    object_type = object_desc.get("type")
    believed_pose = object_desc.get("pose")
    if believed_pose is None:
        raise ValueError("fetching requires an object description with a pose estimate")
    # A suggested stand point stays in force until the robot actually stood
    # there; only then is it consumed and recovery falls back to sampling.
    bound_location_pending = _location_pose(robot_location) is not None
    for _attempt in range(executor.limits.r_fetch):
        if bound_location_pending:
            nav_location = robot_location
        else:
            nav_location = make_description(
                "location",
                "a",
                (
                    ("type", "fetch-position"),
                    ("reachable-for", believed_pose),
                    ("visible-from", believed_pose),
                    ("min-radius", FETCH_BASE_BOUNDS[0]),
                    ("max-radius", FETCH_BASE_BOUNDS[1]),
                ),
            )
        outcome = perform(executor, recorder, an_action("navigating", ("location", nav_location)))
        if not outcome.ok:
            if outcome.failure.kind in _FETCH_HANDLED:
                continue
            raise PlanFailure(outcome.failure)
        at_bound = bound_location_pending
        bound_location_pending = False
        outcome = perform(executor, recorder, an_action("looking", ("target", believed_pose)))
        if not outcome.ok:
            raise PlanFailure(outcome.failure)
        # Re-perceive right before grasping; precision improves close up.
        outcome = perform(executor, recorder, an_action("detecting", ("object", object_desc)))
        if not outcome.ok:
            raise PlanFailure(outcome.failure)
        believed_pose = outcome.description.get("pose")
        fresh_object = _object_with_pose(object_desc, believed_pose)
        failure: Failure | None = None
        for arm, grasp in _grasp_combos(executor, object_type, pick_action, at_bound):
            attempt_action = make_description(
                "action",
                "an",
                (
                    ("type", "picking-up"),
                    ("object", fresh_object),
                    ("arm", arm),
                    ("grasp", grasp),
                ),
            )
            pick_outcome = perform(executor, recorder, attempt_action)
            if pick_outcome.ok:
                grounded = pick_outcome.description
                return extend(
                    action, (("arm", grounded.get("arm")), ("grasp", grounded.get("grasp")))
                )
            failure = pick_outcome.failure
            if failure.kind not in _FETCH_HANDLED:
                raise PlanFailure(failure)
        # All combos failed from this stand point; resample the base.
    raise PlanFailure(
        make_failure(
            "object-unfetchable",
            object_type=object_type,
            attempts=executor.limits.r_fetch,
        )
    )


def _plan_picking_up(executor: Executor, recorder: TaskRecorder, action: Description) -> Description:
    """Open the gripper while reaching the pre-grasp pose, then grasp and lift."""
    object_desc = action.get("object")
    object_type = object_desc.get("type")
    object_name = object_desc.get("name")
    object_pose = object_desc.get("pose")
    arm = action.get("arm") or dsg.choose_arm(object_desc, executor.belief.robot, executor.rng)
    grasp = action.get("grasp") or dsg.choose_grasp(object_type, executor.rng, executor.knowledge)
    opening, force = dsg.grasp_params(object_type, executor.knowledge)
    reach = dsg.reaching_trajectory(object_type, arm, grasp, object_pose, executor.knowledge)
    lift = dsg.lifting_trajectory(object_type, arm, grasp, reach, executor.knowledge)
    pre_grasp = reach.pose_for("pre-grasp")
    grasp_pose = reach.pose_for("grasp")
    ignore = frozenset({object_name} if object_name else ())
    run_parallel(
        executor,
        recorder,
        [
            (
                "reaching",
                an_action("reaching", ("arm", arm), ("grasp", grasp)),
                [lambda: executor.move_tool(arm, pre_grasp, grasp, ignore=ignore)],
            ),
            (
                "setting-gripper",
                an_action("setting-gripper", ("arm", arm), ("opening", opening)),
                [lambda: executor.set_gripper(arm, opening)],
            ),
        ],
    )
    _run_leaf(
        executor,
        recorder,
        "gripping",
        an_action("gripping", ("arm", arm), ("grasp", grasp), ("force", force)),
        [
            lambda: executor.move_tool(arm, grasp_pose, grasp, ignore=ignore),
            lambda: executor.grip(arm, object_name, grasp, object_type),
        ],
    )
    _run_leaf(
        executor,
        recorder,
        "lifting",
        an_action("lifting", ("arm", arm)),
        [lambda: executor.move_tool(arm, lift.pose_for("lift"), grasp, ignore=ignore)],
    )
    additions = []
    if action.get("arm") is None:
        additions.append(("arm", arm))
    if action.get("grasp") is None:
        additions.append(("grasp", grasp))
    additions.extend(
        (
            ("gripper-opening", opening),
            ("grasping-force", force),
            ("reach-trajectory", reach),
            ("lift-trajectory", lift),
        )
    )
    return extend(action, additions)


def _holding_arm(executor: Executor, object_name: str) -> str:
    for arm in ARMS:
        if executor.belief.robot.arms[arm].attachment == object_name:
            return arm
    raise PlanFailure(make_failure("object-undeliverable", object_name=object_name, detail="not-held"))


def _plan_delivering(executor: Executor, recorder: TaskRecorder, action: Description) -> Description:
    """Nested recovery: inner loop resamples the placement pose, outer loop
    resamples the robot base location."""
    object_desc = action.get("object")
    target = action.get("target")
    robot_location = action.get("robot-location")
    object_type = object_desc.get("type")
    object_name = object_desc.get("name")
    goal: Pose3D = target.get("pose")
    arm = _holding_arm(executor, object_name)
    bound_location_pending = _location_pose(robot_location) is not None
    for _outer in range(executor.limits.r_deliver_outer):
        if bound_location_pending:
            nav_location = robot_location
        else:
            nav_location = make_description(
                "location",
                "a",
                (
                    ("type", "deliver-position"),
                    ("reachable-for", goal),
                    ("min-radius", DELIVER_BASE_BOUNDS[0]),
                    ("max-radius", DELIVER_BASE_BOUNDS[1]),
                ),
            )
        outcome = perform(executor, recorder, an_action("navigating", ("location", nav_location)))
        if not outcome.ok:
            if outcome.failure.kind in _DELIVER_OUTER_HANDLED:
                continue
            raise PlanFailure(outcome.failure)
        bound_location_pending = False
        for inner in range(executor.limits.r_deliver_inner):
            placement = goal if inner == 0 else _jitter_placement(executor, goal)
            place_action = make_description(
                "action",
                "an",
                (
                    ("type", "placing"),
                    ("object", object_desc),
                    ("arm", arm),
                    ("target-pose", placement),
                ),
            )
            place_outcome = perform(executor, recorder, place_action)
            if place_outcome.ok:
                return extend(action, (("arm", arm), ("pose", placement)))
            if place_outcome.failure.kind in _DELIVER_INNER_HANDLED:
                continue
            raise PlanFailure(place_outcome.failure)
    raise PlanFailure(
        make_failure(
            "object-undeliverable",
            object_name=object_name,
            object_type=object_type,
            attempts=executor.limits.r_deliver_outer * executor.limits.r_deliver_inner,
        )
    )


def _jitter_placement(executor: Executor, goal: Pose3D) -> Pose3D:
    radius = executor.rng.uniform(0.0, PLACEMENT_JITTER)
    bearing = executor.rng.uniform(-math.pi, math.pi)
    return Pose3D(
        goal.x + radius * math.cos(bearing),
        goal.y + radius * math.sin(bearing),
        goal.z,
        goal.yaw,
    )


def _plan_placing(executor: Executor, recorder: TaskRecorder, action: Description) -> Description:
    """Reach over the spot, open the gripper, set the object down, retract."""
    object_desc = action.get("object")
    object_type = object_desc.get("type")
    object_name = object_desc.get("name")
    placement: Pose3D = action.get("target-pose")
    arm = action.get("arm") or _holding_arm(executor, object_name)
    if not stable_placement(executor.belief, object_type, placement, ignore={object_name}):
        raise PlanFailure(
            make_failure(
                "manipulation-pose-in-collision", stage="placement", pose=placement, arm=arm
            )
        )
    tool_place = executor.tool_pose_for_placement(arm, placement)
    pre_place = Pose3D(tool_place.x, tool_place.y, tool_place.z + PRE_PLACE_HEIGHT, tool_place.yaw)
    ignore = frozenset({object_name})
    opening, _force = dsg.grasp_params(object_type, executor.knowledge)
    _run_leaf(
        executor,
        recorder,
        "reaching",
        an_action("reaching", ("arm", arm)),
        [
            lambda: executor.move_tool(arm, pre_place, "top", ignore=ignore),
            lambda: executor.move_tool(arm, tool_place, "top", ignore=ignore),
        ],
    )
    _run_leaf(
        executor,
        recorder,
        "releasing",
        an_action("releasing", ("arm", arm)),
        [
            lambda: executor.set_gripper(arm, opening),
            lambda: executor.release(arm, placement, object_type, object_name),
        ],
    )
    _run_leaf(
        executor,
        recorder,
        "retracting",
        an_action("retracting", ("arm", arm)),
        [lambda: executor.move_tool(arm, pre_place, "top", ignore=ignore)],
    )
    return extend(action, (("pose", placement),))


def _plan_transporting(executor: Executor, recorder: TaskRecorder, action: Description) -> Description:
    """Search, then fetch and deliver wrapped in the projection construct."""
    from . import projector  # local import; projector drives plans in projection

    object_desc = action.get("object")
    search_location = action.get("search-location")
    deliver_location = action.get("deliver-location")
    goal: Pose3D = deliver_location.get("pose")
    search_outcome = perform(
        executor,
        recorder,
        an_action("searching", ("object", object_desc), ("location", search_location)),
    )
    if not search_outcome.ok:
        raise PlanFailure(search_outcome.failure)
    found_pose: Pose3D = search_outcome.description.get("pose")
    found_object = _object_with_pose(object_desc, found_pose)

    def segment_body(
        body_executor: Executor, body_recorder: TaskRecorder, bindings: dict[str, Description]
    ) -> Description:
        fetch_location_props: list[tuple[str, object]] = [("type", "fetch-position")]
        bound_fetch = bindings.get("fetch-robot-location")
        if bound_fetch is not None and bound_fetch.get("pose") is not None:
            fetch_location_props.append(("pose", bound_fetch.get("pose")))
        fetch_location_props.extend(
            (
                ("reachable-for", found_pose),
                ("min-radius", FETCH_BASE_BOUNDS[0]),
                ("max-radius", FETCH_BASE_BOUNDS[1]),
            )
        )
        pick_props: list[tuple[str, object]] = [("type", "picking-up"), ("object", found_object)]
        bound_pick = bindings.get("pick-up-action")
        if bound_pick is not None:
            for key in ("arm", "grasp"):
                value = bound_pick.get(key)
                if value is not None:
                    pick_props.append((key, value))
        fetch_action = an_action(
            "fetching",
            ("object", found_object),
            ("robot-location", make_description("location", "a", fetch_location_props)),
            ("pick-up-action", make_description("action", "an", pick_props)),
        )
        outcome = perform(body_executor, body_recorder, fetch_action)
        if not outcome.ok:
            raise PlanFailure(outcome.failure)
        deliver_location_props: list[tuple[str, object]] = [("type", "deliver-position")]
        bound_deliver = bindings.get("deliver-robot-location")
        if bound_deliver is not None and bound_deliver.get("pose") is not None:
            deliver_location_props.append(("pose", bound_deliver.get("pose")))
        deliver_location_props.extend(
            (
                ("reachable-for", goal),
                ("min-radius", DELIVER_BASE_BOUNDS[0]),
                ("max-radius", DELIVER_BASE_BOUNDS[1]),
            )
        )
        place_props: list[tuple[str, object]] = [("type", "placing"), ("object", found_object)]
        bound_place = bindings.get("place-action")
        if bound_place is not None and bound_place.get("arm") is not None:
            place_props.append(("arm", bound_place.get("arm")))
        deliver_action = an_action(
            "delivering",
            ("object", found_object),
            ("target", deliver_location),
            ("robot-location", make_description("location", "a", deliver_location_props)),
            ("place-action", make_description("action", "an", place_props)),
        )
        outcome = perform(body_executor, body_recorder, deliver_action)
        if not outcome.ok:
            raise PlanFailure(outcome.failure)
        return outcome.description

    settings = executor.projection
    if settings.enabled:
        slots = projector.fetch_deliver_slots()
        master_seed = executor.rng.getrandbits(64)
        projector.with_projected_task_tree(
            slots,
            settings.n_runs,
            projector.cost_function(settings.cost_fn),
            segment_body,
            executor.belief,
            master_seed,
            executor,
            recorder,
        )
    else:
        segment_body(executor, recorder, {})
    return extend(action, (("pose", found_pose),))


_PLAN_REGISTRY: dict[str, Callable[[Executor, TaskRecorder, Description], Description]] = {
    "navigating": _plan_navigating,
    "looking": _plan_looking,
    "detecting": _plan_detecting,
    "searching": _plan_searching,
    "fetching": _plan_fetching,
    "picking-up": _plan_picking_up,
    "delivering": _plan_delivering,
    "placing": _plan_placing,
    "transporting": _plan_transporting,
}


def known_action_types() -> tuple[str, ...]:
    return tuple(_PLAN_REGISTRY)
