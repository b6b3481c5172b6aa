"""Symbolic entity descriptions and the knowledge rules that ground them.

A description is an underspecified key-value record of an action, object or
location. Grounding only ever appends properties (arm choice, grasp type,
base location, key-pose trajectories); it never rewrites what is already there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from random import Random

from .geomworld import (
    Pose2D,
    Pose3D,
    RobotState,
    WorldState,
    base_collision_free,
    same_nav_component,
    visible,
)

DESCRIPTION_KINDS = ("action", "object", "location")
QUANTIFIERS = ("an", "a", "the")

GRASP_TYPES = ("front", "back", "top")

TRAJECTORY_LABELS = ("pre-grasp", "grasp", "lift", "pre-place", "place", "retract")
_LABEL_RANK = {label: i for i, label in enumerate(TRAJECTORY_LABELS)}

#: Retraction from the grasp pose along the approach direction.
PRE_GRASP_RETREAT = 0.10
#: Vertical travel of the lift key pose above the grasp pose.
LIFT_HEIGHT = 0.08

#: Base-location sampling gives up after this many rejected candidates.
DEFAULT_SAMPLE_ATTEMPTS = 50

DEFAULT_BASE_RADIUS_BOUNDS = (0.45, 0.80)


class DescriptionError(ValueError):
    """Base class for malformed or illegally modified descriptions."""


class DuplicateKeyError(DescriptionError):
    pass


class MissingTypeError(DescriptionError):
    pass


class PropertyOverrideError(DescriptionError):
    pass


class UnknownObjectTypeError(KeyError):
    pass


class MissingGraspPoseError(ValueError):
    pass


class BothArmsOccupiedError(RuntimeError):
    pass


class NoValidSampleError(RuntimeError):
    """Sampling exhausted its attempt budget without a valid candidate."""

    def __init__(self, detail: str, attempts: int):
        super().__init__(f"{detail} (after {attempts} attempts)")
        self.detail = detail
        self.attempts = attempts


@dataclass(frozen=True)
class KeyPoseTrajectory:
    """Ordered key poses of a motion, each tagged with a phase label."""

    steps: tuple[tuple[str, Pose3D], ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("trajectory must contain at least one key pose")
        ranks = []
        for label, _pose in self.steps:
            if label not in _LABEL_RANK:
                raise ValueError(f"unknown key pose label {label!r}")
            ranks.append(_LABEL_RANK[label])
        if any(b <= a for a, b in zip(ranks, ranks[1:])):
            raise ValueError(f"key pose labels out of order: {[s[0] for s in self.steps]}")

    def pose_for(self, label: str) -> Pose3D | None:
        for step_label, pose in self.steps:
            if step_label == label:
                return pose
        return None

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.steps)


# Values a description property may carry.
Value = "str | int | float | Pose2D | Pose3D | KeyPoseTrajectory | Description"


@dataclass(frozen=True)
class Description:
    """Immutable key-value description of an action, object or location."""

    kind: str
    quantifier: str
    properties: tuple[tuple[str, object], ...]

    def __post_init__(self) -> None:
        if self.kind not in DESCRIPTION_KINDS:
            raise DescriptionError(f"unknown description kind {self.kind!r}")
        if self.quantifier not in QUANTIFIERS:
            raise DescriptionError(f"unknown quantifier {self.quantifier!r}")
        seen = set()
        for key, _value in self.properties:
            if key in seen:
                raise DuplicateKeyError(f"duplicate property key {key!r}")
            seen.add(key)
        if "type" not in seen:
            raise MissingTypeError(f"{self.kind} description lacks a 'type' property")

    def get(self, key: str):
        for prop_key, value in self.properties:
            if prop_key == key:
                return value
        return None

    def has(self, key: str) -> bool:
        return any(prop_key == key for prop_key, _ in self.properties)

    @property
    def type(self) -> str:
        return self.get("type")  # type: ignore[return-value]

    def extend(self, new_properties) -> "Description":
        return extend(self, new_properties)


def make_description(kind: str, quantifier: str, properties) -> Description:
    """Build a description; properties is an ordered iterable of (key, value)."""
    return Description(kind=kind, quantifier=quantifier, properties=tuple(properties))


def an_action(action_type: str, *properties) -> Description:
    return make_description("action", "an", (("type", action_type),) + tuple(properties))


def an_object(object_type: str, *properties) -> Description:
    return make_description("object", "an", (("type", object_type),) + tuple(properties))


def the_object(object_type: str, *properties) -> Description:
    return make_description("object", "the", (("type", object_type),) + tuple(properties))


def a_location(location_type: str, *properties) -> Description:
    return make_description("location", "a", (("type", location_type),) + tuple(properties))


def extend(desc: Description, new_properties) -> Description:
    """Ground a description by appending properties; existing keys are sacred."""
    additions = tuple(new_properties)
    existing = {key for key, _ in desc.properties}
    for key, _value in additions:
        if key in existing:
            raise PropertyOverrideError(f"grounding may not override property {key!r}")
    if not additions:
        return desc
    return Description(desc.kind, desc.quantifier, desc.properties + additions)


def get_property(desc: Description, key: str):
    """Value stored under key, or None when absent."""
    return desc.get(key)


def format_description(desc: Description, indent: int = 0) -> str:
    """Readable single-entity rendering, nested descriptions indented."""
    pad = " " * indent
    parts = [f"{pad}({desc.quantifier} {desc.kind}"]
    for key, value in desc.properties:
        if isinstance(value, Description):
            nested = format_description(value, indent + 4).lstrip()
            parts.append(f"{pad}  ({key} {nested})")
        elif isinstance(value, Pose2D):
            parts.append(f"{pad}  ({key} ({value.x:.3f} {value.y:.3f} {value.theta:.3f}))")
        elif isinstance(value, Pose3D):
            parts.append(
                f"{pad}  ({key} ({value.x:.3f} {value.y:.3f} {value.z:.3f} {value.yaw:.3f}))"
            )
        elif isinstance(value, KeyPoseTrajectory):
            parts.append(f"{pad}  ({key} [{' '.join(value.labels)}])")
        else:
            parts.append(f"{pad}  ({key} {value})")
    return "\n".join(parts) + ")"


# -- location constraints ------------------------------------------------------

CONSTRAINT_KINDS = ("reachable-for", "visible-from", "on-surface", "near")


@dataclass(frozen=True)
class LocationConstraint:
    """One condition a sampled location must satisfy."""

    kind: str
    reference: Pose3D | str
    radius_bounds: tuple[float, float] = (0.0, math.inf)

    def __post_init__(self) -> None:
        if self.kind not in CONSTRAINT_KINDS:
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        lo, hi = self.radius_bounds
        if not (0.0 <= lo <= hi):
            raise ValueError(f"bad radius bounds {self.radius_bounds}")


# -- object knowledge ----------------------------------------------------------


@dataclass(frozen=True)
class ObjectKnowledge:
    """Fixed manipulation parameters for one object type."""

    gripper_opening: float
    grasping_force: float
    standoff: float
    grasps: tuple[str, ...]


DEFAULT_OBJECT_KNOWLEDGE: dict[str, ObjectKnowledge] = {
    "milk": ObjectKnowledge(0.09, 20.0, 0.02, ("front", "back")),
    "cup": ObjectKnowledge(0.09, 15.0, 0.02, ("front", "back")),
    "cereal": ObjectKnowledge(0.10, 20.0, 0.03, ("front", "back")),
    "bowl": ObjectKnowledge(0.11, 15.0, 0.0, ("top",)),
    "spoon": ObjectKnowledge(0.05, 10.0, 0.0, ("top",)),
}

KnowledgeTable = dict[str, ObjectKnowledge]


def knowledge_for(object_type: str, table: KnowledgeTable | None = None) -> ObjectKnowledge:
    entry = (table or DEFAULT_OBJECT_KNOWLEDGE).get(object_type)
    if entry is None:
        raise UnknownObjectTypeError(object_type)
    return entry


def allowed_grasps(object_type: str, table: KnowledgeTable | None = None) -> tuple[str, ...]:
    return knowledge_for(object_type, table).grasps


def grasp_params(object_type: str, table: KnowledgeTable | None = None) -> tuple[float, float]:
    """Gripper opening (m) and grasping force (N) for the object type."""
    entry = knowledge_for(object_type, table)
    return (entry.gripper_opening, entry.grasping_force)


def choose_arm(object_desc: Description, robot: RobotState, rng: Random) -> str:
    """Uniform pick among arms that are not holding anything."""
    del object_desc  # only arm occupancy is consulted for now
    free = robot.free_arms()
    if not free:
        raise BothArmsOccupiedError("both grippers hold objects")
    return free[rng.randrange(len(free))]


def choose_grasp(object_type: str, rng: Random, table: KnowledgeTable | None = None) -> str:
    """Uniform pick from the grasp types allowed for the object type."""
    grasps = allowed_grasps(object_type, table)
    return grasps[rng.randrange(len(grasps))]


def _approach_offset(grasp: str, object_pose: Pose3D) -> tuple[float, float, float]:
    """Unit vector from the object center toward grasp/pre-grasp poses."""
    if grasp == "front":
        return (-math.cos(object_pose.yaw), -math.sin(object_pose.yaw), 0.0)
    if grasp == "back":
        return (math.cos(object_pose.yaw), math.sin(object_pose.yaw), 0.0)
    if grasp == "top":
        return (0.0, 0.0, 1.0)
    raise ValueError(f"unknown grasp type {grasp!r}")


def grasp_pose_for(
    object_type: str,
    grasp: str,
    object_pose: Pose3D,
    table: KnowledgeTable | None = None,
) -> Pose3D:
    """Tool pose that grasps an object of the type at object_pose."""
    standoff = knowledge_for(object_type, table).standoff
    ox, oy, oz = _approach_offset(grasp, object_pose)
    yaw = object_pose.yaw + (math.pi if grasp == "back" else 0.0)
    return Pose3D(
        object_pose.x + standoff * ox,
        object_pose.y + standoff * oy,
        object_pose.z + standoff * oz,
        yaw,
    )


def reaching_trajectory(
    object_type: str,
    arm: str,
    grasp: str,
    object_pose: Pose3D,
    table: KnowledgeTable | None = None,
) -> KeyPoseTrajectory:
    """[pre-grasp, grasp] key poses for approaching the object."""
    del arm  # both arms share the same approach geometry
    grasp_pose = grasp_pose_for(object_type, grasp, object_pose, table)
    ox, oy, oz = _approach_offset(grasp, object_pose)
    pre_grasp = Pose3D(
        grasp_pose.x + PRE_GRASP_RETREAT * ox,
        grasp_pose.y + PRE_GRASP_RETREAT * oy,
        grasp_pose.z + PRE_GRASP_RETREAT * oz,
        grasp_pose.yaw,
    )
    return KeyPoseTrajectory((("pre-grasp", pre_grasp), ("grasp", grasp_pose)))


def lifting_trajectory(
    object_type: str,
    arm: str,
    grasp: str,
    reach: KeyPoseTrajectory,
    table: KnowledgeTable | None = None,
) -> KeyPoseTrajectory:
    """[lift] key pose: the grasp pose raised straight up."""
    del object_type, arm, grasp, table
    grasp_pose = reach.pose_for("grasp")
    if grasp_pose is None:
        raise MissingGraspPoseError("reach trajectory has no grasp key pose")
    lift = Pose3D(grasp_pose.x, grasp_pose.y, grasp_pose.z + LIFT_HEIGHT, grasp_pose.yaw)
    return KeyPoseTrajectory((("lift", lift),))


# -- base-location sampling ------------------------------------------------------


def _constraint_satisfied(
    constraint: LocationConstraint, candidate: Pose2D, world: WorldState
) -> bool:
    if constraint.kind == "reachable-for":
        assert isinstance(constraint.reference, Pose3D)
        lo, hi = constraint.radius_bounds
        return lo <= candidate.distance_to(constraint.reference) <= hi
    if constraint.kind == "near":
        assert isinstance(constraint.reference, Pose3D)
        return candidate.distance_to(constraint.reference) <= constraint.radius_bounds[1]
    if constraint.kind == "visible-from":
        assert isinstance(constraint.reference, Pose3D)
        eye = Pose3D(candidate.x, candidate.y, world.robot.eye_height, candidate.theta)
        return visible(world, eye, constraint.reference)
    if constraint.kind == "on-surface":
        surface = world.bodies.get(constraint.reference)  # type: ignore[arg-type]
        return surface is not None and surface.footprint.contains_point(candidate.x, candidate.y)
    raise ValueError(constraint.kind)


def sample_base_location(
    reference_poses: list[Pose3D],
    constraints: list[LocationConstraint],
    world: WorldState,
    rng: Random,
    max_attempts: int = DEFAULT_SAMPLE_ATTEMPTS,
) -> Pose2D:
    """Sample a collision-free, navigable base pose around a reference, facing it.

    The sampling annulus comes from the first constraint carrying finite
    radius bounds; remaining constraints act as rejection filters. Candidates
    the robot could not drive to from its current position are rejected.
    Raises NoValidSampleError when the attempt budget runs out.
    """
    if not reference_poses:
        raise ValueError("reference_poses must be non-empty")
    bounds = DEFAULT_BASE_RADIUS_BOUNDS
    for constraint in constraints:
        if math.isfinite(constraint.radius_bounds[1]):
            bounds = constraint.radius_bounds
            break
    for _ in range(max_attempts):
        reference = (
            reference_poses[rng.randrange(len(reference_poses))]
            if len(reference_poses) > 1
            else reference_poses[0]
        )
        radius = rng.uniform(*bounds)
        bearing = rng.uniform(-math.pi, math.pi)
        x = reference.x + radius * math.cos(bearing)
        y = reference.y + radius * math.sin(bearing)
        theta = math.atan2(reference.y - y, reference.x - x)
        candidate = Pose2D(x, y, theta)
        if not base_collision_free(world, candidate):
            continue
        if not same_nav_component(world, world.robot.base, candidate):
            continue
        if all(_constraint_satisfied(c, candidate, world) for c in constraints):
            return candidate
    raise NoValidSampleError("no collision-free base pose satisfied the constraints", max_attempts)
