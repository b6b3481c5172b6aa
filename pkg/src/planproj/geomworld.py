"""Lightweight 2.5D geometric world used as belief state and projection substrate.

Bodies are axis-aligned boxes (rectangular footprint plus a height interval).
Robot motions are applied as discrete jumps between key poses; collision,
visibility, reachability and placement-support oracles stand in for physics,
rendering and numeric IK.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from random import Random

TAU = math.tau

#: Maximum eye-to-object distance at which perception can return a match.
DETECT_RANGE = 2.5

#: Tool must be within this distance of the object's grasp point to attach.
ATTACH_TOLERANCE = 0.02

#: Placement support must match the surface height within this tolerance.
SUPPORT_TOLERANCE = 1e-3

ARMS = ("left", "right")

BODY_KINDS = ("furniture", "surface", "object")

#: Fallback object footprints/heights, used when a world holds no instance
#: of the queried type (dx, dy, dz in meters).
DEFAULT_OBJECT_DIMS: dict[str, tuple[float, float, float]] = {
    "milk": (0.07, 0.07, 0.20),
    "cup": (0.08, 0.08, 0.10),
    "cereal": (0.08, 0.16, 0.25),
    "bowl": (0.16, 0.16, 0.07),
    "spoon": (0.04, 0.15, 0.02),
}


class MotionPreconditionError(Exception):
    """A discrete motion was rejected; ``check`` names the failed condition."""

    def __init__(self, check: str, detail: str = ""):
        super().__init__(f"{check}: {detail}" if detail else check)
        self.check = check
        self.detail = detail


class ForeignSnapshotError(Exception):
    """A snapshot token was presented to a world that did not create it."""


def normalize_angle(angle: float) -> float:
    """Map an angle to the interval (-pi, pi]."""
    wrapped = math.remainder(angle, TAU)
    if wrapped <= -math.pi:
        wrapped += TAU
    return wrapped


@dataclass(frozen=True)
class Pose2D:
    """Planar pose (x, y in meters, theta in radians, map frame)."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def distance_to(self, other: "Pose2D | Pose3D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Pose3D:
    """Position plus yaw (full 6-DOF orientation is out of scope)."""

    x: float
    y: float
    z: float
    yaw: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))

    def distance_to(self, other: "Pose3D") -> float:
        return math.sqrt(
            (self.x - other.x) ** 2 + (self.y - other.y) ** 2 + (self.z - other.z) ** 2
        )

    def xy_distance_to(self, other: "Pose2D | Pose3D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in the map frame."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @classmethod
    def from_center(cls, cx: float, cy: float, dx: float, dy: float) -> "Rect":
        return cls(cx - dx / 2.0, cy - dy / 2.0, cx + dx / 2.0, cy + dy / 2.0)

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def contains_point(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def contains_rect(self, other: "Rect") -> bool:
        return (
            self.x_min <= other.x_min
            and self.y_min <= other.y_min
            and other.x_max <= self.x_max
            and other.y_max <= self.y_max
        )

    def overlaps(self, other: "Rect") -> bool:
        """Strict interior overlap; touching edges do not count."""
        return (
            self.x_min < other.x_max
            and other.x_min < self.x_max
            and self.y_min < other.y_max
            and other.y_min < self.y_max
        )

    def distance_to_point(self, x: float, y: float) -> float:
        dx = max(self.x_min - x, 0.0, x - self.x_max)
        dy = max(self.y_min - y, 0.0, y - self.y_max)
        return math.hypot(dx, dy)

    def inset(self, margin: float) -> "Rect":
        return Rect(
            self.x_min + margin, self.y_min + margin, self.x_max - margin, self.y_max - margin
        )

    def clip_segment(
        self, x0: float, y0: float, x1: float, y1: float
    ) -> tuple[float, float] | None:
        """Parameter interval [t0, t1] of the segment inside the rectangle.

        Liang-Barsky slab clipping; returns None when the segment misses.
        """
        t0, t1 = 0.0, 1.0
        dx, dy = x1 - x0, y1 - y0
        for p, q in (
            (-dx, x0 - self.x_min),
            (dx, self.x_max - x0),
            (-dy, y0 - self.y_min),
            (dy, self.y_max - y0),
        ):
            if p == 0.0:
                if q < 0.0:
                    return None
                continue
            r = q / p
            if p < 0.0:
                if r > t1:
                    return None
                if r > t0:
                    t0 = r
            else:
                if r < t0:
                    return None
                if r < t1:
                    t1 = r
        return (t0, t1)


@dataclass(frozen=True)
class Body:
    """Static box in the world: furniture, a support surface, or a fixture."""

    name: str
    footprint: Rect
    z_lo: float
    z_hi: float
    kind: str = "furniture"

    def __post_init__(self) -> None:
        if self.kind not in BODY_KINDS:
            raise ValueError(f"unknown body kind {self.kind!r}")
        if not self.z_lo < self.z_hi:
            raise ValueError(f"body {self.name!r}: height interval is empty")
        fp = self.footprint
        if not (fp.x_min < fp.x_max and fp.y_min < fp.y_max):
            raise ValueError(f"body {self.name!r}: degenerate footprint")


@dataclass
class ObjectInstance:
    """A manipulable object; either supported by a surface or held by a gripper."""

    name: str
    type: str
    pose: Pose3D
    dims: tuple[float, float, float]
    support: str | None = None
    attached_arm: str | None = None

    @property
    def footprint(self) -> Rect:
        return Rect.from_center(self.pose.x, self.pose.y, self.dims[0], self.dims[1])

    @property
    def z_interval(self) -> tuple[float, float]:
        half = self.dims[2] / 2.0
        return (self.pose.z - half, self.pose.z + half)

    def clone(self) -> "ObjectInstance":
        return replace(self)


@dataclass
class ArmState:
    tool_pose: Pose3D | None = None
    gripper_opening: float = 0.09
    attachment: str | None = None
    # Pose of the attached object in the tool frame (x, y, z, yaw).
    attach_offset: tuple[float, float, float, float] | None = None

    def clone(self) -> "ArmState":
        return replace(self)


@dataclass
class RobotState:
    """Mobile base with two arms; workspace modeled as an annulus per arm."""

    base: Pose2D = Pose2D(0.0, 0.0, 0.0)
    base_radius: float = 0.30
    head_yaw: float = 0.0
    head_pitch: float = 0.0
    eye_height: float = 1.40
    shoulder_lateral: float = 0.22
    shoulder_height: float = 1.00
    reach_min: float = 0.35
    reach_max: float = 0.85
    reach_z_lo: float = 0.30
    reach_z_hi: float = 1.30
    head_yaw_limit: float = 2.8
    arms: dict[str, ArmState] = field(
        default_factory=lambda: {"left": ArmState(), "right": ArmState()}
    )

    def shoulder_point(self, arm: str) -> tuple[float, float, float]:
        """Shoulder position in the map frame; left is +lateral of the facing axis."""
        side = self.shoulder_lateral if arm == "left" else -self.shoulder_lateral
        ortho = self.base.theta + math.pi / 2.0
        return (
            self.base.x + side * math.cos(ortho),
            self.base.y + side * math.sin(ortho),
            self.shoulder_height,
        )

    def eye_pose(self) -> Pose3D:
        return Pose3D(self.base.x, self.base.y, self.eye_height, self.base.theta + self.head_yaw)

    def free_arms(self) -> list[str]:
        return [arm for arm in ARMS if self.arms[arm].attachment is None]

    def clone(self) -> "RobotState":
        return replace(self, arms={name: arm.clone() for name, arm in self.arms.items()})


@dataclass(frozen=True)
class ArmConfig:
    """Result of a successful reachability query."""

    arm: str
    tool_pose: Pose3D
    extension: float


@dataclass(frozen=True)
class NoiseModel:
    """Perception and controller noise for the simulated-real backend.

    Translation noise shrinks with eye distance (perception gets better when
    the robot is close), down to ``sigma_near_frac`` of the base sigma.
    """

    sigma: float = 0.015
    clip: float = 0.05
    p_flip: float = 0.1
    p_nav_miss: float = 0.05
    p_manip_miss: float = 0.05
    sigma_range: float = 2.0
    sigma_near_frac: float = 0.20

    @classmethod
    def zero(cls) -> "NoiseModel":
        return cls(sigma=0.0, clip=0.0, p_flip=0.0, p_nav_miss=0.0, p_manip_miss=0.0)

    def effective_sigma(self, distance: float | None) -> float:
        if distance is None or self.sigma_range <= 0.0:
            return self.sigma
        frac = min(max(distance / self.sigma_range, self.sigma_near_frac), 1.0)
        return self.sigma * frac

    def perturb(self, pose: Pose3D, rng: Random, distance: float | None = None) -> Pose3D:
        """Noisy copy of a pose; always consumes the same number of rng draws."""
        sigma = self.effective_sigma(distance)
        deltas = [rng.gauss(0.0, sigma) if sigma > 0.0 else rng.random() * 0.0 for _ in range(3)]
        deltas = [max(-self.clip, min(self.clip, d)) for d in deltas]
        flip = rng.random() < self.p_flip
        yaw = pose.yaw + (math.pi if flip else 0.0)
        return Pose3D(pose.x + deltas[0], pose.y + deltas[1], pose.z + deltas[2], yaw)


_world_ids = itertools.count(1)


@dataclass(frozen=True)
class SnapshotToken:
    """Opaque saved world state; only the issuing world can restore it."""

    world_id: int
    bodies: dict[str, Body]
    objects: dict[str, ObjectInstance]
    robot: RobotState


class WorldState:
    """Mutable world: static bodies, movable objects, one robot."""

    def __init__(
        self,
        bodies: dict[str, Body] | None = None,
        objects: dict[str, ObjectInstance] | None = None,
        robot: RobotState | None = None,
        bounds: Rect | None = None,
    ):
        self._id = next(_world_ids)
        self.bodies: dict[str, Body] = dict(bodies or {})
        self.objects: dict[str, ObjectInstance] = dict(objects or {})
        self.robot: RobotState = robot if robot is not None else RobotState()
        self.bounds = bounds
        self.generation = 0

    # -- construction ------------------------------------------------------

    def add_body(self, body: Body) -> None:
        if body.name in self.bodies:
            raise ValueError(f"duplicate body name {body.name!r}")
        self.bodies[body.name] = body

    def add_object(self, obj: ObjectInstance) -> None:
        if obj.name in self.objects:
            raise ValueError(f"duplicate object name {obj.name!r}")
        self.objects[obj.name] = obj

    def upsert_object(
        self,
        name: str,
        object_type: str,
        pose: Pose3D,
        dims: tuple[float, float, float],
        support: str | None,
    ) -> None:
        obj = self.objects.get(name)
        if obj is None:
            self.objects[name] = ObjectInstance(name, object_type, pose, dims, support)
        else:
            obj.pose = pose
            obj.support = support
        self.generation += 1

    def effective_tool_pose(self, arm: str) -> Pose3D:
        """Current tool pose; a parked arm sits at its shoulder point."""
        state = self.robot.arms[arm]
        if state.tool_pose is not None:
            return state.tool_pose
        sx, sy, sz = self.robot.shoulder_point(arm)
        return Pose3D(sx, sy, sz, self.robot.base.theta)

    def surface_top(self, name: str) -> float:
        body = self.bodies[name]
        return body.z_hi

    # -- discrete motions ---------------------------------------------------

    def set_base(self, pose: Pose2D) -> None:
        """Teleport the base; arms and attached objects move rigidly with it."""
        old = self.robot.base
        for arm_name in ARMS:
            arm = self.robot.arms[arm_name]
            if arm.tool_pose is not None:
                arm.tool_pose = transform_pose(old, pose, arm.tool_pose)
        self.robot.base = pose
        self._sync_attachments()
        self.generation += 1

    def set_head(self, yaw: float, pitch: float) -> None:
        self.robot.head_yaw = normalize_angle(yaw)
        self.robot.head_pitch = pitch
        self.generation += 1

    def set_tool(self, arm: str, pose: Pose3D) -> None:
        self.robot.arms[arm].tool_pose = pose
        self._sync_attachments()
        self.generation += 1

    def set_gripper(self, arm: str, opening: float) -> None:
        if opening < 0.0:
            raise MotionPreconditionError("gripper-opening", f"negative opening {opening}")
        self.robot.arms[arm].gripper_opening = opening
        self.generation += 1

    def park_arm(self, arm: str) -> None:
        """Tuck an empty arm back to its shoulder (drive posture)."""
        state = self.robot.arms[arm]
        if state.attachment is not None:
            raise MotionPreconditionError("arm-occupied", f"cannot park {arm} while holding")
        state.tool_pose = None
        self.generation += 1

    def attach(self, arm: str, object_name: str, grasp_point: Pose3D) -> None:
        """Grasp an object; the tool must already sit at the grasp point."""
        state = self.robot.arms[arm]
        if state.attachment is not None:
            raise MotionPreconditionError("arm-occupied", f"{arm} already holds {state.attachment}")
        obj = self.objects.get(object_name)
        if obj is None:
            raise MotionPreconditionError("unknown-object", object_name)
        if obj.attached_arm is not None:
            raise MotionPreconditionError("object-held", f"{object_name} held by {obj.attached_arm}")
        tool = state.tool_pose
        if tool is None:
            raise MotionPreconditionError("tool-unset", arm)
        gap = tool.distance_to(grasp_point)
        if gap > ATTACH_TOLERANCE:
            raise MotionPreconditionError(
                "grasp-point-miss", f"tool {gap:.3f} m from grasp point (> {ATTACH_TOLERANCE})"
            )
        state.attachment = object_name
        state.attach_offset = pose_in_frame(tool, obj.pose)
        state.gripper_opening = 0.8 * min(obj.dims[0], obj.dims[1])
        obj.attached_arm = arm
        obj.support = None
        self.generation += 1

    def detach(self, arm: str, placement: Pose3D) -> None:
        state = self.robot.arms[arm]
        if state.attachment is None:
            raise MotionPreconditionError("no-attachment", arm)
        obj = self.objects[state.attachment]
        obj.pose = placement
        obj.attached_arm = None
        obj.support = self._find_support(obj)
        state.attachment = None
        state.attach_offset = None
        self.generation += 1

    def _sync_attachments(self) -> None:
        for arm_name in ARMS:
            arm = self.robot.arms[arm_name]
            if arm.attachment is not None and arm.tool_pose is not None:
                obj = self.objects[arm.attachment]
                obj.pose = compose_pose(arm.tool_pose, arm.attach_offset)

    def _find_support(self, obj: ObjectInstance) -> str | None:
        half = obj.dims[2] / 2.0
        for body in self.bodies.values():
            if body.kind != "surface":
                continue
            if not body.footprint.contains_rect(obj.footprint):
                continue
            if abs(obj.pose.z - (body.z_hi + half)) <= SUPPORT_TOLERANCE:
                return body.name
        return None

    # -- snapshot / restore --------------------------------------------------

    def snapshot(self) -> SnapshotToken:
        return SnapshotToken(
            world_id=self._id,
            bodies=dict(self.bodies),
            objects={name: obj.clone() for name, obj in self.objects.items()},
            robot=self.robot.clone(),
        )

    def restore(self, token: SnapshotToken) -> None:
        """Reset to a snapshot; the generation counter keeps advancing."""
        if token.world_id != self._id:
            raise ForeignSnapshotError(
                f"token from world {token.world_id}, this is world {self._id}"
            )
        self.bodies = dict(token.bodies)
        self.objects = {name: obj.clone() for name, obj in token.objects.items()}
        self.robot = token.robot.clone()
        self.generation += 1

    def canonical_state(self) -> tuple:
        """Hashable deep value of the world, for equality checks (generation excluded)."""
        bodies = tuple(
            (name, b.kind, (b.footprint.x_min, b.footprint.y_min, b.footprint.x_max, b.footprint.y_max), b.z_lo, b.z_hi)
            for name, b in sorted(self.bodies.items())
        )
        objects = tuple(
            (o.name, o.type, _pose3_tuple(o.pose), o.dims, o.support, o.attached_arm)
            for _, o in sorted(self.objects.items())
        )
        r = self.robot
        arms = tuple(
            (
                name,
                _pose3_tuple(a.tool_pose) if a.tool_pose else None,
                a.gripper_opening,
                a.attachment,
                a.attach_offset,
            )
            for name, a in sorted(r.arms.items())
        )
        robot = ((r.base.x, r.base.y, r.base.theta), r.base_radius, r.head_yaw, r.head_pitch, arms)
        return (bodies, objects, robot)

    def validate(self) -> None:
        """Check world invariants; raises ValueError on the first violation."""
        for obj in self.objects.values():
            if obj.attached_arm is None:
                if obj.support is not None:
                    body = self.bodies[obj.support]
                    expected = body.z_hi + obj.dims[2] / 2.0
                    if abs(obj.pose.z - expected) > SUPPORT_TOLERANCE:
                        raise ValueError(f"{obj.name}: not resting on {obj.support}")
                else:
                    raise ValueError(f"{obj.name}: neither supported nor attached")
        for a, b in itertools.combinations(self.objects.values(), 2):
            if a.attached_arm is not None or b.attached_arm is not None:
                continue
            if a.footprint.overlaps(b.footprint) and _intervals_overlap(
                a.z_interval, b.z_interval
            ):
                raise ValueError(f"objects {a.name} and {b.name} overlap")
        for body in self.bodies.values():
            if body.footprint.distance_to_point(self.robot.base.x, self.robot.base.y) < self.robot.base_radius:
                raise ValueError(f"robot base intersects {body.name}")
        for arm_name in ARMS:
            arm = self.robot.arms[arm_name]
            if arm.attachment is not None:
                obj = self.objects[arm.attachment]
                if arm.gripper_opening >= min(obj.dims[0], obj.dims[1]):
                    raise ValueError(f"{arm_name} gripper too wide for {obj.name}")


# -- rigid-pose arithmetic ----------------------------------------------------


def transform_pose(old_frame: Pose2D, new_frame: Pose2D, pose: Pose3D) -> Pose3D:
    """Re-express a map-frame pose after its carrier frame moved rigidly."""
    dth = new_frame.theta - old_frame.theta
    c, s = math.cos(dth), math.sin(dth)
    rx, ry = pose.x - old_frame.x, pose.y - old_frame.y
    return Pose3D(
        new_frame.x + c * rx - s * ry,
        new_frame.y + s * rx + c * ry,
        pose.z,
        pose.yaw + dth,
    )


def compose_pose(frame: Pose3D, offset: tuple[float, float, float, float]) -> Pose3D:
    ox, oy, oz, oyaw = offset
    c, s = math.cos(frame.yaw), math.sin(frame.yaw)
    return Pose3D(frame.x + c * ox - s * oy, frame.y + s * ox + c * oy, frame.z + oz, frame.yaw + oyaw)


def pose_in_frame(frame: Pose3D, pose: Pose3D) -> tuple[float, float, float, float]:
    c, s = math.cos(-frame.yaw), math.sin(-frame.yaw)
    rx, ry = pose.x - frame.x, pose.y - frame.y
    return (c * rx - s * ry, s * rx + c * ry, pose.z - frame.z, normalize_angle(pose.yaw - frame.yaw))


def _intervals_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def _pose3_tuple(p: Pose3D) -> tuple[float, float, float, float]:
    return (p.x, p.y, p.z, p.yaw)


# -- geometric oracles --------------------------------------------------------


def base_collision_free(world: WorldState, base_pose: Pose2D) -> bool:
    """True iff the robot's base disk at base_pose intersects no body footprint."""
    radius = world.robot.base_radius
    if world.bounds is not None:
        inner = world.bounds.inset(radius)
        if not inner.contains_point(base_pose.x, base_pose.y):
            return False
    for body in world.bodies.values():
        if body.footprint.distance_to_point(base_pose.x, base_pose.y) < radius:
            return False
    return True


def _segment_crosses_body(
    footprint: Rect, z_lo: float, z_hi: float, start: Pose3D, end: Pose3D
) -> bool:
    span = footprint.clip_segment(start.x, start.y, end.x, end.y)
    if span is None:
        return False
    t0, t1 = span
    z0 = start.z + t0 * (end.z - start.z)
    z1 = start.z + t1 * (end.z - start.z)
    return min(z0, z1) < z_hi and z_lo < max(z0, z1)


def visible(world: WorldState, eye: Pose3D, target: Pose3D) -> bool:
    """True iff the straight segment eye->target crosses no body at blocking height."""
    for body in world.bodies.values():
        if _segment_crosses_body(body.footprint, body.z_lo, body.z_hi, eye, target):
            return False
    return True


def reachable(
    world: WorldState,
    robot: RobotState,
    arm: str,
    grasp_pose: Pose3D,
    grasp: str,
) -> ArmConfig | None:
    """Analytic stand-in for an IK query.

    The pose is reachable when its horizontal distance from the shoulder lies
    in the reach annulus, its height lies in the reach band, and the straight
    shoulder->pose segment crosses no body above the band floor.
    """
    del grasp  # approach direction does not constrain this workspace model
    sx, sy, sz = robot.shoulder_point(arm)
    extension = math.hypot(grasp_pose.x - sx, grasp_pose.y - sy)
    if not robot.reach_min <= extension <= robot.reach_max:
        return None
    if not robot.reach_z_lo <= grasp_pose.z <= robot.reach_z_hi:
        return None
    shoulder = Pose3D(sx, sy, sz, robot.base.theta)
    for body in world.bodies.values():
        if body.z_hi <= robot.reach_z_lo:
            continue
        if _segment_crosses_body(body.footprint, body.z_lo, body.z_hi, shoulder, grasp_pose):
            return None
    return ArmConfig(arm=arm, tool_pose=grasp_pose, extension=extension)


def dims_for_type(world: WorldState, object_type: str) -> tuple[float, float, float]:
    for obj in sorted(world.objects.values(), key=lambda o: o.name):
        if obj.type == object_type:
            return obj.dims
    try:
        return DEFAULT_OBJECT_DIMS[object_type]
    except KeyError:
        raise KeyError(f"no dimensions known for object type {object_type!r}") from None


def stable_placement(
    world: WorldState,
    object_type: str,
    pose: Pose3D,
    ignore: frozenset[str] | set[str] = frozenset(),
) -> bool:
    """True iff an object of this type can rest at pose.

    Requires full footprint containment on some surface body, a z matching
    that surface's top, and no overlap with other (non-held) objects.
    """
    dx, dy, dz = dims_for_type(world, object_type)
    footprint = Rect.from_center(pose.x, pose.y, dx, dy)
    z_interval = (pose.z - dz / 2.0, pose.z + dz / 2.0)
    supported = False
    for body in world.bodies.values():
        if body.kind != "surface":
            continue
        if not body.footprint.contains_rect(footprint):
            continue
        if abs(pose.z - (body.z_hi + dz / 2.0)) <= SUPPORT_TOLERANCE:
            supported = True
            break
    if not supported:
        return False
    for obj in world.objects.values():
        if obj.name in ignore or obj.attached_arm is not None:
            continue
        if footprint.overlaps(obj.footprint) and _intervals_overlap(z_interval, obj.z_interval):
            return False
    return True


def point_obstruction(
    world: WorldState, x: float, y: float, z: float, ignore: frozenset[str] | set[str] = frozenset()
) -> str | None:
    """Name of the body or object occupying a point, or None."""
    for body in world.bodies.values():
        if body.name in ignore:
            continue
        if body.footprint.contains_point(x, y) and body.z_lo < z < body.z_hi:
            return body.name
    for obj in world.objects.values():
        if obj.name in ignore or obj.attached_arm is not None:
            continue
        lo, hi = obj.z_interval
        if obj.footprint.contains_point(x, y) and lo < z < hi:
            return obj.name
    return None


def segment_obstruction(
    world: WorldState, start: Pose3D, end: Pose3D, ignore: frozenset[str] | set[str] = frozenset()
) -> str | None:
    """Name of the first body or object crossed by the segment, or None."""
    for body in world.bodies.values():
        if body.name in ignore:
            continue
        if _segment_crosses_body(body.footprint, body.z_lo, body.z_hi, start, end):
            return body.name
    for obj in world.objects.values():
        if obj.name in ignore or obj.attached_arm is not None:
            continue
        lo, hi = obj.z_interval
        if _segment_crosses_body(obj.footprint, lo, hi, start, end):
            return obj.name
    return None


def find_visible_object(
    world: WorldState, eye: Pose3D, object_type: str, max_range: float = DETECT_RANGE
) -> ObjectInstance | None:
    """Nearest visible, in-range, unheld object of the type; ties break by name."""
    candidates = []
    for obj in world.objects.values():
        if obj.type != object_type or obj.attached_arm is not None:
            continue
        distance = eye.distance_to(obj.pose)
        if distance <= max_range and visible(world, eye, obj.pose):
            candidates.append((distance, obj.name, obj))
    if not candidates:
        return None
    candidates.sort(key=lambda item: (item[0], item[1]))
    return candidates[0][2]


def detect(
    world: WorldState,
    eye: Pose3D,
    object_type: str,
    noise: NoiseModel,
    rng: Random,
) -> Pose3D | None:
    """Perceive an object of the type from eye; None means no match was found."""
    obj = find_visible_object(world, eye, object_type)
    if obj is None:
        return None
    return noise.perturb(obj.pose, rng, distance=eye.distance_to(obj.pose))


# -- base-path routing ----------------------------------------------------------

NAV_CELL = 0.10


def _nav_grid(world: WorldState) -> tuple[bytearray, int, int, float, float] | None:
    """Lazy occupancy grid for base routing; None when the world is unbounded.

    Cells are blocked with an extra inflation of cell/sqrt(2) so that straight
    legs between free cell centers keep true base clearance.
    """
    if world.bounds is None:
        return None
    signature = tuple(sorted(world.bodies)) + (world.robot.base_radius,)
    cached = getattr(world, "_nav_grid_cache", None)
    if cached is not None and cached[0] == signature:
        return cached[1]
    bounds = world.bounds
    nx = max(1, math.ceil((bounds.x_max - bounds.x_min) / NAV_CELL))
    ny = max(1, math.ceil((bounds.y_max - bounds.y_min) / NAV_CELL))
    margin = world.robot.base_radius + NAV_CELL * 0.7071
    grid = bytearray(nx * ny)
    inner = bounds.inset(world.robot.base_radius)
    for i in range(nx):
        x = bounds.x_min + (i + 0.5) * NAV_CELL
        for j in range(ny):
            y = bounds.y_min + (j + 0.5) * NAV_CELL
            if not inner.contains_point(x, y):
                grid[i * ny + j] = 1
                continue
            for body in world.bodies.values():
                if body.footprint.distance_to_point(x, y) < margin:
                    grid[i * ny + j] = 1
                    break
    result = (grid, nx, ny, bounds.x_min, bounds.y_min)
    world._nav_grid_cache = (signature, result)  # type: ignore[attr-defined]
    return result


def same_nav_component(world: WorldState, a: Pose2D, b: Pose2D) -> bool:
    """True iff b is route-reachable from a over the free-space grid.

    A pose whose (inflated) grid cell is blocked but which is itself
    collision-free adopts the component of an adjacent free cell, matching
    how base_route force-frees tight start and goal cells.
    """
    nav = _nav_grid(world)
    if nav is None:
        return True
    grid, nx, ny, x0, y0 = nav
    labels = _nav_components(world, grid, nx, ny)

    def component_of(pose: Pose2D) -> int:
        i = min(nx - 1, max(0, int((pose.x - x0) / NAV_CELL)))
        j = min(ny - 1, max(0, int((pose.y - y0) / NAV_CELL)))
        if not grid[i * ny + j]:
            return labels[i * ny + j]
        if not base_collision_free(world, pose):
            return -1
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)):
            ni, nj = i + di, j + dj
            if 0 <= ni < nx and 0 <= nj < ny and not grid[ni * ny + nj]:
                return labels[ni * ny + nj]
        return -1

    ca, cb = component_of(a), component_of(b)
    return ca >= 0 and ca == cb


def _nav_components(world: WorldState, grid: bytearray, nx: int, ny: int) -> list[int]:
    cached = getattr(world, "_nav_component_cache", None)
    if cached is not None and cached[0] is grid:
        return cached[1]
    labels = [-1] * (nx * ny)
    component = 0
    for seed in range(nx * ny):
        if grid[seed] or labels[seed] >= 0:
            continue
        queue = [seed]
        labels[seed] = component
        head = 0
        while head < len(queue):
            cell = queue[head]
            head += 1
            ci, cj = divmod(cell, ny)
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ni, nj = ci + di, cj + dj
                if not (0 <= ni < nx and 0 <= nj < ny):
                    continue
                neighbor = ni * ny + nj
                if not grid[neighbor] and labels[neighbor] < 0:
                    labels[neighbor] = component
                    queue.append(neighbor)
        component += 1
    world._nav_component_cache = (grid, labels)  # type: ignore[attr-defined]
    return labels


def base_route(world: WorldState, start: Pose2D, goal: Pose2D) -> list[Pose2D] | None:
    """Waypoints from start to goal around furniture, or None when blocked.

    Breadth-first search over the occupancy grid (8-connected). Unbounded
    worlds fall back to the straight line. Start and goal cells are forced
    free when the exact poses are collision-free, so tight-but-valid stand
    points remain routable.
    """
    nav = _nav_grid(world)
    if nav is None:
        return [goal]
    grid, nx, ny, x0, y0 = nav

    def cell_of(pose: Pose2D) -> tuple[int, int]:
        i = min(nx - 1, max(0, int((pose.x - x0) / NAV_CELL)))
        j = min(ny - 1, max(0, int((pose.y - y0) / NAV_CELL)))
        return i, j

    start_cell = cell_of(start)
    goal_cell = cell_of(goal)
    forced = set()
    for cell, pose in ((start_cell, start), (goal_cell, goal)):
        if grid[cell[0] * ny + cell[1]] and base_collision_free(world, pose):
            forced.add(cell)

    def blocked(i: int, j: int) -> bool:
        if (i, j) in forced:
            return False
        return bool(grid[i * ny + j])

    if blocked(*start_cell) or blocked(*goal_cell):
        return None
    if start_cell == goal_cell:
        return [goal]
    previous: dict[tuple[int, int], tuple[int, int]] = {start_cell: start_cell}
    queue = [start_cell]
    head = 0
    neighbors = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))
    while head < len(queue):
        current = queue[head]
        head += 1
        if current == goal_cell:
            break
        ci, cj = current
        for di, dj in neighbors:
            ni, nj = ci + di, cj + dj
            if not (0 <= ni < nx and 0 <= nj < ny):
                continue
            if (ni, nj) in previous or blocked(ni, nj):
                continue
            previous[(ni, nj)] = current
            queue.append((ni, nj))
    if goal_cell not in previous:
        return None
    cells = [goal_cell]
    while cells[-1] != start_cell:
        cells.append(previous[cells[-1]])
    cells.reverse()
    route = [
        Pose2D(x0 + (i + 0.5) * NAV_CELL, y0 + (j + 0.5) * NAV_CELL, goal.theta)
        for i, j in cells[1:-1]
    ]
    route.append(goal)
    return route
