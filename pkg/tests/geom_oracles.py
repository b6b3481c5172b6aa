"""Independent dense-sampling oracles for the geometric predicates.

These deliberately re-derive each predicate by brute force (1 cm grids and
segment walks) so the analytic implementations are checked against a second
route. Each oracle also reports a margin: the distance of the query from the
nearest decision boundary, used to excuse disagreements that sit within grid
resolution of a boundary.
"""

from __future__ import annotations

import math

from planproj.geomworld import Pose2D, Pose3D, Rect, WorldState

GRID = 0.01


def _frange(lo: float, hi: float, step: float):
    count = max(1, int(math.ceil((hi - lo) / step)) + 1)
    for i in range(count):
        yield min(lo + i * step, hi)


def brute_base_collision(world: WorldState, pose: Pose2D) -> tuple[bool, float]:
    """(collision-free?, boundary margin) by sampling the base disk on a 1 cm grid."""
    radius = world.robot.base_radius
    margins = []
    free = True
    if world.bounds is not None:
        inner = world.bounds.inset(radius)
        boundary_distance = min(
            pose.x - inner.x_min, inner.x_max - pose.x, pose.y - inner.y_min, inner.y_max - pose.y
        )
        margins.append(abs(boundary_distance))
        if boundary_distance < 0:
            free = False
    for body in world.bodies.values():
        hit = False
        for x in _frange(pose.x - radius, pose.x + radius, GRID):
            for y in _frange(pose.y - radius, pose.y + radius, GRID):
                if math.hypot(x - pose.x, y - pose.y) > radius:
                    continue
                if body.footprint.contains_point(x, y):
                    hit = True
                    break
            if hit:
                break
        if hit:
            free = False
        margins.append(abs(body.footprint.distance_to_point(pose.x, pose.y) - radius))
    return free, min(margins) if margins else math.inf


def _point_in_body(body, x: float, y: float, z: float) -> bool:
    return body.footprint.contains_point(x, y) and body.z_lo <= z <= body.z_hi


def _segment_margin(body, start: Pose3D, end: Pose3D, steps: int) -> float:
    """Distance of the closest sampled segment point to the body's boundary."""
    best = math.inf
    for i in range(steps + 1):
        t = i / steps
        x = start.x + t * (end.x - start.x)
        y = start.y + t * (end.y - start.y)
        z = start.z + t * (end.z - start.z)
        planar = body.footprint.distance_to_point(x, y)
        if planar > 0.0:
            vertical = max(body.z_lo - z, z - body.z_hi, 0.0)
            best = min(best, math.hypot(planar, vertical))
        else:
            vertical = max(body.z_lo - z, z - body.z_hi)
            if vertical > 0.0:
                best = min(best, vertical)
            else:
                # inside: distance to the nearest face
                inside = min(
                    x - body.footprint.x_min,
                    body.footprint.x_max - x,
                    y - body.footprint.y_min,
                    body.footprint.y_max - y,
                    z - body.z_lo,
                    body.z_hi - z,
                )
                best = min(best, inside)
    return best


def brute_visible(world: WorldState, eye: Pose3D, target: Pose3D) -> tuple[bool, float]:
    """(visible?, boundary margin) by walking the sight line at 1 cm."""
    length = max(eye.distance_to(target), 1e-9)
    steps = max(2, int(math.ceil(length / GRID)))
    clear = True
    margin = math.inf
    for body in world.bodies.values():
        blocked = any(
            _point_in_body(
                body,
                eye.x + (i / steps) * (target.x - eye.x),
                eye.y + (i / steps) * (target.y - eye.y),
                eye.z + (i / steps) * (target.z - eye.z),
            )
            for i in range(steps + 1)
        )
        if blocked:
            clear = False
        margin = min(margin, _segment_margin(body, eye, target, steps))
    return clear, margin


def brute_reachable(world: WorldState, arm: str, grasp_pose: Pose3D) -> tuple[bool, float]:
    """(reachable?, margin) re-deriving annulus, band and sweep conditions."""
    robot = world.robot
    sx, sy, sz = robot.shoulder_point(arm)
    extension = math.hypot(grasp_pose.x - sx, grasp_pose.y - sy)
    margins = [
        abs(extension - robot.reach_min),
        abs(extension - robot.reach_max),
        abs(grasp_pose.z - robot.reach_z_lo),
        abs(grasp_pose.z - robot.reach_z_hi),
    ]
    ok = robot.reach_min <= extension <= robot.reach_max
    ok = ok and robot.reach_z_lo <= grasp_pose.z <= robot.reach_z_hi
    shoulder = Pose3D(sx, sy, sz, robot.base.theta)
    length = max(shoulder.distance_to(grasp_pose), 1e-9)
    steps = max(2, int(math.ceil(length / GRID)))
    for body in world.bodies.values():
        if body.z_hi <= robot.reach_z_lo:
            continue
        blocked = any(
            _point_in_body(
                body,
                shoulder.x + (i / steps) * (grasp_pose.x - shoulder.x),
                shoulder.y + (i / steps) * (grasp_pose.y - shoulder.y),
                shoulder.z + (i / steps) * (grasp_pose.z - shoulder.z),
            )
            for i in range(steps + 1)
        )
        if blocked:
            ok = False
        margins.append(_segment_margin(body, shoulder, grasp_pose, steps))
    return ok, min(margins)


def brute_stable_placement(
    world: WorldState, object_type: str, pose: Pose3D, dims: tuple[float, float, float]
) -> tuple[bool, float]:
    """(stable?, margin) by sampling the object footprint on a 1 cm grid."""
    dx, dy, dz = dims
    footprint = Rect.from_center(pose.x, pose.y, dx, dy)
    z_lo, z_hi = pose.z - dz / 2.0, pose.z + dz / 2.0
    margins = []
    supported = False
    for body in world.bodies.values():
        if body.kind != "surface":
            continue
        all_inside = all(
            body.footprint.contains_point(x, y)
            for x in _frange(footprint.x_min, footprint.x_max, GRID)
            for y in _frange(footprint.y_min, footprint.y_max, GRID)
        )
        containment_margin = min(
            footprint.x_min - body.footprint.x_min,
            body.footprint.x_max - footprint.x_max,
            footprint.y_min - body.footprint.y_min,
            body.footprint.y_max - footprint.y_max,
        )
        margins.append(abs(containment_margin))
        height_error = abs(pose.z - (body.z_hi + dz / 2.0))
        margins.append(abs(height_error - 1e-3))
        if all_inside and height_error <= 1e-3:
            supported = True
    stable = supported
    for obj in world.objects.values():
        if obj.attached_arm is not None:
            continue
        overlap = any(
            obj.footprint.contains_point(x, y)
            for x in _frange(footprint.x_min, footprint.x_max, GRID)
            for y in _frange(footprint.y_min, footprint.y_max, GRID)
        )
        olo, ohi = obj.z_interval
        z_overlap = z_lo < ohi and olo < z_hi
        if overlap and z_overlap:
            stable = False
        gap_x = max(obj.footprint.x_min - footprint.x_max, footprint.x_min - obj.footprint.x_max)
        gap_y = max(obj.footprint.y_min - footprint.y_max, footprint.y_min - obj.footprint.y_max)
        margins.append(abs(max(gap_x, gap_y)))
    return stable, min(margins) if margins else math.inf
