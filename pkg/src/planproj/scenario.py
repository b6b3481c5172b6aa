"""Scenario runner: load a world config, transport each object, tally metrics.

One scenario run transports every configured object in order on the
simulated-real executor pair, records one task tree per object, writes
canonical trace files, and reports paper-style per-object metrics
(collision failures, reachability failures, arm and grasp used, success).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from random import Random

from .designator import (
    DEFAULT_OBJECT_KNOWLEDGE,
    Description,
    KnowledgeTable,
    ObjectKnowledge,
    a_location,
    an_action,
    the_object,
)
from .geomworld import (
    Body,
    NoiseModel,
    ObjectInstance,
    Pose2D,
    Pose3D,
    Rect,
    RobotState,
    WorldState,
)
from .introspect import action_subtasks
from .plans import Executor, ProjectionSettings, RetryLimits, perform
from .seeding import derive_seed
from .tasktree import (
    Failure,
    LogicalClock,
    TaskRecorder,
    TaskStatus,
    TaskTree,
    tree_document,
    tree_from_document,
)

SCHEMA_VERSION = 1

COLLISION_KINDS = frozenset({"navigation-pose-in-collision", "manipulation-pose-in-collision"})
REACHABILITY_KINDS = frozenset(
    {"navigation-pose-unreachable", "manipulation-pose-unreachable", "object-unreachable"}
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BodySpec:
    name: str
    kind: str
    rect: tuple[float, float, float, float]
    z: tuple[float, float]


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    type: str
    pose: tuple[float, float, float, float]
    dims: tuple[float, float, float]
    surface: str


@dataclass
class ScenarioConfig:
    schema_version: int
    bounds: tuple[float, float, float, float]
    bodies: list[BodySpec]
    objects: list[ObjectSpec]
    robot_pose: tuple[float, float, float]
    object_order: list[str]
    goal_poses: dict[str, tuple[float, float, float, float]]
    search_surface: str
    deliver_surface: str
    projection: ProjectionSettings = field(default_factory=ProjectionSettings)
    noise: NoiseModel = field(default_factory=NoiseModel)
    retries: RetryLimits = field(default_factory=RetryLimits)
    object_params: KnowledgeTable = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        try:
            return _config_from_dict(doc)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed scenario config: {exc}") from exc

    def to_dict(self) -> dict:
        return _config_to_dict(self)

    def knowledge(self) -> KnowledgeTable:
        table = dict(DEFAULT_OBJECT_KNOWLEDGE)
        table.update(self.object_params)
        return table


def _config_from_dict(doc: dict) -> ScenarioConfig:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    world = doc["world"]
    bodies = [
        BodySpec(b["name"], b["kind"], tuple(b["rect"]), tuple(b["z"])) for b in world["bodies"]
    ]
    objects = [
        ObjectSpec(o["name"], o["type"], tuple(o["pose"]), tuple(o["dims"]), o["surface"])
        for o in world["objects"]
    ]
    projection_doc = doc.get("projection", {})
    noise_doc = doc.get("noise", {})
    retries_doc = doc.get("retries", {})
    params_doc = doc.get("object_params", {})
    params = {
        name: ObjectKnowledge(
            gripper_opening=entry["gripper_opening"],
            grasping_force=entry["grasping_force"],
            standoff=entry["standoff"],
            grasps=tuple(entry["grasps"]),
        )
        for name, entry in params_doc.items()
    }
    config = ScenarioConfig(
        schema_version=version,
        bounds=tuple(world["bounds"]),
        bodies=bodies,
        objects=objects,
        robot_pose=tuple(doc["robot"]["pose"]),
        object_order=list(doc["object_order"]),
        goal_poses={name: tuple(pose) for name, pose in doc["goal_poses"].items()},
        search_surface=doc["search_surface"],
        deliver_surface=doc["deliver_surface"],
        projection=ProjectionSettings(
            enabled=bool(projection_doc.get("enabled", False)),
            n_runs=int(projection_doc.get("n_runs", 4)),
            cost_fn=projection_doc.get("cost_fn", "distance"),
        ),
        noise=NoiseModel(
            sigma=noise_doc.get("sigma", 0.015),
            clip=noise_doc.get("clip", 0.05),
            p_flip=noise_doc.get("p_flip", 0.1),
            p_nav_miss=noise_doc.get("p_nav_miss", 0.05),
            p_manip_miss=noise_doc.get("p_manip_miss", 0.05),
        ),
        retries=RetryLimits(
            k_search=int(retries_doc.get("k_search", 4)),
            r_fetch=int(retries_doc.get("r_fetch", 20)),
            r_deliver_outer=int(retries_doc.get("r_deliver_outer", 8)),
            r_deliver_inner=int(retries_doc.get("r_deliver_inner", 4)),
        ),
        object_params=params,
    )
    validate_config(config)
    return config


def _config_to_dict(config: ScenarioConfig) -> dict:
    return {
        "schema_version": config.schema_version,
        "world": {
            "bounds": list(config.bounds),
            "bodies": [
                {"name": b.name, "kind": b.kind, "rect": list(b.rect), "z": list(b.z)}
                for b in config.bodies
            ],
            "objects": [
                {
                    "name": o.name,
                    "type": o.type,
                    "pose": list(o.pose),
                    "dims": list(o.dims),
                    "surface": o.surface,
                }
                for o in config.objects
            ],
        },
        "robot": {"pose": list(config.robot_pose)},
        "object_order": list(config.object_order),
        "goal_poses": {name: list(pose) for name, pose in config.goal_poses.items()},
        "search_surface": config.search_surface,
        "deliver_surface": config.deliver_surface,
        "projection": {
            "enabled": config.projection.enabled,
            "n_runs": config.projection.n_runs,
            "cost_fn": config.projection.cost_fn,
        },
        "noise": {
            "sigma": config.noise.sigma,
            "clip": config.noise.clip,
            "p_flip": config.noise.p_flip,
            "p_nav_miss": config.noise.p_nav_miss,
            "p_manip_miss": config.noise.p_manip_miss,
        },
        "retries": {
            "k_search": config.retries.k_search,
            "r_fetch": config.retries.r_fetch,
            "r_deliver_outer": config.retries.r_deliver_outer,
            "r_deliver_inner": config.retries.r_deliver_inner,
        },
        "object_params": {
            name: {
                "gripper_opening": entry.gripper_opening,
                "grasping_force": entry.grasping_force,
                "standoff": entry.standoff,
                "grasps": list(entry.grasps),
            }
            for name, entry in config.object_params.items()
        },
    }


def validate_config(config: ScenarioConfig) -> None:
    bounds = Rect(*config.bounds)
    body_names = {b.name for b in config.bodies}
    if len(body_names) != len(config.bodies):
        raise ConfigError("duplicate body names")
    for body in config.bodies:
        if body.kind not in ("furniture", "surface", "object"):
            raise ConfigError(f"body {body.name!r}: unknown kind {body.kind!r}")
        if not bounds.contains_rect(Rect(*body.rect)):
            raise ConfigError(f"body {body.name!r}: footprint outside world bounds")
    for surface in (config.search_surface, config.deliver_surface):
        if surface not in body_names:
            raise ConfigError(f"surface {surface!r} is not a configured body")
    object_types = [o.type for o in config.objects]
    if len(set(o.name for o in config.objects)) != len(config.objects):
        raise ConfigError("duplicate object names")
    if sorted(config.object_order) != sorted(object_types):
        raise ConfigError("object_order must be a permutation of the configured object types")
    for obj in config.objects:
        if obj.surface not in body_names:
            raise ConfigError(f"object {obj.name!r}: unknown surface {obj.surface!r}")
        if not bounds.contains_point(obj.pose[0], obj.pose[1]):
            raise ConfigError(f"object {obj.name!r}: pose outside world bounds")
    for object_type in config.object_order:
        if object_type not in config.goal_poses:
            raise ConfigError(f"no goal pose for object type {object_type!r}")
        goal = config.goal_poses[object_type]
        if not bounds.contains_point(goal[0], goal[1]):
            raise ConfigError(f"goal pose for {object_type!r} outside world bounds")
    if not bounds.contains_point(config.robot_pose[0], config.robot_pose[1]):
        raise ConfigError("robot pose outside world bounds")
    if config.projection.n_runs < 1:
        raise ConfigError("projection.n_runs must be at least 1")


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file is not valid JSON: {exc}") from exc
    return ScenarioConfig.from_dict(doc)


def build_worlds(config: ScenarioConfig) -> tuple[WorldState, WorldState]:
    """Ground-truth world plus an initially object-free belief world."""
    bounds = Rect(*config.bounds)
    bodies = {
        spec.name: Body(spec.name, Rect(*spec.rect), spec.z[0], spec.z[1], spec.kind)
        for spec in config.bodies
    }
    truth = WorldState(
        bodies=bodies,
        robot=RobotState(base=Pose2D(*config.robot_pose)),
        bounds=bounds,
    )
    for spec in config.objects:
        truth.add_object(
            ObjectInstance(spec.name, spec.type, Pose3D(*spec.pose), spec.dims, spec.surface)
        )
    truth.validate()
    belief = WorldState(
        bodies=dict(bodies),
        robot=RobotState(base=Pose2D(*config.robot_pose)),
        bounds=bounds,
    )
    return truth, belief


# -- metrics ---------------------------------------------------------------------


@dataclass
class ObjectRecord:
    """Metrics for one transported object within one scenario run."""

    object_type: str
    object_name: str
    steps: int
    arm: str | None
    grasp: str | None
    success: bool
    collision_failures: int
    reachability_failures: int
    other_failures: int
    projection_runs: int = 0
    projection_successes: int = 0
    exec_wall_s: float = 0.0
    projection_wall_s: float = 0.0

    @property
    def failure_sum(self) -> int:
        """Paper-style sum: collision plus reachability failures."""
        return self.collision_failures + self.reachability_failures

    def to_record(self, include_wall: bool = False) -> dict:
        record = {
            "object_type": self.object_type,
            "object_name": self.object_name,
            "steps": self.steps,
            "arm": self.arm,
            "grasp": self.grasp,
            "success": self.success,
            "collision_failures": self.collision_failures,
            "reachability_failures": self.reachability_failures,
            "failure_sum": self.failure_sum,
            "other_failures": self.other_failures,
            "projection_runs": self.projection_runs,
            "projection_successes": self.projection_successes,
        }
        if include_wall:
            record["exec_wall_s"] = self.exec_wall_s
            record["projection_wall_s"] = self.projection_wall_s
        return record


@dataclass
class RunMetrics:
    """Per-object rows plus totals for one scenario run."""

    seed: int
    projection_enabled: bool
    rows: list[ObjectRecord]

    @property
    def total_collisions(self) -> int:
        return sum(r.collision_failures for r in self.rows)

    @property
    def total_reachability(self) -> int:
        return sum(r.reachability_failures for r in self.rows)

    @property
    def total_failures(self) -> int:
        return sum(r.failure_sum for r in self.rows)

    @property
    def successes(self) -> int:
        return sum(1 for r in self.rows if r.success)

    def to_records(self, include_wall: bool = False) -> list[dict]:
        records = []
        for row in self.rows:
            record = {"seed": self.seed, "projection": self.projection_enabled}
            record.update(row.to_record(include_wall=include_wall))
            records.append(record)
        records.append(
            {
                "seed": self.seed,
                "projection": self.projection_enabled,
                "object_type": "__total__",
                "success": f"{self.successes} of {len(self.rows)}",
                "collision_failures": self.total_collisions,
                "reachability_failures": self.total_reachability,
                "failure_sum": self.total_failures,
            }
        )
        return records

    def format_table(self) -> str:
        names = [r.object_type for r in self.rows]
        columns = ["Object"] + names + ["Total"]
        lines = []

        def row(label: str, cells: list[str], total: str = "") -> None:
            lines.append(
                "  ".join([label.ljust(14)] + [c.rjust(8) for c in cells] + [total.rjust(8)])
            )

        row(columns[0], names, "Total")
        row("Runtime", [str(r.steps) for r in self.rows], str(sum(r.steps for r in self.rows)))
        row("Arm used", [r.arm or "-" for r in self.rows])
        row("Grasp used", [r.grasp or "-" for r in self.rows])
        if self.projection_enabled:
            row(
                "Proj. success",
                [f"{r.projection_successes} of {r.projection_runs}" for r in self.rows],
            )
        row(
            "Success",
            ["yes" if r.success else "no" for r in self.rows],
            f"{self.successes} of {len(self.rows)}",
        )
        row(
            "Coll. fail.",
            [str(r.collision_failures) for r in self.rows],
            str(self.total_collisions),
        )
        row(
            "Reach. fail.",
            [str(r.reachability_failures) for r in self.rows],
            str(self.total_reachability),
        )
        row("Sum failures", [str(r.failure_sum) for r in self.rows], str(self.total_failures))
        return "\n".join(lines)


@dataclass
class AggregateMetrics:
    """Column means over several scenario runs (same object order)."""

    runs: int
    projection_enabled: bool
    object_types: list[str]
    mean_collisions: dict[str, float]
    mean_reachability: dict[str, float]
    mean_failures: dict[str, float]
    success_rate: dict[str, float]
    mean_total_failures: float
    overall_success_rate: float

    def format_table(self) -> str:
        columns = self.object_types
        lines = []

        def row(label: str, cells: list[str], total: str, per_object: str) -> None:
            lines.append(
                "  ".join(
                    [label.ljust(14)]
                    + [c.rjust(8) for c in cells]
                    + [total.rjust(8), per_object.rjust(9)]
                )
            )

        row("Object", columns, "Total", "Per obj.")
        total_coll = sum(self.mean_collisions.values())
        total_reach = sum(self.mean_reachability.values())
        row(
            "Coll. fail.",
            [f"{self.mean_collisions[t]:.2f}" for t in columns],
            f"{total_coll:.2f}",
            f"{total_coll / len(columns):.2f}",
        )
        row(
            "Reach. fail.",
            [f"{self.mean_reachability[t]:.2f}" for t in columns],
            f"{total_reach:.2f}",
            f"{total_reach / len(columns):.2f}",
        )
        row(
            "Total fail.",
            [f"{self.mean_failures[t]:.2f}" for t in columns],
            f"{self.mean_total_failures:.2f}",
            f"{self.mean_total_failures / len(columns):.2f}",
        )
        row(
            "Success rate",
            [f"{100 * self.success_rate[t]:.0f}%" for t in columns],
            f"{100 * self.overall_success_rate:.0f}%",
            f"{100 * self.overall_success_rate:.0f}%",
        )
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        records = []
        for object_type in self.object_types:
            records.append(
                {
                    "aggregate": True,
                    "runs": self.runs,
                    "projection": self.projection_enabled,
                    "object_type": object_type,
                    "mean_collision_failures": self.mean_collisions[object_type],
                    "mean_reachability_failures": self.mean_reachability[object_type],
                    "mean_failure_sum": self.mean_failures[object_type],
                    "success_rate": self.success_rate[object_type],
                }
            )
        records.append(
            {
                "aggregate": True,
                "runs": self.runs,
                "projection": self.projection_enabled,
                "object_type": "__total__",
                "mean_failure_sum": self.mean_total_failures,
                "success_rate": self.overall_success_rate,
            }
        )
        return records


def aggregate(results: list[RunMetrics]) -> AggregateMetrics:
    if not results:
        raise ValueError("aggregate requires at least one scenario run")
    object_types = [row.object_type for row in results[0].rows]
    mean_coll: dict[str, float] = {}
    mean_reach: dict[str, float] = {}
    mean_fail: dict[str, float] = {}
    rate: dict[str, float] = {}
    for object_type in object_types:
        rows = [row for result in results for row in result.rows if row.object_type == object_type]
        mean_coll[object_type] = sum(r.collision_failures for r in rows) / len(rows)
        mean_reach[object_type] = sum(r.reachability_failures for r in rows) / len(rows)
        mean_fail[object_type] = sum(r.failure_sum for r in rows) / len(rows)
        rate[object_type] = sum(1 for r in rows if r.success) / len(rows)
    attempts = sum(len(result.rows) for result in results)
    return AggregateMetrics(
        runs=len(results),
        projection_enabled=results[0].projection_enabled,
        object_types=object_types,
        mean_collisions=mean_coll,
        mean_reachability=mean_reach,
        mean_failures=mean_fail,
        success_rate=rate,
        mean_total_failures=sum(result.total_failures for result in results) / len(results),
        overall_success_rate=sum(result.successes for result in results) / attempts,
    )


# -- failure counting --------------------------------------------------------------


def count_failures(tree: TaskTree) -> tuple[int, int, int]:
    """(collision, reachability, other) failure counts for one tree.

    A failure recorded on a node is skipped when an identical failure sits on
    one of its children: that is the same event propagating up, not a new one.
    """
    collision = reachability = other = 0
    for node in tree.walk():
        failure = node.failure
        if failure is None:
            continue
        if any(tree.nodes[child].failure == failure for child in node.children):
            continue
        if failure.kind in COLLISION_KINDS:
            collision += 1
        elif failure.kind in REACHABILITY_KINDS:
            reachability += 1
        else:
            other += 1
    return collision, reachability, other


def metrics_from_tree(tree: TaskTree) -> dict:
    """Derivable per-object metrics, recomputable from a trace file."""
    collision, reachability, other = count_failures(tree)
    transport = None
    for node in tree.walk():
        if node.code_label == "transporting":
            transport = node
            break
    success = transport is not None and transport.status is TaskStatus.SUCCEEDED
    arm = grasp = None
    for node, action in action_subtasks(tree, (), "picking-up"):
        if node.status is TaskStatus.SUCCEEDED:
            arm = action.get("arm")
            grasp = action.get("grasp")
    steps = (tree.root.ended_at or tree.root.created_at) - tree.root.created_at + 1
    return {
        "steps": steps,
        "arm": arm,
        "grasp": grasp,
        "success": success,
        "collision_failures": collision,
        "reachability_failures": reachability,
        "failure_sum": collision + reachability,
        "other_failures": other,
    }


# -- scenario execution -------------------------------------------------------------


@dataclass
class ScenarioRun:
    metrics: RunMetrics
    traces: dict[str, bytes]


def run_scenario(
    config: ScenarioConfig,
    seed: int,
    out_dir: str | Path | None = None,
) -> ScenarioRun:
    """Transport every configured object once; optionally write trace files."""
    truth, belief = build_worlds(config)
    clock = LogicalClock()
    rng = Random(derive_seed(seed, "exec"))
    executor = Executor.simulated_real(
        truth,
        belief,
        config.noise,
        rng,
        clock,
        knowledge=config.knowledge(),
        limits=config.retries,
        projection=config.projection,
    )
    specs_by_type = {}
    for spec in config.objects:
        specs_by_type.setdefault(spec.type, spec)
    rows: list[ObjectRecord] = []
    traces: dict[str, bytes] = {}
    for object_type in config.object_order:
        spec = specs_by_type[object_type]
        goal = Pose3D(*config.goal_poses[object_type])
        recorder = TaskRecorder(
            clock,
            meta={
                "start-base": belief.robot.base,
                "object": spec.name,
                "run-seed": seed,
            },
        )
        transport = an_action(
            "transporting",
            ("object", the_object(object_type, ("name", spec.name))),
            ("search-location", a_location("search-area", ("surface", config.search_surface))),
            (
                "deliver-location",
                a_location("placement", ("surface", config.deliver_surface), ("pose", goal)),
            ),
        )
        projections_before = len(executor.stats["projections"])
        wall_started = time.perf_counter()
        outcome = perform(executor, recorder, transport)
        wall_elapsed = time.perf_counter() - wall_started
        tree = recorder.finalize()
        projections = executor.stats["projections"][projections_before:]
        projection_wall = sum(entry["wall_s"] for entry in projections)
        derived = metrics_from_tree(tree)
        row = ObjectRecord(
            object_type=object_type,
            object_name=spec.name,
            steps=derived["steps"],
            arm=derived["arm"],
            grasp=derived["grasp"],
            success=outcome.ok,
            collision_failures=derived["collision_failures"],
            reachability_failures=derived["reachability_failures"],
            other_failures=derived["other_failures"],
            projection_runs=sum(entry["runs"] for entry in projections),
            projection_successes=sum(entry["successes"] for entry in projections),
            exec_wall_s=wall_elapsed - projection_wall,
            projection_wall_s=projection_wall,
        )
        rows.append(row)
        traces[object_type] = encode_trace(tree, row, seed)
    metrics = RunMetrics(seed=seed, projection_enabled=config.projection.enabled, rows=rows)
    run = ScenarioRun(metrics=metrics, traces=traces)
    if out_dir is not None:
        write_traces(run, out_dir)
    return run


def encode_trace(tree: TaskTree, row: ObjectRecord, seed: int) -> bytes:
    envelope = {
        "format": "trace.v1",
        "schema_version": SCHEMA_VERSION,
        "object_type": row.object_type,
        "object_name": row.object_name,
        "run_seed": seed,
        "metrics": row.to_record(include_wall=False),
        "tree": tree_document(tree),
    }
    return json.dumps(envelope, separators=(",", ":"), ensure_ascii=True).encode("ascii")


def decode_trace(data: bytes) -> tuple[dict, TaskTree]:
    doc = json.loads(data.decode("ascii"))
    if doc.get("format") != "trace.v1":
        raise ValueError("not a trace.v1 file")
    return doc, tree_from_document(doc["tree"])


def replay_trace(data: bytes) -> tuple[dict, dict, bool]:
    """(embedded metrics, recomputed metrics, consistent?) for one trace file."""
    doc, tree = decode_trace(data)
    embedded = doc["metrics"]
    recomputed = metrics_from_tree(tree)
    consistent = all(embedded.get(key) == value for key, value in recomputed.items())
    return embedded, recomputed, consistent


def write_traces(run: ScenarioRun, out_dir: str | Path) -> list[Path]:
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for object_type, data in run.traces.items():
        path = directory / f"{object_type}.trace.json"
        path.write_bytes(data)
        written.append(path)
    return written


# -- default scenario ----------------------------------------------------------------


def default_config() -> ScenarioConfig:
    """Breakfast-table world: five objects on a counter, goals on the table."""
    doc = {
        "schema_version": 1,
        "world": {
            "bounds": [0.0, 0.0, 5.6, 5.6],
            "bodies": [
                {"name": "counter", "kind": "surface", "rect": [0.6, 4.7, 3.0, 5.3], "z": [0.0, 0.9]},
                {"name": "cupboard", "kind": "furniture", "rect": [3.2, 4.7, 3.8, 5.3], "z": [0.0, 2.0]},
                {"name": "table", "kind": "surface", "rect": [2.6, 0.3, 3.8, 1.1], "z": [0.0, 0.75]},
                {"name": "sideboard", "kind": "furniture", "rect": [0.0, 0.0, 0.5, 2.5], "z": [0.0, 1.2]},
            ],
            "objects": [
                {"name": "cup-1", "type": "cup", "pose": [0.82, 4.98, 0.96, 0.8], "dims": [0.08, 0.08, 0.12], "surface": "counter"},
                {"name": "milk-1", "type": "milk", "pose": [1.03, 5.1, 1.0, 0.0], "dims": [0.07, 0.07, 0.2], "surface": "counter"},
                {"name": "cereal-1", "type": "cereal", "pose": [1.26, 5.06, 1.025, 0.2], "dims": [0.08, 0.16, 0.25], "surface": "counter"},
                {"name": "bowl-1", "type": "bowl", "pose": [2.45, 4.93, 0.935, 0.0], "dims": [0.16, 0.16, 0.07], "surface": "counter"},
                {"name": "spoon-1", "type": "spoon", "pose": [2.93, 5.02, 0.91, 1.3], "dims": [0.04, 0.15, 0.02], "surface": "counter"},
            ],
        },
        "robot": {"pose": [2.0, 3.0, 0.0]},
        "object_order": ["milk", "cup", "cereal", "bowl", "spoon"],
        "goal_poses": {
            "milk": [2.8, 0.55, 0.85, 0.0],
            "cup": [3.05, 0.95, 0.81, 0.0],
            "cereal": [3.5, 0.55, 0.875, 0.0],
            "bowl": [2.85, 0.95, 0.785, 0.0],
            "spoon": [3.45, 0.93, 0.76, 1.5707963267948966],
        },
        "search_surface": "counter",
        "deliver_surface": "table",
        "projection": {"enabled": False, "n_runs": 4, "cost_fn": "distance"},
        "noise": {"sigma": 0.015, "clip": 0.05, "p_flip": 0.1, "p_nav_miss": 0.05, "p_manip_miss": 0.05},
        "retries": {"k_search": 4, "r_fetch": 20, "r_deliver_outer": 8, "r_deliver_inner": 4},
        "object_params": {},
    }
    return ScenarioConfig.from_dict(doc)
