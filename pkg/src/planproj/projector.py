"""Project a plan segment ahead of execution and bind the winning parameters.

The construct snapshots the belief world, runs the segment N times on a
projected executor with independent derived seeds, scores each recorded task
tree with a cost function, restores the belief, and finally executes the
segment for real with the arm, grasp type and base locations taken from the
cheapest successful projection run. Trajectories are never reused; only the
transferable parameters cross from projection into execution.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from random import Random
from typing import Callable

from .designator import Description, make_description
from .geomworld import Pose2D, WorldState
from .introspect import action_subtasks, successful_fetch_and_deliver_params
from .plans import Executor, PlanFailure, TaskRecorder
from .seeding import derive_seed
from .tasktree import LogicalClock, TaskStatus, TaskTree

SLOT_KINDS = ("location-description", "action-description")


class BeliefLeakError(RuntimeError):
    """The belief world differed after the projection phase; runs must not leak."""


@dataclass
class Slot:
    """One entity description the construct may bind from projection results."""

    name: str
    kind: str
    bound: Description | None = None

    def __post_init__(self) -> None:
        if self.kind not in SLOT_KINDS:
            raise ValueError(f"unknown slot kind {self.kind!r}")

    def bind(self, value: Description) -> None:
        if self.bound is not None:
            raise RuntimeError(f"slot {self.name!r} is already bound")
        self.bound = value


def fetch_deliver_slots() -> list[Slot]:
    """The four slots optimized for a fetch-and-deliver segment."""
    return [
        Slot("fetch-robot-location", "location-description"),
        Slot("pick-up-action", "action-description"),
        Slot("deliver-robot-location", "location-description"),
        Slot("place-action", "action-description"),
    ]


@dataclass(frozen=True)
class Candidate:
    """One projection run: its recorded tree, extracted parameters and cost."""

    index: int
    tree: TaskTree
    success: bool
    parameters: tuple[Description, Description, Description, Description] | None
    cost: float


def _transferable_location(action: Description) -> Description:
    pose = action.get("pose")
    properties: list[tuple[str, object]] = [("type", "robot-base")]
    if pose is not None:
        properties.append(("pose", pose))
    return make_description("location", "a", properties)


def _transferable_action(action: Description) -> Description:
    properties: list[tuple[str, object]] = [("type", action.get("type"))]
    for key in ("arm", "grasp"):
        value = action.get(key)
        if value is not None:
            properties.append((key, value))
    return make_description("action", "an", properties)


def extract_parameters(
    tree: TaskTree,
) -> tuple[Description, Description, Description, Description] | None:
    """Transferable parameters of a successful projected fetch-and-deliver.

    Keeps only base poses for the two navigation slots and arm/grasp for the
    two action slots; trajectories and other grounding are dropped.
    """
    raw = successful_fetch_and_deliver_params(tree, ())
    if raw is None:
        return None
    pick_nav, pick, place_nav, place = raw
    return (
        _transferable_location(pick_nav),
        _transferable_action(pick),
        _transferable_location(place_nav),
        _transferable_action(place),
    )


def cost_by_distance(tree: TaskTree) -> float:
    """Total base travel of the run: sum of displacements over succeeded
    navigations, starting from the robot pose recorded at tree start.
    Unsuccessful runs cost +inf."""
    if extract_parameters(tree) is None:
        return math.inf
    previous = tree.meta.get("start-base")
    total = 0.0
    for node, action in action_subtasks(tree, (), "navigating"):
        if node.status is not TaskStatus.SUCCEEDED:
            continue
        pose = action.get("pose")
        if not isinstance(pose, Pose2D):
            continue
        if isinstance(previous, Pose2D):
            total += previous.distance_to(pose)
        previous = pose
    return total


_COST_FUNCTIONS: dict[str, Callable[[TaskTree], float]] = {
    "distance": cost_by_distance,
}


def cost_function(name: str) -> Callable[[TaskTree], float]:
    try:
        return _COST_FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown cost function {name!r}") from None


def with_projected_task_tree(
    slots: list[Slot],
    n_runs: int,
    cost_fn: Callable[[TaskTree], float],
    body: Callable[[Executor, TaskRecorder, dict[str, Description]], Description],
    belief: WorldState,
    master_seed: int,
    real_executor: Executor,
    real_recorder: TaskRecorder,
) -> Description:
    """Run body n_runs times in projection, bind slots from the best run,
    then run body once for real with those bindings.

    Projection failures never escape; they only mark a candidate
    unsuccessful. When no candidate succeeds the body runs unbound and the
    plan's own failure recovery takes over. Real-execution failures propagate.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    started = time.perf_counter()
    state_before = belief.canonical_state()
    token = belief.snapshot()
    candidates: list[Candidate] = []
    for index in range(n_runs):
        belief.restore(token)
        rng = Random(derive_seed(master_seed, index))
        recorder = TaskRecorder(
            LogicalClock(),
            meta={"start-base": belief.robot.base, "projection-run": index},
        )
        projection_executor = Executor.projected(
            belief,
            rng,
            recorder.clock,
            knowledge=real_executor.knowledge,
            limits=real_executor.limits,
            run_tag=index,
        )
        try:
            body(projection_executor, recorder, {})
        except PlanFailure:
            pass
        tree = recorder.finalize()
        parameters = extract_parameters(tree)
        cost = cost_fn(tree)
        success = parameters is not None and math.isfinite(cost)
        candidates.append(Candidate(index, tree, success, parameters if success else None, cost))
    belief.restore(token)
    if belief.canonical_state() != state_before:
        raise BeliefLeakError("belief world changed across the projection phase")
    winner: Candidate | None = None
    for candidate in candidates:
        if not candidate.success:
            continue
        if winner is None or candidate.cost < winner.cost:
            winner = candidate
    bindings: dict[str, Description] = {}
    if winner is not None:
        assert winner.parameters is not None
        for slot, value in zip(slots, winner.parameters):
            slot.bind(value)
            bindings[slot.name] = value
    real_executor.stats["projections"].append(
        {
            "runs": n_runs,
            "successes": sum(1 for c in candidates if c.success),
            "winner": winner.index if winner is not None else None,
            "costs": [c.cost for c in candidates],
            "wall_s": time.perf_counter() - started,
        }
    )
    return body(real_executor, real_recorder, bindings)
