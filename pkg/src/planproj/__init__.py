"""Fetch-and-deliver plan execution with introspectable task trees and
fast plan projection for choosing action parameterizations."""

from .designator import (
    Description,
    KeyPoseTrajectory,
    LocationConstraint,
    extend,
    get_property,
    make_description,
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
from .plans import Executor, PlanOutcome, ProjectionSettings, RetryLimits, perform
from .projector import Candidate, Slot, cost_by_distance, extract_parameters, with_projected_task_tree
from .scenario import ScenarioConfig, default_config, load_config, run_scenario
from .tasktree import (
    Failure,
    LogicalClock,
    TaskNode,
    TaskRecorder,
    TaskStatus,
    TaskTree,
    deserialize_tree,
    serialize_tree,
)

__version__ = "0.1.0"

__all__ = [
    "Body",
    "Candidate",
    "Description",
    "Executor",
    "Failure",
    "KeyPoseTrajectory",
    "LocationConstraint",
    "LogicalClock",
    "NoiseModel",
    "ObjectInstance",
    "PlanOutcome",
    "Pose2D",
    "Pose3D",
    "ProjectionSettings",
    "Rect",
    "RetryLimits",
    "RobotState",
    "ScenarioConfig",
    "Slot",
    "TaskNode",
    "TaskRecorder",
    "TaskStatus",
    "TaskTree",
    "WorldState",
    "cost_by_distance",
    "default_config",
    "deserialize_tree",
    "extend",
    "extract_parameters",
    "get_property",
    "load_config",
    "make_description",
    "perform",
    "run_scenario",
    "serialize_tree",
    "with_projected_task_tree",
]
