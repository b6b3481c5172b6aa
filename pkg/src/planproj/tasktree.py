"""Runtime task trees: every plan segment recorded with path, status and outcome.

Paths are occurrence-indexed label sequences, unique within one tree. Time is
a logical step counter shared with the executor, so identical runs produce
bit-identical trees. Finalized trees serialize to a canonical byte form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .designator import Description, KeyPoseTrajectory, make_description
from .geomworld import Pose2D, Pose3D

FAILURE_KINDS = frozenset(
    {
        "perception-object-not-found",
        "object-nowhere-to-be-found",
        "navigation-pose-unreachable",
        "navigation-pose-in-collision",
        "navigation-goal-not-reached",
        "ptu-goal-unreachable",
        "manipulation-pose-unreachable",
        "manipulation-goal-not-reached",
        "manipulation-pose-in-collision",
        "gripper-closed-completely",
        "object-unreachable",
        "object-unfetchable",
        "object-undeliverable",
    }
)


class TaskStatus(str, Enum):
    CREATED = "created"
    RUNNING = "running"
    SUSPENDED = "suspended"
    SUCCEEDED = "succeeded"
    EVAPORATED = "evaporated"
    FAILED = "failed"


_LEGAL_TRANSITIONS: dict[TaskStatus, frozenset[TaskStatus]] = {
    TaskStatus.CREATED: frozenset({TaskStatus.RUNNING}),
    TaskStatus.RUNNING: frozenset(
        {TaskStatus.SUCCEEDED, TaskStatus.FAILED, TaskStatus.EVAPORATED, TaskStatus.SUSPENDED}
    ),
    TaskStatus.SUSPENDED: frozenset({TaskStatus.RUNNING}),
    TaskStatus.SUCCEEDED: frozenset(),
    TaskStatus.EVAPORATED: frozenset(),
    TaskStatus.FAILED: frozenset(),
}

TERMINAL_STATUSES = frozenset({TaskStatus.SUCCEEDED, TaskStatus.EVAPORATED, TaskStatus.FAILED})

# A path is a tuple of (label, occurrence) segments; the root path is ().
TaskPath = tuple[tuple[str, int], ...]


class IllegalTransitionError(RuntimeError):
    pass


class TreeNotFinalizedError(RuntimeError):
    pass


class MalformedTreeError(ValueError):
    pass


@dataclass(frozen=True)
class Failure:
    """Tagged failure from the fetch-and-deliver taxonomy plus escalations."""

    kind: str
    context: tuple[tuple[str, object], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in FAILURE_KINDS:
            raise ValueError(f"unknown failure kind {self.kind!r}")

    def get(self, key: str):
        for ctx_key, value in self.context:
            if ctx_key == key:
                return value
        return None


def make_failure(kind: str, **context) -> Failure:
    """Failure with a canonical (key-sorted) context tuple."""
    return Failure(kind=kind, context=tuple(sorted(context.items())))


@dataclass
class TaskNode:
    path: TaskPath
    code_label: str
    status: TaskStatus
    parent: TaskPath | None
    children: list[TaskPath] = field(default_factory=list)
    parameters: tuple[Description, ...] = ()
    outcome: Description | Failure | None = None
    failure: Failure | None = None
    created_at: int = 0
    started_at: int | None = None
    ended_at: int | None = None


class LogicalClock:
    """Monotone step counter; every executor primitive and tree event ticks it."""

    def __init__(self, start: int = 0):
        self.value = start

    def tick(self) -> int:
        self.value += 1
        return self.value


class TaskTree:
    """Container for recorded task nodes, addressable by path."""

    def __init__(self, meta: dict[str, object] | None = None):
        self.nodes: dict[TaskPath, TaskNode] = {}
        self.meta: dict[str, object] = dict(meta or {})
        self.finalized = False

    @property
    def root(self) -> TaskNode:
        return self.nodes[()]

    def node_at(self, path: TaskPath) -> TaskNode | None:
        return self.nodes.get(tuple(path))

    def walk(self, path: TaskPath = ()):
        """Depth-first, left-to-right iteration over the subtree at path."""
        node = self.nodes.get(tuple(path))
        if node is None:
            return
        stack = [node]
        while stack:
            current = stack.pop()
            yield current
            for child_path in reversed(current.children):
                stack.append(self.nodes[child_path])

    def __eq__(self, other) -> bool:
        if not isinstance(other, TaskTree):
            return NotImplemented
        return self.nodes == other.nodes and self.meta == other.meta

    def __len__(self) -> int:
        return len(self.nodes)


class TaskRecorder:
    """Single-writer builder of one task tree during plan interpretation."""

    ROOT_LABEL = "top"

    def __init__(self, clock: LogicalClock | None = None, meta: dict[str, object] | None = None):
        self.clock = clock if clock is not None else LogicalClock()
        self.tree = TaskTree(meta=meta)
        root = TaskNode(
            path=(),
            code_label=self.ROOT_LABEL,
            status=TaskStatus.CREATED,
            parent=None,
            created_at=self.clock.tick(),
        )
        self.tree.nodes[()] = root
        self._transition(root, TaskStatus.RUNNING)
        root.started_at = self.clock.tick()
        self.current: TaskPath = ()

    # -- events ------------------------------------------------------------

    def open_task(
        self,
        label: str,
        parameters=(),
        parent: TaskPath | None = None,
        make_current: bool = True,
    ) -> TaskPath:
        """Open a child task under parent (default: the current node).

        The node passes through created -> running and becomes the current
        node unless make_current is false (parallel siblings).
        """
        parent_path = self.current if parent is None else tuple(parent)
        parent_node = self.tree.nodes[parent_path]
        occurrence = 1 + sum(1 for p in parent_node.children if p[-1][0] == label)
        path = parent_path + ((label, occurrence),)
        node = TaskNode(
            path=path,
            code_label=label,
            status=TaskStatus.CREATED,
            parent=parent_path,
            parameters=tuple(parameters),
            created_at=self.clock.tick(),
        )
        self.tree.nodes[path] = node
        parent_node.children.append(path)
        self._transition(node, TaskStatus.RUNNING)
        node.started_at = self.clock.tick()
        if make_current:
            self.current = path
        return path

    def close_succeeded(self, path: TaskPath, grounded: Description | None = None) -> None:
        self._close(path, TaskStatus.SUCCEEDED, outcome=grounded, failure=None)

    def close_failed(self, path: TaskPath, failure: Failure) -> None:
        self._close(path, TaskStatus.FAILED, outcome=failure, failure=failure)

    def close_evaporated(self, path: TaskPath) -> None:
        self._close(path, TaskStatus.EVAPORATED, outcome=None, failure=None)

    def suspend(self, path: TaskPath) -> None:
        self._transition(self.tree.nodes[tuple(path)], TaskStatus.SUSPENDED)

    def resume(self, path: TaskPath) -> None:
        self._transition(self.tree.nodes[tuple(path)], TaskStatus.RUNNING)

    def finalize(self) -> TaskTree:
        """Close the root and freeze the tree; all other nodes must be closed."""
        root = self.tree.root
        if root.status is TaskStatus.RUNNING:
            self._close((), TaskStatus.SUCCEEDED, outcome=None, failure=None)
        open_nodes = [
            node.path
            for node in self.tree.nodes.values()
            if node.status not in TERMINAL_STATUSES
        ]
        if open_nodes:
            raise TreeNotFinalizedError(f"nodes still open: {open_nodes}")
        self.tree.finalized = True
        return self.tree

    # -- internals -----------------------------------------------------------

    def _transition(self, node: TaskNode, status: TaskStatus) -> None:
        if status not in _LEGAL_TRANSITIONS[node.status]:
            raise IllegalTransitionError(
                f"{node.path}: {node.status.value} -> {status.value} is not allowed"
            )
        node.status = status

    def _close(
        self,
        path: TaskPath,
        status: TaskStatus,
        outcome: Description | Failure | None,
        failure: Failure | None,
    ) -> None:
        node = self.tree.nodes.get(tuple(path))
        if node is None:
            raise KeyError(f"no node at {path}")
        if node.status is TaskStatus.SUSPENDED:
            self._transition(node, TaskStatus.RUNNING)
        self._transition(node, status)
        node.outcome = outcome
        node.failure = failure
        node.ended_at = self.clock.tick()
        if self.current == node.path and node.parent is not None:
            self.current = node.parent


def node_at(tree: TaskTree, path: TaskPath) -> TaskNode | None:
    return tree.node_at(path)


# -- canonical serialization ---------------------------------------------------


def _encode_value(value) -> dict:
    if isinstance(value, Description):
        return {"d": _encode_description(value)}
    if isinstance(value, KeyPoseTrajectory):
        return {"tr": [[label, _encode_pose3(pose)] for label, pose in value.steps]}
    if isinstance(value, Pose3D):
        return {"p3": _encode_pose3(value)}
    if isinstance(value, Pose2D):
        return {"p2": [value.x, value.y, value.theta]}
    if isinstance(value, bool):
        return {"b": value}
    if isinstance(value, (int, float)):
        return {"n": value}
    if isinstance(value, str):
        return {"s": value}
    raise MalformedTreeError(f"value of type {type(value).__name__} cannot be serialized")


def _encode_pose3(pose: Pose3D) -> list[float]:
    return [pose.x, pose.y, pose.z, pose.yaw]


def _encode_description(desc: Description) -> dict:
    return {
        "k": desc.kind,
        "q": desc.quantifier,
        "p": [[key, _encode_value(value)] for key, value in desc.properties],
    }


def _encode_failure(failure: Failure) -> dict:
    return {"kind": failure.kind, "ctx": [[k, _encode_value(v)] for k, v in failure.context]}


def _decode_value(doc: dict):
    if not isinstance(doc, dict) or len(doc) != 1:
        raise MalformedTreeError(f"bad value encoding: {doc!r}")
    tag, payload = next(iter(doc.items()))
    try:
        if tag == "d":
            return _decode_description(payload)
        if tag == "f":
            return _decode_failure(payload)
        if tag == "tr":
            return KeyPoseTrajectory(
                tuple((label, _decode_pose3(pose)) for label, pose in payload)
            )
        if tag == "p3":
            return _decode_pose3(payload)
        if tag == "p2":
            x, y, theta = payload
            return Pose2D(x, y, theta)
        if tag in ("n", "s", "b"):
            return payload
    except MalformedTreeError:
        raise
    except Exception as exc:  # noqa: BLE001 - wrap any payload shape error
        raise MalformedTreeError(f"bad {tag!r} payload: {payload!r}") from exc
    raise MalformedTreeError(f"unknown value tag {tag!r}")


def _decode_pose3(payload) -> Pose3D:
    x, y, z, yaw = payload
    return Pose3D(x, y, z, yaw)


def _decode_description(doc: dict) -> Description:
    try:
        return make_description(
            doc["k"], doc["q"], tuple((key, _decode_value(value)) for key, value in doc["p"])
        )
    except MalformedTreeError:
        raise
    except Exception as exc:  # noqa: BLE001
        raise MalformedTreeError(f"bad description: {doc!r}") from exc


def _decode_failure(doc: dict) -> Failure:
    try:
        return Failure(
            kind=doc["kind"], context=tuple((k, _decode_value(v)) for k, v in doc["ctx"])
        )
    except MalformedTreeError:
        raise
    except Exception as exc:  # noqa: BLE001
        raise MalformedTreeError(f"bad failure: {doc!r}") from exc


def _encode_outcome(node: TaskNode):
    if node.outcome is None:
        return None
    if isinstance(node.outcome, Failure):
        return {"f": _encode_failure(node.outcome)}
    return {"d": _encode_description(node.outcome)}


def encode_node(node: TaskNode, tree: TaskTree) -> dict:
    return {
        "label": node.code_label,
        "occ": node.path[-1][1] if node.path else 0,
        "status": node.status.value,
        "params": [_encode_description(d) for d in node.parameters],
        "outcome": _encode_outcome(node),
        "failure": _encode_failure(node.failure) if node.failure else None,
        "t": [node.created_at, node.started_at, node.ended_at],
        "children": [encode_node(tree.nodes[p], tree) for p in node.children],
    }


def tree_document(tree: TaskTree) -> dict:
    """Plain-data form of a finalized tree (canonical field order)."""
    if not tree.finalized:
        raise TreeNotFinalizedError("serialize requires a finalized tree")
    return {
        "format": "tasktree.v1",
        "meta": [[key, _encode_value(value)] for key, value in tree.meta.items()],
        "root": encode_node(tree.root, tree),
    }


def serialize_tree(tree: TaskTree) -> bytes:
    """Canonical bytes: the same tree always serializes identically."""
    return json.dumps(tree_document(tree), separators=(",", ":"), ensure_ascii=True).encode(
        "ascii"
    )


def tree_from_document(doc: dict) -> TaskTree:
    if not isinstance(doc, dict) or doc.get("format") != "tasktree.v1":
        raise MalformedTreeError("not a tasktree.v1 document")
    try:
        meta = {key: _decode_value(value) for key, value in doc["meta"]}
        root_doc = doc["root"]
    except MalformedTreeError:
        raise
    except Exception as exc:  # noqa: BLE001
        raise MalformedTreeError("bad tree envelope") from exc
    tree = TaskTree(meta=meta)

    def build(node_doc: dict, path: TaskPath, parent: TaskPath | None) -> None:
        try:
            status = TaskStatus(node_doc["status"])
            created, started, ended = node_doc["t"]
            node = TaskNode(
                path=path,
                code_label=node_doc["label"],
                status=status,
                parent=parent,
                parameters=tuple(_decode_description(d) for d in node_doc["params"]),
                outcome=None,
                failure=_decode_failure(node_doc["failure"]) if node_doc["failure"] else None,
                created_at=created,
                started_at=started,
                ended_at=ended,
            )
            outcome_doc = node_doc["outcome"]
            if outcome_doc is not None:
                node.outcome = _decode_value(outcome_doc)
            children = node_doc["children"]
        except MalformedTreeError:
            raise
        except Exception as exc:  # noqa: BLE001
            raise MalformedTreeError(f"bad node document at {path}") from exc
        if status not in TERMINAL_STATUSES:
            raise MalformedTreeError(f"node at {path} is not closed")
        if node.failure is not None and status is not TaskStatus.FAILED:
            raise MalformedTreeError(f"node at {path} carries a failure but is not failed")
        if path in tree.nodes:
            raise MalformedTreeError(f"duplicate path {path}")
        tree.nodes[path] = node
        for child_doc in children:
            child_path = path + ((child_doc["label"], child_doc["occ"]),)
            node.children.append(child_path)
            build(child_doc, child_path, path)

    build(root_doc, (), None)
    tree.finalized = True
    return tree


def deserialize_tree(data: bytes) -> TaskTree:
    try:
        doc = json.loads(data.decode("ascii"))
    except Exception as exc:  # noqa: BLE001
        raise MalformedTreeError("input is not canonical tree JSON") from exc
    return tree_from_document(doc)
