"""Query predicates over finalized task trees.

Each predicate yields solutions lazily in document order (depth-first,
left-to-right). Action tasks are nodes whose first recorded parameter is an
action description; for succeeded nodes the grounded description from the
outcome is reported instead of the input.
"""

from __future__ import annotations

from collections.abc import Iterator

from .designator import Description
from .tasktree import Failure, TaskNode, TaskPath, TaskStatus, TaskTree

TASK_FIELDS = ("outcome", "failure", "created_at", "started_at", "ended_at", "path")


def tasks(tree: TaskTree, subtree_path: TaskPath | None = None) -> Iterator[TaskNode]:
    """Every node under subtree_path (whole tree if None), subtree root included."""
    yield from tree.walk(() if subtree_path is None else tuple(subtree_path))


def task_field(node: TaskNode, field: str):
    """Field accessor; failure is only bound for failed nodes."""
    if field not in TASK_FIELDS:
        raise ValueError(f"unknown task field {field!r}")
    if field == "failure":
        return node.failure if node.status is TaskStatus.FAILED else None
    if field == "path":
        return node.path
    return getattr(node, field)


def action_description(node: TaskNode) -> Description | None:
    """The node's action description, grounded when the node succeeded."""
    if not node.parameters:
        return None
    first = node.parameters[0]
    if not isinstance(first, Description) or first.kind != "action":
        return None
    if node.status is TaskStatus.SUCCEEDED and isinstance(node.outcome, Description):
        return node.outcome
    return first


def action_subtasks(
    tree: TaskTree,
    subtree_path: TaskPath | None = None,
    action_type: str | None = None,
) -> Iterator[tuple[TaskNode, Description]]:
    """Action-description tasks of the subtree, optionally filtered by type."""
    for node in tasks(tree, subtree_path):
        desc = action_description(node)
        if desc is None:
            continue
        if action_type is not None and desc.get("type") != action_type:
            continue
        yield (node, desc)


def sibling_action(
    tree: TaskTree,
    subtree_path: TaskPath | None,
    node: TaskNode,
    action_type: str,
    direction: str,
) -> TaskNode | None:
    """Nearest action task of the type strictly before/after node in document order."""
    if direction not in ("previous", "next"):
        raise ValueError(f"direction must be 'previous' or 'next', got {direction!r}")
    ordered = [candidate for candidate, _desc in action_subtasks(tree, subtree_path)]
    positions = {candidate.path: index for index, candidate in enumerate(ordered)}
    anchor = positions.get(node.path)
    if anchor is None:
        # The anchor need not itself be an action task; place it by document order.
        all_paths = [n.path for n in tasks(tree, subtree_path)]
        if node.path not in all_paths:
            return None
        anchor_doc = all_paths.index(node.path)
        before = [
            c for c in ordered if all_paths.index(c.path) < anchor_doc
        ]
        after = [c for c in ordered if all_paths.index(c.path) > anchor_doc]
    else:
        before = ordered[:anchor]
        after = ordered[anchor + 1 :]
    pool = reversed(before) if direction == "previous" else iter(after)
    for candidate in pool:
        desc = action_description(candidate)
        if desc is not None and desc.get("type") == action_type:
            return candidate
    return None


def _grounded_action(tree: TaskTree, node: TaskNode) -> Description | None:
    return action_description(node)


def successful_fetch_and_deliver_params(
    tree: TaskTree, parent_path: TaskPath = ()
) -> tuple[Description, Description, Description, Description] | None:
    """Parameters of a successful fetch-and-deliver pair under parent_path.

    Finds a fetching task with a succeeded picking-up child and the navigating
    action that last preceded the pick, plus a succeeded delivering task with
    a succeeded placing child and its preceding navigating action. Returns
    (pick_nav, pick, place_nav, place) action descriptions, or None when any
    conjunct has no solution. The fetching task's own outcome is deliberately
    not constrained, mirroring the reference query.
    """
    for fetch_node, _fetch_desc in action_subtasks(tree, parent_path, "fetching"):
        fetch_path = fetch_node.path
        for pick_node, pick_action in action_subtasks(tree, fetch_path, "picking-up"):
            if pick_node.status is not TaskStatus.SUCCEEDED:
                continue
            pick_nav_node = sibling_action(tree, fetch_path, pick_node, "navigating", "previous")
            if pick_nav_node is None:
                continue
            pick_nav_action = _grounded_action(tree, pick_nav_node)
            if pick_nav_action is None:
                continue
            for deliver_node, _deliver_desc in action_subtasks(tree, parent_path, "delivering"):
                if deliver_node.status is not TaskStatus.SUCCEEDED:
                    continue
                deliver_path = deliver_node.path
                for place_node, place_action in action_subtasks(tree, deliver_path, "placing"):
                    if place_node.status is not TaskStatus.SUCCEEDED:
                        continue
                    place_nav_node = sibling_action(
                        tree, deliver_path, place_node, "navigating", "previous"
                    )
                    if place_nav_node is None:
                        continue
                    place_nav_action = _grounded_action(tree, place_nav_node)
                    if place_nav_action is None:
                        continue
                    return (pick_nav_action, pick_action, place_nav_action, place_action)
    return None


def failures_in(tree: TaskTree, subtree_path: TaskPath = ()) -> Iterator[tuple[TaskNode, Failure]]:
    """Failed nodes of the subtree with their failures, document order."""
    for node in tasks(tree, subtree_path):
        if node.failure is not None:
            yield (node, node.failure)
