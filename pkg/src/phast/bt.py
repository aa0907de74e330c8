"""Behavior-tree core: node model, tick propagation, per-tick status ledger.

A tick starts at the root and flows down. Composite nodes decide which of
their children to tick; leaves run whatever condition or action they are
bound to. Every ticked node records its status in the context's ledger, and
nodes the traversal never reached report IDLE for that tick. The engine
builds a fresh context per root tick, so a ledger always describes exactly
one traversal.

Ticking is memory-less: RUNNING is propagated like any other status but no
resume bookmark is kept, the next tick re-evaluates from the root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterator


class NodeStatus(Enum):
    SUCCESS = "SUCCESS"
    FAILURE = "FAILURE"
    RUNNING = "RUNNING"
    IDLE = "IDLE"


class NodeKind(Enum):
    FALLBACK = "fallback"
    SEQUENCE = "sequence"
    CONDITION = "condition"
    ACTION = "action"


class BindingError(RuntimeError):
    """A leaf was ticked without a bound condition or action."""


LeafBinding = Callable[["TickContext"], NodeStatus]


@dataclass(frozen=True)
class Node:
    kind: NodeKind
    label: str
    children: tuple["Node", ...] = ()
    binding: LeafBinding | None = None

    def iter_preorder(self) -> Iterator["Node"]:
        yield self
        for child in self.children:
            yield from child.iter_preorder()


def fallback(label: str, *children: Node) -> Node:
    return Node(NodeKind.FALLBACK, label, tuple(children))


def sequence(label: str, *children: Node) -> Node:
    return Node(NodeKind.SEQUENCE, label, tuple(children))


def condition(label: str, binding: LeafBinding) -> Node:
    return Node(NodeKind.CONDITION, label, (), binding)


def action(label: str, binding: LeafBinding) -> Node:
    return Node(NodeKind.ACTION, label, (), binding)


@dataclass
class TickContext:
    """Mutable carrier for one root tick.

    `world` may be replaced by action bindings (worlds are updated
    functionally); `degenerate` is set by actions that had to skip their
    geometry this tick. Confined to a single tick loop, never shared.
    """

    world: Any
    u: Any
    dt: float
    statuses: dict[str, NodeStatus] = field(default_factory=dict)
    degenerate: bool = False

    def record(self, label: str, status: NodeStatus) -> None:
        self.statuses[label] = status


def tick_node(node: Node, ctx: TickContext) -> NodeStatus:
    """Tick one node, recording its status in the context ledger."""
    if node.kind is NodeKind.SEQUENCE:
        status = tick_sequence(node.children, ctx)
    elif node.kind is NodeKind.FALLBACK:
        status = tick_fallback(node.children, ctx)
    else:
        if node.binding is None:
            raise BindingError(f"leaf node {node.label!r} has no binding")
        status = node.binding(ctx)
    ctx.record(node.label, status)
    return status


def tick_sequence(children: tuple[Node, ...], ctx: TickContext) -> NodeStatus:
    """Tick children left to right; stop at the first non-SUCCESS."""
    if not children:
        raise ValueError("sequence node needs at least one child")
    for child in children:
        status = tick_node(child, ctx)
        if status is not NodeStatus.SUCCESS:
            return status
    return NodeStatus.SUCCESS


def tick_fallback(children: tuple[Node, ...], ctx: TickContext) -> NodeStatus:
    """Tick children left to right; stop at the first non-FAILURE."""
    if not children:
        raise ValueError("fallback node needs at least one child")
    for child in children:
        status = tick_node(child, ctx)
        if status is not NodeStatus.FAILURE:
            return status
    return NodeStatus.FAILURE


def status_ledger(root: Node, ctx: TickContext) -> list[tuple[str, NodeStatus]]:
    """Status of every node under root in pre-order; untouched nodes are IDLE."""
    return [
        (node.label, ctx.statuses.get(node.label, NodeStatus.IDLE))
        for node in root.iter_preorder()
    ]


def idle_ledger(root: Node) -> list[tuple[str, NodeStatus]]:
    """The ledger of a tree that has not been ticked: all IDLE, pre-order."""
    return [(node.label, NodeStatus.IDLE) for node in root.iter_preorder()]
