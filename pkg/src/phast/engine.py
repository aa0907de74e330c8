"""Phase-switching teleoperation trees: structure rules and the tick loop.

An activity tree is a behavior tree restricted to three levels: a fallback
root, one sequence per phase, and leaves that are either phase-gating
conditions or shared-control action nodes (scans). Conditions compare an
object distance or tilt against a threshold. Scans reshape the user's raw
3-component input into a constrained pose update: either a projection of a
commanded translation onto the line between two objects, or a rotation of
the subject about one of its own anchor points, with the rotation axis
built from a reference object and its pour-point anchor.

Scans report SUCCESS even when their geometry degenerates (coincident line
endpoints, zero-length rotation axis); in that case they leave the world
untouched for the tick and raise the snapshot's `degenerate` flag instead
of failing, so phase selection is unaffected.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .bt import (
    Node,
    NodeKind,
    NodeStatus,
    TickContext,
    status_ledger,
    tick_node,
)
from .geometry import (
    EPS_LEN,
    DegenerateAxisError,
    Pose,
    as_vec3,
    commanded_point,
    distance,
    input_to_angle,
    norm,
    project_to,
    rotate_about_pivot,
    rotation_axis,
    tilt_deg,
)
from .world import TickSnapshot, WorldState, anchor_world, apply_pose, snapshot

DEFAULT_GAIN = 0.5
DEFAULT_TICK_RATE_HZ = 50.0


class Fallthrough(str, Enum):
    """What the engine does on a tick where every phase's conditions fail."""

    PASS_THROUGH = "pass_through"
    HOLD = "hold"


class ConditionKind(str, Enum):
    DISTANCE_LEQ = "distance_leq"
    DISTANCE_GEQ = "distance_geq"
    DISTANCE_LT = "distance_lt"
    DISTANCE_GT = "distance_gt"
    TILT_LEQ = "tilt_leq"
    TILT_GT = "tilt_gt"


DISTANCE_KINDS = frozenset(
    {
        ConditionKind.DISTANCE_LEQ,
        ConditionKind.DISTANCE_GEQ,
        ConditionKind.DISTANCE_LT,
        ConditionKind.DISTANCE_GT,
    }
)

_COMPARE = {
    ConditionKind.DISTANCE_LEQ: operator.le,
    ConditionKind.DISTANCE_GEQ: operator.ge,
    ConditionKind.DISTANCE_LT: operator.lt,
    ConditionKind.DISTANCE_GT: operator.gt,
    ConditionKind.TILT_LEQ: operator.le,
    ConditionKind.TILT_GT: operator.gt,
}

_OP_TEXT = {
    ConditionKind.DISTANCE_LEQ: "<=",
    ConditionKind.DISTANCE_GEQ: ">=",
    ConditionKind.DISTANCE_LT: "<",
    ConditionKind.DISTANCE_GT: ">",
    ConditionKind.TILT_LEQ: "<=",
    ConditionKind.TILT_GT: ">",
}


class ScanKind(str, Enum):
    PROJECT_TO = "project_to"
    ROTATION = "rotation"


@dataclass(frozen=True)
class ConditionSpec:
    """A world predicate: distance between two objects, or tilt of one.

    Distance is measured between object origin positions; tilt is the angle
    of the subject's longitudinal axis above the horizontal plane, degrees.
    """

    kind: ConditionKind
    subject: str
    threshold: float
    reference: str | None = None

    def desc(self) -> str:
        op = _OP_TEXT[self.kind]
        if self.kind in DISTANCE_KINDS:
            return f"d({self.subject},{self.reference}){op}{self.threshold:g}"
        return f"tilt({self.subject}){op}{self.threshold:g}"


@dataclass(frozen=True)
class ScanSpec:
    """One shared-control action.

    project_to: `target` names the object whose origin, together with the
    subject's origin, defines the projection line; `gain` is m/s per unit
    input (positive).

    rotation: `target` names the pivot anchor on the subject; `reference`
    and `reference_anchor` name the object and anchor that define the
    rotation axis; `gain` is rad/s per unit input, sign selects direction;
    `input_component` picks which component of u drives the angle.
    """

    kind: ScanKind
    subject: str
    target: str
    gain: float = DEFAULT_GAIN
    input_component: str | None = None
    reference: str | None = None
    reference_anchor: str | None = None

    def desc(self) -> str:
        if self.kind is ScanKind.PROJECT_TO:
            return f"project_to({self.subject}->{self.target})"
        return f"rotation({self.subject}@{self.target})"


@dataclass(frozen=True)
class Phase:
    name: str
    conditions: tuple[ConditionSpec, ...]
    actions: tuple[ScanSpec, ...]


@dataclass(frozen=True)
class PhastTree:
    root: Node
    phases: tuple[Phase, ...]


@dataclass(frozen=True)
class Violation:
    code: str
    label: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.label!r}: {self.message}"


class StructureError(ValueError):
    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = list(violations)


def condition_holds(spec: ConditionSpec, world: WorldState) -> bool:
    if spec.kind in DISTANCE_KINDS:
        value = distance(
            world.require(spec.subject).pose.position,
            world.require(spec.reference).pose.position,
        )
    else:
        obj = world.require(spec.subject)
        value = tilt_deg(obj.pose.orientation, obj.longitudinal_axis)
    return _COMPARE[spec.kind](value, spec.threshold)


@dataclass(frozen=True)
class ConditionBinding:
    spec: ConditionSpec

    def __call__(self, ctx: TickContext) -> NodeStatus:
        if condition_holds(self.spec, ctx.world):
            return NodeStatus.SUCCESS
        return NodeStatus.FAILURE


@dataclass(frozen=True)
class ScanBinding:
    spec: ScanSpec

    def __call__(self, ctx: TickContext) -> NodeStatus:
        world = ctx.world
        spec = self.spec
        subject = world.require(spec.subject)
        if spec.kind is ScanKind.PROJECT_TO:
            target = world.require(spec.target).pose.position
            l_b = subject.pose.position
            if norm(target - l_b) <= EPS_LEN:
                ctx.degenerate = True
                return NodeStatus.SUCCESS
            goal = commanded_point(l_b, ctx.u, spec.gain, ctx.dt)
            if np.array_equal(goal, l_b):
                # Zero command: skip the update so poses stay bit-identical.
                return NodeStatus.SUCCESS
            new_position = project_to(l_b, target, goal)
            ctx.world = apply_pose(world, spec.subject, Pose(new_position, subject.pose.orientation))
        else:
            reference = world.require(spec.reference)
            try:
                axis = rotation_axis(
                    reference.pose.position,
                    subject.pose.position,
                    anchor_world(world, spec.reference, spec.reference_anchor),
                )
            except DegenerateAxisError:
                ctx.degenerate = True
                return NodeStatus.SUCCESS
            theta = input_to_angle(ctx.u, spec.input_component, spec.gain, ctx.dt)
            if theta == 0.0:
                return NodeStatus.SUCCESS
            pivot = anchor_world(world, spec.subject, spec.target)
            ctx.world = apply_pose(
                world, spec.subject, rotate_about_pivot(subject.pose, pivot, axis, theta)
            )
        return NodeStatus.SUCCESS


def leaf_label(phase_name: str, index: int, desc: str) -> str:
    return f"{phase_name}.{index}:{desc}"


def phase_to_node(phase: Phase) -> Node:
    children: list[Node] = []
    for i, cond in enumerate(phase.conditions):
        children.append(
            Node(NodeKind.CONDITION, leaf_label(phase.name, i, cond.desc()), (), ConditionBinding(cond))
        )
    offset = len(phase.conditions)
    for j, scan in enumerate(phase.actions):
        children.append(
            Node(NodeKind.ACTION, leaf_label(phase.name, offset + j, scan.desc()), (), ScanBinding(scan))
        )
    return Node(NodeKind.SEQUENCE, phase.name, tuple(children))


def phases_to_root(activity_name: str, phases) -> Node:
    return Node(NodeKind.FALLBACK, activity_name, tuple(phase_to_node(p) for p in phases))


def validate(root: Node) -> list[Violation]:
    """Check a candidate node tree against the structural rules.

    Returns a (possibly empty) list of violations; never raises. The rules:
    fallback root; every root child a sequence (one per phase); sequences
    hold only leaves, all conditions before all actions, at least one
    action; leaves carry the matching binding; labels unique tree-wide.
    """
    violations: list[Violation] = []

    if root.kind is not NodeKind.FALLBACK:
        violations.append(Violation("root-not-fallback", root.label, "root node must be a fallback"))
    if not root.children:
        violations.append(Violation("no-phases", root.label, "tree defines no phases"))

    seen: set[str] = set()
    flagged: set[str] = set()
    for node in root.iter_preorder():
        if node.label in seen and node.label not in flagged:
            violations.append(Violation("duplicate-label", node.label, "label used by more than one node"))
            flagged.add(node.label)
        seen.add(node.label)

    for child in root.children:
        if child.kind is not NodeKind.SEQUENCE:
            violations.append(
                Violation("phase-not-sequence", child.label, "every root child must be a sequence node")
            )
            continue
        action_seen = False
        action_count = 0
        for leaf in child.children:
            if leaf.kind in (NodeKind.FALLBACK, NodeKind.SEQUENCE):
                violations.append(
                    Violation("bad-depth", leaf.label, "composite nested below a phase: depth exceeds three levels")
                )
                continue
            if leaf.children:
                violations.append(Violation("leaf-has-children", leaf.label, "leaf nodes take no children"))
            if leaf.kind is NodeKind.ACTION:
                action_seen = True
                action_count += 1
                if not isinstance(leaf.binding, ScanBinding):
                    violations.append(
                        Violation("bad-binding", leaf.label, "action leaf is not bound to a scan definition")
                    )
            else:
                if action_seen:
                    violations.append(
                        Violation("condition-after-action", leaf.label, "phase conditions must precede actions")
                    )
                if not isinstance(leaf.binding, ConditionBinding):
                    violations.append(
                        Violation("bad-binding", leaf.label, "condition leaf is not bound to a condition definition")
                    )
        if action_count == 0:
            violations.append(Violation("no-actions", child.label, "phase has no action leaves"))

    return violations


def build_tree(root: Node) -> PhastTree:
    """Validate a candidate tree and derive its phase list.

    Raises StructureError carrying the violation list if the tree breaks
    any structural rule.
    """
    violations = validate(root)
    if violations:
        raise StructureError(violations)
    phases = tuple(
        Phase(
            name=child.label,
            conditions=tuple(n.binding.spec for n in child.children if n.kind is NodeKind.CONDITION),
            actions=tuple(n.binding.spec for n in child.children if n.kind is NodeKind.ACTION),
        )
        for child in root.children
    )
    return PhastTree(root=root, phases=phases)


def active_phase(tree: PhastTree, world: WorldState) -> str | None:
    """Name of the first phase whose conditions all hold, without ticking.

    Agrees with the phase the next tick would execute.
    """
    for phase in tree.phases:
        if all(condition_holds(c, world) for c in phase.conditions):
            return phase.name
    return None


def tick(
    tree: PhastTree,
    world: WorldState,
    u,
    *,
    fallthrough: Fallthrough = Fallthrough.PASS_THROUGH,
    pass_gain: float = DEFAULT_GAIN,
) -> tuple[WorldState, TickSnapshot]:
    """Run one root tick for one input sample.

    The first phase whose conditions all hold executes its scans in order.
    If every phase fails and fallthrough is PASS_THROUGH, the raw input
    translates the held object directly. Returns the next world (tick clock
    advanced) and the emitted snapshot.
    """
    u = as_vec3(u, "u")
    ctx = TickContext(world=world, u=u, dt=world.dt)
    root_status = tick_node(tree.root, ctx)
    next_world = ctx.world

    if (
        root_status is NodeStatus.FAILURE
        and fallthrough is Fallthrough.PASS_THROUGH
        and next_world.held_object is not None
    ):
        held = next_world.objects[next_world.held_object]
        goal = commanded_point(held.pose.position, u, pass_gain, next_world.dt)
        if not np.array_equal(goal, held.pose.position):
            next_world = apply_pose(
                next_world, next_world.held_object, Pose(goal, held.pose.orientation)
            )

    next_world = replace(next_world, tick_index=next_world.tick_index + 1)
    ledger = status_ledger(tree.root, ctx)
    active = None
    for phase in tree.phases:
        if ctx.statuses.get(phase.name) is NodeStatus.SUCCESS:
            active = phase.name
            break
    snap = snapshot(next_world, ledger, active, u, ctx.degenerate)
    return next_world, snap
