"""Parsing, validation, and canonical serialization of .activity files.

An activity file is a YAML document (UTF-8, extension ".activity") that
declares the world objects and the ordered phase list of one activity. The
top-level mapping must carry `phast_version: 1`. Distances are meters,
angles degrees, always as plain numbers; a number written with a unit
suffix ("50cm", "30deg") is rejected rather than silently converted.

Canonical form, which `serialize` emits and `parse` round-trips, is stable
byte for byte: fixed key order, double-quoted strings, shortest round-trip
float formatting, two-space indents, anchors sorted by name, trailing
newline.

Diagnostics carry a 0-based (line, column) and one of these codes:

    encoding                 not valid UTF-8
    syntax                   not parseable as YAML (or recursive aliases)
    wrong-type               a field has the wrong YAML shape or type
    unit-suffix              a number written as a unit-suffixed string
    non-finite               inf or nan where a finite number is required
    missing-field            a required key is absent
    unknown-field            a key the schema does not define
    bad-version              phast_version missing or not 1
    bad-name                 empty or reserved name ("ee")
    bad-tick-rate            tick_rate_hz not a positive number
    bad-mode                 fallthrough not pass_through or hold
    bad-gain                 non-positive gain where positivity is required
    non-unit-quaternion      |q| differs from 1 by more than 1e-9
    non-unit-axis            longitudinal_axis not unit length
    duplicate-object         two objects share a name
    duplicate-anchor         two anchors on one object share a name
    duplicate-phase          two phases share a name
    duplicate-label          generated node labels collide (e.g. a phase
                             named like the activity)
    unknown-object           a reference to an undeclared object
    unknown-anchor           a reference to an anchor the object lacks
    unknown-condition-kind   condition kind outside the six supported
    unknown-scan-kind        action kind outside project_to / rotation
    unknown-component        input_component outside x / y / z
    no-phases                document defines no phases
    no-actions               a phase defines no actions
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np
import yaml

from .engine import (
    DEFAULT_GAIN,
    DEFAULT_TICK_RATE_HZ,
    ConditionKind,
    ConditionSpec,
    Fallthrough,
    Phase,
    PhastTree,
    ScanKind,
    ScanSpec,
    build_tree,
    phases_to_root,
    validate,
)
from .geometry import Pose, quat_normalize, vec3
from .world import EE_NAME, ObjectState, WorldState

QUAT_TOL = 1e-9
AXIS_TOL = 1e-9

_CONDITION_KINDS = {k.value: k for k in ConditionKind}
_SCAN_KINDS = {k.value: k for k in ScanKind}
_MODES = {m.value: m for m in Fallthrough}
_COMPONENT_NAMES = ("x", "y", "z")

# Longest numeric prefix; trailing junk after it means a unit suffix.
_NUM_PREFIX_RE = re.compile(
    r"^\s*[-+]?(?:\d[\d_]*\.?[\d_]*|\.\d[\d_]*)(?:[eE][-+]?\d+)?"
)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line + 1}:{self.column + 1}: {self.code}: {self.message}"


class ActivityError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics) or "invalid activity document")
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class PoseSpec:
    p: tuple[float, float, float] = (0.0, 0.0, 0.0)
    q: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    def to_pose(self) -> Pose:
        return Pose(vec3(*self.p), quat_normalize(np.array(self.q, dtype=np.float64)))


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    pose: PoseSpec
    anchors: tuple[tuple[str, tuple[float, float, float]], ...] = ()
    longitudinal_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ActivityDocument:
    """Validated in-memory form of one .activity file."""

    name: str
    tick_rate_hz: float = DEFAULT_TICK_RATE_HZ
    fallthrough: Fallthrough = Fallthrough.PASS_THROUGH
    pass_through_gain: float = DEFAULT_GAIN
    held_object: str | None = None
    ee_grasp_offset: PoseSpec = PoseSpec()
    objects: tuple[ObjectSpec, ...] = ()
    phases: tuple[Phase, ...] = ()

    def to_world(self) -> WorldState:
        objects = {
            spec.name: ObjectState(
                name=spec.name,
                pose=spec.pose.to_pose(),
                anchors={aname: vec3(*avec) for aname, avec in spec.anchors},
                longitudinal_axis=vec3(*spec.longitudinal_axis),
            )
            for spec in self.objects
        }
        return WorldState(
            objects=objects,
            held_object=self.held_object,
            ee_grasp_offset=self.ee_grasp_offset.to_pose(),
            tick_index=0,
            dt=1.0 / self.tick_rate_hz,
        )

    def to_tree(self) -> PhastTree:
        return build_tree(phases_to_root(self.name, self.phases))


def bundled_activity_path(name: str = "pour"):
    """Filesystem path of an activity file shipped with the package."""
    return resources.files("phast").joinpath("data", f"{name}.activity")


# ---------------------------------------------------------------------------
# Parsing


def _mark(node) -> tuple[int, int]:
    mark = getattr(node, "start_mark", None)
    if mark is None:
        return (0, 0)
    return (mark.line, mark.column)


class _Walker:
    """Schema walk over a composed YAML node graph, collecting diagnostics."""

    def __init__(self):
        self.diags: list[Diagnostic] = []

    def add(self, code: str, node, message: str) -> None:
        line, column = _mark(node) if node is not None else (0, 0)
        self.diags.append(Diagnostic(code, line, column, message))

    def mapping_pairs(self, node, where: str) -> list[tuple[str, object, object]] | None:
        """(key, key_node, value_node) triples, or None if not a mapping."""
        if not isinstance(node, yaml.MappingNode):
            self.add("wrong-type", node, f"{where} must be a mapping")
            return None
        pairs = []
        for key_node, value_node in node.value:
            if not isinstance(key_node, yaml.ScalarNode):
                self.add("wrong-type", key_node, f"{where} keys must be plain strings")
                continue
            pairs.append((key_node.value, key_node, value_node))
        return pairs

    def fields(self, node, where: str, known: tuple[str, ...]) -> dict[str, object] | None:
        pairs = self.mapping_pairs(node, where)
        if pairs is None:
            return None
        out: dict[str, object] = {}
        for key, key_node, value_node in pairs:
            if key not in known:
                self.add("unknown-field", key_node, f"{where} does not define a field {key!r}")
                continue
            if key in out:
                self.add("wrong-type", key_node, f"{where} repeats the field {key!r}")
                continue
            out[key] = value_node
        return out

    def sequence_items(self, node, where: str) -> list[object] | None:
        if not isinstance(node, yaml.SequenceNode):
            self.add("wrong-type", node, f"{where} must be a list")
            return None
        return list(node.value)

    def string(self, node, where: str) -> str | None:
        if not isinstance(node, yaml.ScalarNode):
            self.add("wrong-type", node, f"{where} must be a string")
            return None
        if node.tag == "tag:yaml.org,2002:null":
            self.add("wrong-type", node, f"{where} must be a string")
            return None
        return node.value

    def number(self, node, where: str) -> float | None:
        if not isinstance(node, yaml.ScalarNode):
            self.add("wrong-type", node, f"{where} must be a number")
            return None
        if node.tag in ("tag:yaml.org,2002:int", "tag:yaml.org,2002:float"):
            raw = node.value.replace("_", "")
            try:
                value = float(raw)
            except ValueError:
                special = {".inf": math.inf, "-.inf": -math.inf, "+.inf": math.inf, ".nan": math.nan}
                value = special.get(raw.lower())
                if value is None:
                    self.add("wrong-type", node, f"{where} is not a readable number")
                    return None
            if not math.isfinite(value):
                self.add("non-finite", node, f"{where} must be finite")
                return None
            return value
        match = _NUM_PREFIX_RE.match(node.value)
        if match and match.group().strip() and node.value[match.end():].strip():
            self.add(
                "unit-suffix",
                node,
                f"{where} must be a plain number in meters/degrees, not {node.value!r}",
            )
        else:
            self.add("wrong-type", node, f"{where} must be a number")
        return None

    def numbers(self, node, where: str, count: int) -> tuple[float, ...] | None:
        items = self.sequence_items(node, where)
        if items is None:
            return None
        if len(items) != count:
            self.add("wrong-type", node, f"{where} must have exactly {count} components")
            return None
        values = [self.number(item, f"{where} component") for item in items]
        if any(v is None for v in values):
            return None
        return tuple(values)  # type: ignore[arg-type]

    def name(self, node, where: str) -> str | None:
        value = self.string(node, where)
        if value is None:
            return None
        if value == "":
            self.add("bad-name", node, f"{where} must not be empty")
            return None
        if value == EE_NAME:
            self.add("bad-name", node, f"{EE_NAME!r} is reserved for the end effector")
            return None
        return value

    def pose(self, node, where: str) -> PoseSpec | None:
        fields = self.fields(node, where, ("p", "q"))
        if fields is None:
            return None
        p: tuple[float, float, float] = (0.0, 0.0, 0.0)
        q: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
        if "p" in fields:
            got = self.numbers(fields["p"], f"{where}.p", 3)
            if got is not None:
                p = got  # type: ignore[assignment]
        if "q" in fields:
            got = self.numbers(fields["q"], f"{where}.q", 4)
            if got is not None:
                q = got  # type: ignore[assignment]
                if abs(math.sqrt(sum(c * c for c in q)) - 1.0) > QUAT_TOL:
                    self.add("non-unit-quaternion", fields["q"], f"{where}.q must have unit norm")
        return PoseSpec(p=p, q=q)


def _check_acyclic(root) -> bool:
    """Composed YAML graphs may contain recursive aliases; refuse them."""
    on_path: set[int] = set()

    stack: list[tuple[object, bool]] = [(root, False)]
    while stack:
        node, leaving = stack.pop()
        if leaving:
            on_path.discard(id(node))
            continue
        if id(node) in on_path:
            return False
        if isinstance(node, (yaml.SequenceNode, yaml.MappingNode)):
            on_path.add(id(node))
            stack.append((node, True))
            if isinstance(node, yaml.SequenceNode):
                for child in node.value:
                    stack.append((child, False))
            else:
                for key_node, value_node in node.value:
                    stack.append((key_node, False))
                    stack.append((value_node, False))
    return True


def _parse_impl(data: str | bytes) -> tuple[ActivityDocument | None, list[Diagnostic]]:
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            return None, [Diagnostic("encoding", 0, 0, f"not valid UTF-8: {exc}")]
    else:
        text = data

    try:
        root = yaml.compose(io.StringIO(text), Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None) or getattr(exc, "context_mark", None)
        line, column = (mark.line, mark.column) if mark is not None else (0, 0)
        return None, [Diagnostic("syntax", line, column, str(exc).replace("\n", " "))]
    except RecursionError:
        return None, [Diagnostic("syntax", 0, 0, "document nests too deeply")]

    if root is None:
        return None, [
            Diagnostic("bad-version", 0, 0, "missing phast_version: 1"),
            Diagnostic("no-phases", 0, 0, "no phases defined"),
        ]
    if not _check_acyclic(root):
        return None, [Diagnostic("syntax", 0, 0, "recursive aliases are not allowed")]

    w = _Walker()
    fields = w.fields(
        root,
        "document",
        (
            "phast_version",
            "activity",
            "tick_rate_hz",
            "fallthrough",
            "pass_through_gain",
            "held_object",
            "ee_grasp_offset",
            "objects",
            "phases",
        ),
    )
    if fields is None:
        return None, w.diags

    if "phast_version" not in fields:
        w.add("bad-version", None, "missing phast_version: 1")
    else:
        version = w.number(fields["phast_version"], "phast_version")
        if version is not None and version != 1:
            w.add("bad-version", fields["phast_version"], f"unsupported phast_version {version:g}")

    name = None
    if "activity" not in fields:
        w.add("missing-field", None, "missing activity name")
    else:
        name = w.name(fields["activity"], "activity")

    tick_rate = DEFAULT_TICK_RATE_HZ
    if "tick_rate_hz" in fields:
        value = w.number(fields["tick_rate_hz"], "tick_rate_hz")
        if value is not None:
            if value <= 0.0:
                w.add("bad-tick-rate", fields["tick_rate_hz"], "tick_rate_hz must be positive")
            else:
                tick_rate = value

    mode = Fallthrough.PASS_THROUGH
    if "fallthrough" in fields:
        value = w.string(fields["fallthrough"], "fallthrough")
        if value is not None:
            if value not in _MODES:
                w.add("bad-mode", fields["fallthrough"], f"fallthrough must be one of {sorted(_MODES)}")
            else:
                mode = _MODES[value]

    pass_gain = DEFAULT_GAIN
    if "pass_through_gain" in fields:
        value = w.number(fields["pass_through_gain"], "pass_through_gain")
        if value is not None:
            if value <= 0.0:
                w.add("bad-gain", fields["pass_through_gain"], "pass_through_gain must be positive")
            else:
                pass_gain = value

    offset = PoseSpec()
    if "ee_grasp_offset" in fields:
        got = w.pose(fields["ee_grasp_offset"], "ee_grasp_offset")
        if got is not None:
            offset = got

    objects: list[ObjectSpec] = []
    object_names: set[str] = set()
    anchor_names: dict[str, set[str]] = {}
    if "objects" in fields:
        items = w.sequence_items(fields["objects"], "objects")
        if items is not None:
            for item in items:
                obj = _parse_object(w, item, object_names, anchor_names)
                if obj is not None:
                    objects.append(obj)

    def resolve_object(node, where: str) -> str | None:
        value = w.name(node, where)
        if value is None:
            return None
        if value not in object_names:
            w.add("unknown-object", node, f"{where} references undeclared object {value!r}")
            return None
        return value

    held = None
    if "held_object" in fields:
        held = resolve_object(fields["held_object"], "held_object")

    phases: list[Phase] = []
    phase_names: set[str] = set()
    if "phases" not in fields:
        w.add("no-phases", None, "no phases defined")
    else:
        items = w.sequence_items(fields["phases"], "phases")
        if items is not None:
            if not items:
                w.add("no-phases", fields["phases"], "no phases defined")
            for item in items:
                phase = _parse_phase(w, item, phase_names, resolve_object, anchor_names)
                if phase is not None:
                    phases.append(phase)

    if name is not None and name in phase_names:
        w.add(
            "duplicate-label",
            fields.get("activity"),
            f"activity name {name!r} collides with a phase name",
        )

    if w.diags:
        return None, w.diags

    doc = ActivityDocument(
        name=name,  # type: ignore[arg-type]
        tick_rate_hz=tick_rate,
        fallthrough=mode,
        pass_through_gain=pass_gain,
        held_object=held,
        ee_grasp_offset=offset,
        objects=tuple(objects),
        phases=tuple(phases),
    )

    # Safety net: the builder guarantees the three-level shape, but exotic
    # names can still collide at the label level.
    for violation in validate(phases_to_root(doc.name, doc.phases)):
        w.add(violation.code, None, violation.message)
    if w.diags:
        return None, w.diags
    return doc, []


def _parse_object(w: _Walker, node, object_names: set[str], anchor_names: dict[str, set[str]]):
    fields = w.fields(node, "object", ("name", "pose", "anchors", "longitudinal_axis"))
    if fields is None:
        return None
    if "name" not in fields:
        w.add("missing-field", node, "object needs a name")
        return None
    name = w.name(fields["name"], "object name")
    if name is None:
        return None
    if name in object_names:
        w.add("duplicate-object", fields["name"], f"object {name!r} declared twice")
        return None
    object_names.add(name)

    pose = PoseSpec()
    if "pose" in fields:
        got = w.pose(fields["pose"], f"object {name!r} pose")
        if got is not None:
            pose = got

    anchors: list[tuple[str, tuple[float, float, float]]] = []
    anchor_names[name] = set()
    if "anchors" in fields:
        pairs = w.mapping_pairs(fields["anchors"], f"object {name!r} anchors")
        if pairs is not None:
            for aname, key_node, value_node in pairs:
                if aname == "":
                    w.add("bad-name", key_node, "anchor name must not be empty")
                    continue
                if aname in anchor_names[name]:
                    w.add("duplicate-anchor", key_node, f"anchor {aname!r} declared twice on {name!r}")
                    continue
                avec = w.numbers(value_node, f"anchor {aname!r}", 3)
                if avec is None:
                    continue
                anchor_names[name].add(aname)
                anchors.append((aname, avec))  # type: ignore[arg-type]
    anchors.sort(key=lambda kv: kv[0])

    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    if "longitudinal_axis" in fields:
        got = w.numbers(fields["longitudinal_axis"], f"object {name!r} longitudinal_axis", 3)
        if got is not None:
            if abs(math.sqrt(sum(c * c for c in got)) - 1.0) > AXIS_TOL:
                w.add("non-unit-axis", fields["longitudinal_axis"], "longitudinal_axis must be unit length")
            else:
                axis = got  # type: ignore[assignment]

    return ObjectSpec(name=name, pose=pose, anchors=tuple(anchors), longitudinal_axis=axis)


def _parse_condition(w: _Walker, node, resolve_object, anchor_names) -> ConditionSpec | None:
    fields = w.fields(node, "condition", ("kind", "subject", "reference", "threshold"))
    if fields is None:
        return None
    if "kind" not in fields:
        w.add("missing-field", node, "condition needs a kind")
        return None
    kind_text = w.string(fields["kind"], "condition kind")
    if kind_text is None:
        return None
    if kind_text not in _CONDITION_KINDS:
        w.add("unknown-condition-kind", fields["kind"], f"unknown condition kind {kind_text!r}")
        return None
    kind = _CONDITION_KINDS[kind_text]

    if "subject" not in fields:
        w.add("missing-field", node, "condition needs a subject")
        return None
    subject = resolve_object(fields["subject"], "condition subject")

    reference = None
    if kind in (
        ConditionKind.DISTANCE_LEQ,
        ConditionKind.DISTANCE_GEQ,
        ConditionKind.DISTANCE_LT,
        ConditionKind.DISTANCE_GT,
    ):
        if "reference" not in fields:
            w.add("missing-field", node, f"{kind_text} needs a reference object")
            return None
        reference = resolve_object(fields["reference"], "condition reference")
        if reference is None:
            return None
    elif "reference" in fields:
        w.add("unknown-field", fields["reference"], "tilt conditions take no reference")

    if "threshold" not in fields:
        w.add("missing-field", node, "condition needs a threshold")
        return None
    threshold = w.number(fields["threshold"], "condition threshold")
    if subject is None or threshold is None:
        return None
    return ConditionSpec(kind=kind, subject=subject, threshold=threshold, reference=reference)


def _parse_action(w: _Walker, node, resolve_object, anchor_names) -> ScanSpec | None:
    all_keys = ("kind", "subject", "target", "pivot", "reference", "reference_anchor", "gain", "input_component")
    fields = w.fields(node, "action", all_keys)
    if fields is None:
        return None
    if "kind" not in fields:
        w.add("missing-field", node, "action needs a kind")
        return None
    kind_text = w.string(fields["kind"], "action kind")
    if kind_text is None:
        return None
    if kind_text not in _SCAN_KINDS:
        w.add("unknown-scan-kind", fields["kind"], f"unknown scan kind {kind_text!r}")
        return None
    kind = _SCAN_KINDS[kind_text]

    if "subject" not in fields:
        w.add("missing-field", node, "action needs a subject")
        return None
    subject = resolve_object(fields["subject"], "scan subject")

    gain = DEFAULT_GAIN
    if "gain" in fields:
        value = w.number(fields["gain"], "scan gain")
        if value is not None:
            gain = value

    if kind is ScanKind.PROJECT_TO:
        for forbidden in ("pivot", "reference", "reference_anchor", "input_component"):
            if forbidden in fields:
                w.add("unknown-field", fields[forbidden], f"project_to takes no {forbidden}")
        if gain <= 0.0:
            w.add("bad-gain", fields.get("gain"), "project_to gain must be positive")
            return None
        if "target" not in fields:
            w.add("missing-field", node, "project_to needs a target object")
            return None
        target = resolve_object(fields["target"], "projection target")
        if subject is None or target is None:
            return None
        return ScanSpec(kind=kind, subject=subject, target=target, gain=gain)

    if "target" in fields:
        w.add("unknown-field", fields["target"], "rotation names its pivot anchor, not a target")

    def resolve_anchor(owner: str | None, node_key: str, where: str) -> str | None:
        if node_key not in fields:
            w.add("missing-field", node, f"rotation needs a {node_key}")
            return None
        value = w.name(fields[node_key], where)
        if value is None or owner is None:
            return None
        if value not in anchor_names.get(owner, set()):
            w.add("unknown-anchor", fields[node_key], f"object {owner!r} has no anchor {value!r}")
            return None
        return value

    pivot = resolve_anchor(subject, "pivot", "rotation pivot")

    reference = None
    if "reference" not in fields:
        w.add("missing-field", node, "rotation needs a reference object")
    else:
        reference = resolve_object(fields["reference"], "rotation reference")
    reference_anchor = resolve_anchor(reference, "reference_anchor", "rotation reference anchor")

    component = None
    if "input_component" not in fields:
        w.add("missing-field", node, "rotation needs an input_component")
    else:
        value = w.string(fields["input_component"], "input_component")
        if value is not None:
            if value not in _COMPONENT_NAMES:
                w.add("unknown-component", fields["input_component"], f"input_component must be one of {_COMPONENT_NAMES}")
            else:
                component = value

    if None in (subject, pivot, reference, reference_anchor, component):
        return None
    if not math.isfinite(gain):
        w.add("non-finite", fields.get("gain"), "rotation gain must be finite")
        return None
    return ScanSpec(
        kind=kind,
        subject=subject,  # type: ignore[arg-type]
        target=pivot,  # type: ignore[arg-type]
        gain=gain,
        input_component=component,
        reference=reference,
        reference_anchor=reference_anchor,
    )


def _parse_phase(w: _Walker, node, phase_names: set[str], resolve_object, anchor_names) -> Phase | None:
    fields = w.fields(node, "phase", ("name", "conditions", "actions"))
    if fields is None:
        return None
    if "name" not in fields:
        w.add("missing-field", node, "phase needs a name")
        return None
    name = w.name(fields["name"], "phase name")
    if name is None:
        return None
    if name in phase_names:
        w.add("duplicate-phase", fields["name"], f"phase {name!r} declared twice")
        return None
    phase_names.add(name)

    conditions: list[ConditionSpec] = []
    if "conditions" in fields:
        items = w.sequence_items(fields["conditions"], "conditions")
        if items is not None:
            for item in items:
                cond = _parse_condition(w, item, resolve_object, anchor_names)
                if cond is not None:
                    conditions.append(cond)

    actions: list[ScanSpec] = []
    if "actions" not in fields:
        w.add("no-actions", node, f"phase {name!r} defines no actions")
    else:
        items = w.sequence_items(fields["actions"], "actions")
        if items is not None:
            if not items:
                w.add("no-actions", fields["actions"], f"phase {name!r} defines no actions")
            for item in items:
                act = _parse_action(w, item, resolve_object, anchor_names)
                if act is not None:
                    actions.append(act)

    return Phase(name=name, conditions=tuple(conditions), actions=tuple(actions))


def parse(data: str | bytes) -> ActivityDocument:
    """Parse an activity document; raises ActivityError carrying diagnostics."""
    doc, diags = _parse_impl(data)
    if doc is None:
        raise ActivityError(diags)
    return doc


def diagnose(data: str | bytes) -> list[Diagnostic]:
    """All diagnostics for a document; empty means it parses clean."""
    _, diags = _parse_impl(data)
    return diags


# ---------------------------------------------------------------------------
# Canonical serialization

_YAML_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def _printable(ch: str) -> bool:
    cp = ord(ch)
    return (
        0x20 <= cp <= 0x7E
        or 0xA0 <= cp <= 0xD7FF
        or (0xE000 <= cp <= 0xFFFD and cp not in (0x2028, 0x2029))
        or 0x10000 <= cp <= 0x10FFFF
    )


def _fmt_str(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch in _YAML_ESCAPES:
            out.append(_YAML_ESCAPES[ch])
        elif _printable(ch):
            out.append(ch)
        else:
            out.append("\\u%04X" % ord(ch))
    out.append('"')
    return "".join(out)


def _fmt_float(x: float) -> str:
    s = repr(float(x))
    if "e" in s:
        mantissa, _, exponent = s.partition("e")
        if "." not in mantissa:
            mantissa += ".0"
        if not exponent.startswith(("+", "-")):
            exponent = "+" + exponent
        return mantissa + "e" + exponent
    if "." not in s:
        s += ".0"
    return s


def _fmt_vec(v) -> str:
    return "[" + ", ".join(_fmt_float(c) for c in v) + "]"


def _condition_line(c: ConditionSpec) -> str:
    parts = [f"kind: {_fmt_str(c.kind.value)}", f"subject: {_fmt_str(c.subject)}"]
    if c.reference is not None:
        parts.append(f"reference: {_fmt_str(c.reference)}")
    parts.append(f"threshold: {_fmt_float(c.threshold)}")
    return "  - {" + ", ".join(parts) + "}"


def _action_line(a: ScanSpec) -> str:
    if a.kind is ScanKind.PROJECT_TO:
        parts = [
            f"kind: {_fmt_str(a.kind.value)}",
            f"subject: {_fmt_str(a.subject)}",
            f"target: {_fmt_str(a.target)}",
            f"gain: {_fmt_float(a.gain)}",
        ]
    else:
        parts = [
            f"kind: {_fmt_str(a.kind.value)}",
            f"subject: {_fmt_str(a.subject)}",
            f"pivot: {_fmt_str(a.target)}",
            f"reference: {_fmt_str(a.reference)}",
            f"reference_anchor: {_fmt_str(a.reference_anchor)}",
            f"gain: {_fmt_float(a.gain)}",
            f"input_component: {_fmt_str(a.input_component)}",
        ]
    return "  - {" + ", ".join(parts) + "}"


def serialize(doc: ActivityDocument) -> str:
    """Canonical text for a document; parse(serialize(doc)) == doc."""
    lines = ["phast_version: 1"]
    lines.append(f"activity: {_fmt_str(doc.name)}")
    lines.append(f"tick_rate_hz: {_fmt_float(doc.tick_rate_hz)}")
    lines.append(f"fallthrough: {_fmt_str(doc.fallthrough.value)}")
    lines.append(f"pass_through_gain: {_fmt_float(doc.pass_through_gain)}")
    if doc.held_object is not None:
        lines.append(f"held_object: {_fmt_str(doc.held_object)}")
    lines.append("ee_grasp_offset:")
    lines.append(f"  p: {_fmt_vec(doc.ee_grasp_offset.p)}")
    lines.append(f"  q: {_fmt_vec(doc.ee_grasp_offset.q)}")
    if doc.objects:
        lines.append("objects:")
        for obj in doc.objects:
            lines.append(f"- name: {_fmt_str(obj.name)}")
            lines.append("  pose:")
            lines.append(f"    p: {_fmt_vec(obj.pose.p)}")
            lines.append(f"    q: {_fmt_vec(obj.pose.q)}")
            if obj.anchors:
                lines.append("  anchors:")
                for aname, avec in obj.anchors:
                    lines.append(f"    {_fmt_str(aname)}: {_fmt_vec(avec)}")
            else:
                lines.append("  anchors: {}")
            lines.append(f"  longitudinal_axis: {_fmt_vec(obj.longitudinal_axis)}")
    else:
        lines.append("objects: []")
    lines.append("phases:")
    for phase in doc.phases:
        lines.append(f"- name: {_fmt_str(phase.name)}")
        if phase.conditions:
            lines.append("  conditions:")
            lines.extend(_condition_line(c) for c in phase.conditions)
        else:
            lines.append("  conditions: []")
        lines.append("  actions:")
        lines.extend(_action_line(a) for a in phase.actions)
    return "\n".join(lines) + "\n"
