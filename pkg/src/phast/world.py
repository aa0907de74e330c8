"""Kinematic world model.

Named objects with poses and body-frame anchor points, an optional held
object that the end effector tracks through a fixed grasp offset, and
immutable per-tick snapshots that feed replay files, the wire protocol, and
the cockpit display. Worlds are updated functionally: `apply_pose` returns
a new world, so snapshots taken earlier are never disturbed.

The end effector is not an object of its own; its pose is derived from the
held object and published in snapshots under the reserved name "ee".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bt import NodeStatus
from .geometry import (
    UNIT_TOL,
    GeometryError,
    Pose,
    as_vec3,
    norm,
    pose_compose,
    quat_rotate,
    vec3,
)

EE_NAME = "ee"


class WorldLookupError(KeyError):
    """An object or anchor name did not resolve."""


def _unit_z() -> np.ndarray:
    return vec3(0.0, 0.0, 1.0)


@dataclass
class ObjectState:
    name: str
    pose: Pose
    anchors: dict[str, np.ndarray] = field(default_factory=dict)
    longitudinal_axis: np.ndarray = field(default_factory=_unit_z)

    def __post_init__(self):
        self.anchors = {k: as_vec3(v, f"anchor {k!r}") for k, v in self.anchors.items()}
        self.longitudinal_axis = as_vec3(self.longitudinal_axis, "longitudinal_axis")
        if abs(norm(self.longitudinal_axis) - 1.0) > UNIT_TOL:
            raise GeometryError(f"longitudinal_axis of {self.name!r} must be unit length")


@dataclass
class WorldState:
    objects: dict[str, ObjectState]
    held_object: str | None = None
    ee_grasp_offset: Pose = field(default_factory=Pose.identity)
    tick_index: int = 0
    dt: float = 0.02

    def __post_init__(self):
        if not math.isfinite(self.dt) or self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.held_object is not None and self.held_object not in self.objects:
            raise WorldLookupError(f"held object {self.held_object!r} does not exist")

    def require(self, name: str) -> ObjectState:
        try:
            return self.objects[name]
        except KeyError:
            raise WorldLookupError(f"unknown object {name!r}") from None


def anchor_world(world: WorldState, object_name: str, anchor_name: str) -> np.ndarray:
    """World-frame position of a named body-frame anchor point."""
    obj = world.require(object_name)
    if anchor_name not in obj.anchors:
        raise WorldLookupError(f"object {object_name!r} has no anchor {anchor_name!r}")
    return obj.pose.position + quat_rotate(obj.pose.orientation, obj.anchors[anchor_name])


def apply_pose(world: WorldState, object_name: str, new_pose: Pose) -> WorldState:
    """World with one object's pose replaced; everything else untouched.

    The end-effector pose follows automatically because it is derived from
    the held object. The tick clock is advanced by the engine loop, not here.
    """
    obj = world.require(object_name)
    objects = dict(world.objects)
    objects[object_name] = replace(obj, pose=new_pose)
    return replace(world, objects=objects)


def ee_pose(world: WorldState) -> Pose:
    """End-effector pose: held object's pose composed with the grasp offset."""
    if world.held_object is None:
        return Pose.identity()
    return pose_compose(world.objects[world.held_object].pose, world.ee_grasp_offset)


def _tuple3(v: np.ndarray) -> tuple[float, float, float]:
    return (float(v[0]), float(v[1]), float(v[2]))


def _tuple4(v: np.ndarray) -> tuple[float, float, float, float]:
    return (float(v[0]), float(v[1]), float(v[2]), float(v[3]))


@dataclass(frozen=True)
class TickSnapshot:
    """Immutable value capture of one engine tick.

    `statuses` is the status ledger in tree pre-order; `poses` lists every
    object in world declaration order with the end effector last.
    """

    tick: int
    time_s: float
    active_phase: str | None
    degenerate: bool
    poses: tuple[tuple[str, tuple[float, float, float], tuple[float, float, float, float]], ...]
    statuses: tuple[tuple[str, NodeStatus], ...]
    u: tuple[float, float, float]

    def pose_of(self, name: str) -> tuple[tuple[float, float, float], tuple[float, float, float, float]]:
        for entry_name, p, q in self.poses:
            if entry_name == name:
                return p, q
        raise WorldLookupError(f"snapshot has no pose for {name!r}")

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "tick": self.tick,
                "time_s": self.time_s,
                "active_phase": self.active_phase,
                "degenerate": self.degenerate,
                "poses": {name: {"p": list(p), "q": list(q)} for name, p, q in self.poses},
                "statuses": [[label, status.value] for label, status in self.statuses],
                "u": list(self.u),
            }
        )

    @classmethod
    def from_json_line(cls, line: str) -> "TickSnapshot":
        raw = json.loads(line)
        return cls(
            tick=int(raw["tick"]),
            time_s=float(raw["time_s"]),
            active_phase=raw["active_phase"],
            degenerate=bool(raw["degenerate"]),
            poses=tuple(
                (name, tuple(entry["p"]), tuple(entry["q"]))
                for name, entry in raw["poses"].items()
            ),
            statuses=tuple((label, NodeStatus(value)) for label, value in raw["statuses"]),
            u=tuple(raw["u"]),
        )


def snapshot(
    world: WorldState,
    statuses: list[tuple[str, NodeStatus]],
    active_phase: str | None,
    u,
    degenerate: bool = False,
) -> TickSnapshot:
    """Capture the world and the just-completed tick's ledger as values."""
    poses = [
        (name, _tuple3(obj.pose.position), _tuple4(obj.pose.orientation))
        for name, obj in world.objects.items()
    ]
    ee = ee_pose(world)
    poses.append((EE_NAME, _tuple3(ee.position), _tuple4(ee.orientation)))
    u = as_vec3(u, "u")
    return TickSnapshot(
        tick=world.tick_index,
        time_s=world.tick_index * world.dt,
        active_phase=active_phase,
        degenerate=degenerate,
        poses=tuple(poses),
        statuses=tuple(statuses),
        u=_tuple3(u),
    )
