"""Rigid-body math used by shared-control action nodes and phase conditions.

Conventions
-----------
- Vectors are float64 numpy arrays of shape (3,). Positions and
  displacements are meters; directions are dimensionless.
- Quaternions are wxyz: numpy arrays [w, x, y, z] with unit norm. The same
  component order is used on every file and wire boundary.
- Homogeneous transforms are 4x4 row-major float64 arrays.
- Angles are radians unless the function name says otherwise ("deg").
- World +z is up. "Tilt" is the angle of a body axis above the horizontal
  plane, so an upright bottle reads 90 degrees and a horizontal one 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Below this length a direction vector is treated as degenerate.
EPS_LEN = 1e-9
# Tolerance for unit-length checks on axes and quaternions.
UNIT_TOL = 1e-9

_COMPONENTS = {"x": 0, "y": 1, "z": 2}


class GeometryError(ValueError):
    """Raised when an operation is handed geometry it cannot act on."""


class DegenerateLineError(GeometryError):
    """The two points meant to define a line coincide."""


class DegenerateAxisError(GeometryError):
    """The requested rotation axis has (near) zero length."""


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([x, y, z], dtype=np.float64)


def as_vec3(value, name: str = "vector") -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (3,):
        raise GeometryError(f"{name} must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GeometryError(f"{name} must be finite, got {arr}")
    return arr


def norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def as_quat(value, name: str = "quaternion") -> np.ndarray:
    q = np.asarray(value, dtype=np.float64)
    if q.shape != (4,):
        raise GeometryError(f"{name} must be [w, x, y, z], got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise GeometryError(f"{name} must be finite, got {q}")
    if abs(norm(q) - 1.0) > 1e-6:
        raise GeometryError(f"{name} must be unit norm, |q| = {norm(q)!r}")
    return q


def quat_normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    n = norm(q)
    if n <= EPS_LEN:
        raise GeometryError("cannot normalize a zero quaternion")
    return q / n


def quat_from_axis_angle(axis: np.ndarray, theta: float) -> np.ndarray:
    """Unit quaternion for a right-handed rotation of theta about a unit axis."""
    axis = as_vec3(axis, "axis")
    half = 0.5 * theta
    s = math.sin(half)
    return np.array([math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    qv = np.asarray(q[1:4], dtype=np.float64)
    t = 2.0 * np.cross(qv, np.asarray(v, dtype=np.float64))
    return v + q[0] * t + np.cross(qv, t)


@dataclass(frozen=True, eq=False)
class Pose:
    """Position plus wxyz orientation quaternion."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec3(self.position, "position"))
        object.__setattr__(self, "orientation", as_quat(self.orientation, "orientation"))

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return np.array_equal(self.position, other.position) and np.array_equal(
            self.orientation, other.orientation
        )

    @staticmethod
    def identity() -> "Pose":
        return Pose(vec3(0.0, 0.0, 0.0), np.array([1.0, 0.0, 0.0, 0.0]))


def pose_compose(a: Pose, b: Pose) -> Pose:
    """Pose of frame b expressed through frame a (a then b)."""
    return Pose(
        a.position + quat_rotate(a.orientation, b.position),
        quat_normalize(quat_mul(a.orientation, b.orientation)),
    )


def commanded_point(l_b: np.ndarray, u, gain_trans: float, dt: float) -> np.ndarray:
    """Target point for one tick of raw translation input.

    The step scales with dt so the commanded speed is independent of the
    tick frequency.
    """
    l_b = as_vec3(l_b, "l_b")
    u = as_vec3(u, "u")
    if not math.isfinite(gain_trans) or gain_trans <= 0.0:
        raise GeometryError(f"gain_trans must be positive, got {gain_trans!r}")
    if not math.isfinite(dt) or dt <= 0.0:
        raise GeometryError(f"dt must be positive, got {dt!r}")
    return l_b + (gain_trans * dt) * u


def project_to(l_b: np.ndarray, l_c: np.ndarray, l_u: np.ndarray) -> np.ndarray:
    """Closest point to l_u on the infinite line through l_b and l_c."""
    l_b = as_vec3(l_b, "l_b")
    l_c = as_vec3(l_c, "l_c")
    l_u = as_vec3(l_u, "l_u")
    chord = l_c - l_b
    length = norm(chord)
    if length <= EPS_LEN:
        raise DegenerateLineError("line endpoints coincide, projection undefined")
    direction = chord / length
    return l_b + direction * float(np.dot(l_u - l_b, direction))


def rotation_axis(l_c: np.ndarray, l_b: np.ndarray, p_c: np.ndarray) -> np.ndarray:
    """Unit rotation axis: cross product of (l_c - p_c) and (l_b - p_c)."""
    l_c = as_vec3(l_c, "l_c")
    l_b = as_vec3(l_b, "l_b")
    p_c = as_vec3(p_c, "p_c")
    axis = np.cross(l_c - p_c, l_b - p_c)
    length = norm(axis)
    if length <= EPS_LEN:
        raise DegenerateAxisError("points are collinear, rotation axis undefined")
    return axis / length


def rotation_matrix(axis: np.ndarray, theta: float) -> np.ndarray:
    """Homogeneous axis-angle rotation matrix (right-handed about a unit axis)."""
    axis = as_vec3(axis, "axis")
    if abs(norm(axis) - 1.0) > UNIT_TOL:
        raise GeometryError(f"axis must be unit length, |axis| = {norm(axis)!r}")
    if not math.isfinite(theta):
        raise GeometryError(f"theta must be finite, got {theta!r}")
    x, y, z = (float(axis[0]), float(axis[1]), float(axis[2]))
    c = math.cos(theta)
    s = math.sin(theta)
    ic = 1.0 - c
    return np.array(
        [
            [c + x * x * ic, x * y * ic - z * s, x * z * ic + y * s, 0.0],
            [x * y * ic + z * s, c + y * y * ic, y * z * ic - x * s, 0.0],
            [x * z * ic - y * s, y * z * ic + x * s, c + z * z * ic, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def rotate_about_pivot(pose: Pose, pivot: np.ndarray, axis: np.ndarray, theta: float) -> Pose:
    """Rotate a pose about an arbitrary pivot point: T(pivot) R T(-pivot)."""
    pivot = as_vec3(pivot, "pivot")
    if theta == 0.0:
        # Exact no-op: keeps zero-input replays bit-identical.
        return pose
    rot = rotation_matrix(axis, theta)[:3, :3]
    position = pivot + rot @ (pose.position - pivot)
    orientation = quat_normalize(quat_mul(quat_from_axis_angle(axis, theta), pose.orientation))
    return Pose(position, orientation)


def input_to_angle(u, component: str, gain_rot: float, dt: float) -> float:
    """Rotation angle for one tick from the selected input component.

    The sign of the input flips the sign of the angle, so a user can back
    out of a rotation by pushing the other way.
    """
    u = as_vec3(u, "u")
    if component not in _COMPONENTS:
        raise GeometryError(f"unknown input component {component!r}")
    if not math.isfinite(dt) or dt <= 0.0:
        raise GeometryError(f"dt must be positive, got {dt!r}")
    if not math.isfinite(gain_rot):
        raise GeometryError(f"gain_rot must be finite, got {gain_rot!r}")
    return gain_rot * float(u[_COMPONENTS[component]]) * dt


def distance(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance in meters."""
    return norm(as_vec3(a, "a") - as_vec3(b, "b"))


def tilt_deg(orientation: np.ndarray, body_axis: np.ndarray) -> float:
    """Angle of the world-frame image of body_axis above the horizontal plane.

    Ranges over [0, 90]: 90 when the axis is vertical (either way up), 0 when
    horizontal. Invariant under yaw.
    """
    axis_world = quat_rotate(as_quat(orientation, "orientation"), as_vec3(body_axis, "body_axis"))
    length = norm(axis_world)
    if length <= EPS_LEN:
        raise GeometryError("body axis has zero length")
    return math.degrees(math.asin(min(1.0, abs(float(axis_world[2])) / length)))
