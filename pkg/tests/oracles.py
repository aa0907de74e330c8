"""Independent reference implementations used to check the engine.

Written from scratch against the math, tuple-based, math-module only (numpy
appears solely to vectorize the brute-force grid scan). Nothing here imports
the package under test; the whole point is that these disagree with the
implementation if either side is wrong.
"""

import math

import numpy as np


def v_add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def v_sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def v_scale(a, s):
    return (a[0] * s, a[1] * s, a[2] * s)


def v_dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def v_cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def v_norm(a):
    return math.sqrt(v_dot(a, a))


# -- quaternions (wxyz) ------------------------------------------------------


def q_mul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def q_conj(q):
    return (q[0], -q[1], -q[2], -q[3])


def q_from_axis_angle(axis, theta):
    half = theta / 2.0
    s = math.sin(half)
    return (math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s)


def q_rotate(q, v):
    """Rotate v by unit quaternion q via q * (0, v) * q-conjugate."""
    w, x, y, z = q_mul(q_mul(q, (0.0,) + tuple(v)), q_conj(q))
    return (x, y, z)


def q_normalize(q):
    n = math.sqrt(sum(c * c for c in q))
    return tuple(c / n for c in q)


def random_unit_quat(rng):
    while True:
        q = tuple(rng.gauss(0.0, 1.0) for _ in range(4))
        n = math.sqrt(sum(c * c for c in q))
        if n > 1e-6:
            return tuple(c / n for c in q)


def random_unit_vec(rng):
    while True:
        v = tuple(rng.gauss(0.0, 1.0) for _ in range(3))
        n = v_norm(v)
        if n > 1e-6:
            return v_scale(v, 1.0 / n)


# -- rotations ---------------------------------------------------------------


def rodrigues3(axis, theta):
    """3x3 rotation matrix about a unit axis, as nested tuples."""
    x, y, z = axis
    c = math.cos(theta)
    s = math.sin(theta)
    ic = 1.0 - c
    return (
        (c + x * x * ic, x * y * ic - z * s, x * z * ic + y * s),
        (x * y * ic + z * s, c + y * y * ic, y * z * ic - x * s),
        (x * z * ic - y * s, y * z * ic + x * s, c + z * z * ic),
    )


def mat_vec(m, v):
    return tuple(sum(m[i][j] * v[j] for j in range(3)) for i in range(3))


def mat_mul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)) for i in range(3)
    )


def rotate_point_about_pivot(p, pivot, axis, theta):
    """Translate to the pivot, rotate by quaternion, translate back."""
    q = q_from_axis_angle(axis, theta)
    return v_add(pivot, q_rotate(q, v_sub(p, pivot)))


def tilt_of(q, body_axis):
    """Degrees above the horizontal plane of the rotated body axis."""
    world = q_rotate(q, body_axis)
    return math.degrees(math.asin(min(1.0, abs(world[2]) / v_norm(world))))


# -- projection --------------------------------------------------------------


def closest_point_on_line_bruteforce(l_b, l_c, l_u, lo=-5.0, hi=5.0, step=1e-4):
    """Minimize |l_b + t (l_c - l_b) - l_u| by grid scan plus local refinement.

    The squared distance is exactly quadratic in t, so a parabolic fit
    through the best grid point and its neighbours lands on the true
    minimizer to machine precision.
    """
    l_b = np.asarray(l_b, dtype=float)
    l_c = np.asarray(l_c, dtype=float)
    l_u = np.asarray(l_u, dtype=float)
    d = l_c - l_b
    ts = np.arange(lo, hi + step, step)
    points = l_b[None, :] + ts[:, None] * d[None, :]
    dist2 = np.sum((points - l_u[None, :]) ** 2, axis=1)
    i = int(np.argmin(dist2))
    if i == 0 or i == len(ts) - 1:
        t_best = ts[i]
    else:
        y0, y1, y2 = dist2[i - 1], dist2[i], dist2[i + 1]
        denom = y0 - 2.0 * y1 + y2
        t_best = ts[i] if denom == 0 else ts[i] + 0.5 * step * (y0 - y2) / denom
    return l_b + t_best * d


def point_line_distance(p, a, b):
    """Distance from point p to the infinite line through a and b."""
    ab = v_sub(b, a)
    ap = v_sub(p, a)
    n = v_norm(ab)
    if n == 0.0:
        return v_norm(ap)
    return v_norm(v_cross(ab, ap)) / n
