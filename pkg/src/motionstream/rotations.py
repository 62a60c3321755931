"""Quaternion and rotation helpers.

Convention: quaternions are (w, x, y, z), Hamilton product, right-handed
world frame.  All functions accept trailing-axis batches, i.e. arrays of
shape (..., 4) / (..., 3).
"""

import numpy as np


def quat_normalize(q):
    q = np.asarray(q, dtype=np.float64)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n < 1e-12):
        raise ValueError("cannot normalize zero quaternion")
    return q / n


def quat_mul(a, b):
    """Hamilton product a * b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conj(q):
    q = np.asarray(q, dtype=np.float64)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_rotate(q, v):
    """Rotate vector(s) v by quaternion(s) q."""
    q = np.asarray(q, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    qv = q[..., 1:]
    w = q[..., :1]
    t = 2.0 * np.cross(qv, v)
    return v + w * t + np.cross(qv, t)


def quat_from_axis_angle(axis, angle):
    """Unit quaternion for rotation of `angle` radians about `axis`.

    `axis` must be unit length; `angle` may be an array, broadcast into
    the leading shape of the result.
    """
    axis = np.asarray(axis, dtype=np.float64)
    angle = np.asarray(angle, dtype=np.float64)
    half = 0.5 * angle
    s = np.sin(half)
    w = np.cos(half)
    xyz = axis * s[..., None]
    return np.concatenate([w[..., None], xyz], axis=-1)


def quat_to_mat(q):
    """Rotation matrix (..., 3, 3) from quaternion (..., 4)."""
    q = quat_normalize(q)
    w, x, y, z = np.moveaxis(q, -1, 0)
    m = np.empty(q.shape[:-1] + (3, 3), dtype=np.float64)
    m[..., 0, 0] = 1 - 2 * (y * y + z * z)
    m[..., 0, 1] = 2 * (x * y - w * z)
    m[..., 0, 2] = 2 * (x * z + w * y)
    m[..., 1, 0] = 2 * (x * y + w * z)
    m[..., 1, 1] = 1 - 2 * (x * x + z * z)
    m[..., 1, 2] = 2 * (y * z - w * x)
    m[..., 2, 0] = 2 * (x * z - w * y)
    m[..., 2, 1] = 2 * (y * z + w * x)
    m[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def quat_slerp(q0, q1, u):
    """Spherical interpolation between quaternions; u in [0, 1].

    Takes the shorter arc (flips sign when the dot product is negative)
    and falls back to normalized lerp for nearly parallel inputs.
    """
    q0 = np.asarray(q0, dtype=np.float64)
    q1 = np.asarray(q1, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if q0.shape == q1.shape and np.array_equal(q0, q1):
        return q0.copy()  # identical endpoints reproduce exactly
    dot = np.sum(q0 * q1, axis=-1)
    sign = np.where(dot < 0.0, -1.0, 1.0)
    q1 = q1 * sign[..., None]
    dot = np.abs(dot)
    dot = np.clip(dot, -1.0, 1.0)
    theta = np.arccos(dot)
    sin_theta = np.sin(theta)
    near = sin_theta < 1e-9
    # guard the division; near-parallel entries are overwritten below
    safe_sin = np.where(near, 1.0, sin_theta)
    w0 = np.where(near, 1.0 - u, np.sin((1.0 - u) * theta) / safe_sin)
    w1 = np.where(near, u, np.sin(u * theta) / safe_sin)
    out = w0[..., None] * q0 + w1[..., None] * q1
    return quat_normalize(out)


def quat_from_yaw(yaw):
    """Quaternion for a rotation of `yaw` radians about world z."""
    return quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), yaw)


def yaw_of(q):
    """Heading angle (rotation of body x-axis about world z) in radians."""
    fwd = quat_rotate(q, np.array([1.0, 0.0, 0.0]))
    return np.arctan2(fwd[..., 1], fwd[..., 0])


def wrap_angle(a):
    """Wrap angle(s) to [-pi, pi)."""
    return np.mod(np.asarray(a, dtype=np.float64) + np.pi, 2.0 * np.pi) - np.pi
