"""
Quaternion and rigid-transform helpers.

Quaternions are stored (w, x, y, z) in the last axis; every function broadcasts over
leading axes. Rigid transforms are 4x4 homogeneous matrices.
"""

import numpy as np

from gaussian_crowd.constants import ERROR_NON_FINITE, RIGID_TOLERANCE
from gaussian_crowd.errors import InvalidInputError

IDENTITY_QUATERNION = np.array([1.0, 0.0, 0.0, 0.0])


def ensure_finite(values: np.ndarray, what: str) -> np.ndarray:
    """Reject NaN or infinite entries with a typed error"""
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(ERROR_NON_FINITE.format(what))
    return arr


def normalize_quaternions(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q)
    norm = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(norm == 0.0):
        raise InvalidInputError("zero-length quaternion")
    return q / norm


def quaternion_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrices for unit quaternions, shape (..., 3, 3)"""
    q = np.asarray(q)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    one = np.ones_like(w)
    two = one + one
    m = np.empty(q.shape[:-1] + (3, 3), dtype=q.dtype)
    m[..., 0, 0] = one - two * (y * y + z * z)
    m[..., 0, 1] = two * (x * y - w * z)
    m[..., 0, 2] = two * (x * z + w * y)
    m[..., 1, 0] = two * (x * y + w * z)
    m[..., 1, 1] = one - two * (x * x + z * z)
    m[..., 1, 2] = two * (y * z - w * x)
    m[..., 2, 0] = two * (x * z - w * y)
    m[..., 2, 1] = two * (y * z + w * x)
    m[..., 2, 2] = one - two * (x * x + y * y)
    return m


def quaternion_from_matrix(m: np.ndarray) -> np.ndarray:
    """Unit quaternions (w >= 0) for rotation matrices, shape (..., 4)"""
    m = np.asarray(m, dtype=np.float64)
    flat = m.reshape(-1, 3, 3)
    out = np.empty((flat.shape[0], 4))
    trace = flat[:, 0, 0] + flat[:, 1, 1] + flat[:, 2, 2]
    # Pick the numerically largest component per matrix
    candidates = np.stack(
        [trace, flat[:, 0, 0], flat[:, 1, 1], flat[:, 2, 2]], axis=-1
    )
    branch = np.argmax(candidates, axis=-1)
    for i, r in enumerate(flat):
        if branch[i] == 0:
            s = np.sqrt(1.0 + trace[i]) * 2.0
            out[i] = [
                0.25 * s,
                (r[2, 1] - r[1, 2]) / s,
                (r[0, 2] - r[2, 0]) / s,
                (r[1, 0] - r[0, 1]) / s,
            ]
        elif branch[i] == 1:
            s = np.sqrt(max(1.0 + r[0, 0] - r[1, 1] - r[2, 2], 0.0)) * 2.0
            out[i] = [
                (r[2, 1] - r[1, 2]) / s,
                0.25 * s,
                (r[0, 1] + r[1, 0]) / s,
                (r[0, 2] + r[2, 0]) / s,
            ]
        elif branch[i] == 2:
            s = np.sqrt(max(1.0 + r[1, 1] - r[0, 0] - r[2, 2], 0.0)) * 2.0
            out[i] = [
                (r[0, 2] - r[2, 0]) / s,
                (r[0, 1] + r[1, 0]) / s,
                0.25 * s,
                (r[1, 2] + r[2, 1]) / s,
            ]
        else:
            s = np.sqrt(max(1.0 + r[2, 2] - r[0, 0] - r[1, 1], 0.0)) * 2.0
            out[i] = [
                (r[1, 0] - r[0, 1]) / s,
                (r[0, 2] + r[2, 0]) / s,
                (r[1, 2] + r[2, 1]) / s,
                0.25 * s,
            ]
    out[out[:, 0] < 0.0] *= -1.0
    out = normalize_quaternions(out)
    return out.reshape(m.shape[:-2] + (4,))


def quaternion_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a * b (rotation b applied first)"""
    a = np.asarray(a)
    b = np.asarray(b)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quaternion_from_axis_angle(axis, angle) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    angle = np.asarray(angle, dtype=np.float64)
    axis = axis / np.linalg.norm(axis, axis=-1, keepdims=True)
    half = 0.5 * angle
    return np.concatenate(
        [np.cos(half)[..., None], axis * np.sin(half)[..., None]], axis=-1
    )


def quaternion_rotating_z_to(directions: np.ndarray) -> np.ndarray:
    """Quaternions taking +z onto each unit direction, shape (N, 4)"""
    d = np.asarray(directions, dtype=np.float64)
    d = d / np.linalg.norm(d, axis=-1, keepdims=True)
    # Half-way vector trick: q = (1 + z.d, z x d), normalized
    w = 1.0 + d[:, 2]
    xyz = np.stack([-d[:, 1], d[:, 0], np.zeros(len(d))], axis=-1)
    q = np.concatenate([w[:, None], xyz], axis=-1)
    opposite = w < 1e-9
    q[opposite] = [0.0, 1.0, 0.0, 0.0]
    return normalize_quaternions(q)


def slerp(q0: np.ndarray, q1: np.ndarray, t: float) -> np.ndarray:
    """Shortest-arc spherical interpolation between unit quaternions"""
    q0 = np.asarray(q0, dtype=np.float64)
    q1 = np.asarray(q1, dtype=np.float64)
    dot = np.sum(q0 * q1, axis=-1, keepdims=True)
    q1 = np.where(dot < 0.0, -q1, q1)
    dot = np.abs(dot)
    close = dot > 0.9995
    theta = np.arccos(np.clip(dot, -1.0, 1.0))
    sin_theta = np.sin(theta)
    safe_sin = np.where(close, 1.0, sin_theta)
    w0 = np.where(close, 1.0 - t, np.sin((1.0 - t) * theta) / safe_sin)
    w1 = np.where(close, t, np.sin(t * theta) / safe_sin)
    return normalize_quaternions(w0 * q0 + w1 * q1)


def rigid_transform(rotation: np.ndarray, translation) -> np.ndarray:
    t = np.eye(4)
    t[:3, :3] = rotation
    t[:3, 3] = translation
    return t


def translation_matrix(translation) -> np.ndarray:
    return rigid_transform(np.eye(3), translation)


def invert_rigid(transform: np.ndarray) -> np.ndarray:
    """Inverse of rigid transforms, shape (..., 4, 4)"""
    transform = np.asarray(transform)
    rot = transform[..., :3, :3]
    trans = transform[..., :3, 3]
    rot_t = np.swapaxes(rot, -1, -2)
    out = np.zeros_like(transform)
    out[..., :3, :3] = rot_t
    out[..., :3, 3] = -np.einsum("...ij,...j->...i", rot_t, trans)
    out[..., 3, 3] = 1.0
    return out


def is_rigid(transform: np.ndarray, tolerance: float = RIGID_TOLERANCE) -> bool:
    """True when every transform has an orthonormal, unit-determinant rotation"""
    transform = np.asarray(transform, dtype=np.float64)
    rot = transform[..., :3, :3]
    gram = np.einsum("...ji,...jk->...ik", rot, rot)
    if not np.allclose(gram, np.eye(3), atol=tolerance):
        return False
    if not np.allclose(np.linalg.det(rot), 1.0, atol=tolerance):
        return False
    bottom = transform[..., 3, :]
    return bool(np.allclose(bottom, [0.0, 0.0, 0.0, 1.0], atol=tolerance))


def yaw_matrix(yaw: float) -> np.ndarray:
    """Rotation about +y by yaw radians"""
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
