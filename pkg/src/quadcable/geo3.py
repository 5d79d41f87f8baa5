"""Small fixed-size 3D algebra: hat/vee, Euler angles, SO(3) repair, Kronecker product."""
from __future__ import annotations

import numpy as np

# Tolerances shared by the whole package.
SKEW_TOL = 1e-9
ROT_TOL = 1e-9
UNIT_TOL = 1e-9
GIMBAL_TOL = 1e-9

E3 = np.array([0.0, 0.0, 1.0])  # inertial z, pointing down along gravity


class DegenerateAttitudeError(ValueError):
    """Euler extraction requested at (or too close to) pitch = +-pi/2."""


def hat(v) -> np.ndarray:
    """Skew matrix with ``hat(v) @ w == np.cross(v, w)``."""
    x, y, z = float(v[0]), float(v[1]), float(v[2])
    return np.array([[0.0, -z, y],
                     [z, 0.0, -x],
                     [-y, x, 0.0]])


def vee(M, tol: float = SKEW_TOL) -> np.ndarray:
    """Inverse of :func:`hat`. Raises if ``M`` is not skew within ``tol``."""
    M = np.asarray(M, dtype=float)
    if np.max(np.abs(M + M.T)) > tol:
        raise ValueError("vee() needs a skew-symmetric matrix")
    return np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]]) * 0.5


def euler_to_rot(phi: float, theta: float, psi: float) -> np.ndarray:
    """Rotation matrix for roll ``phi``, pitch ``theta``, yaw ``psi`` (Z-Y-X, R = Rz Ry Rx)."""
    cf, sf = np.cos(phi), np.sin(phi)
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(psi), np.sin(psi)
    return np.array([
        [ct * cp, cp * st * sf - sp * cf, sp * sf + cp * cf * st],
        [sp * ct, cf * cp + sf * st * sp, sp * cf * st - cp * sf],
        [-st, ct * sf, ct * cf],
    ])


def rot_to_euler(R) -> np.ndarray:
    """Inverse of :func:`euler_to_rot`, returning ``[phi, theta, psi]``.

    Pitch is recovered as ``-asin(R[2, 0])``, so the result always has
    ``|theta| < pi/2``.
    """
    R = np.asarray(R, dtype=float)
    s = -R[2, 0]
    if abs(s) > 1.0 - GIMBAL_TOL:
        raise DegenerateAttitudeError(f"gimbal lock: R[2,0] = {R[2, 0]:.12g}")
    theta = np.arcsin(s)
    phi = np.arctan2(R[2, 1], R[2, 2])
    psi = np.arctan2(R[1, 0], R[0, 0])
    return np.array([phi, theta, psi])


def kron(A, B) -> np.ndarray:
    return np.kron(np.atleast_2d(np.asarray(A, dtype=float)), np.atleast_2d(np.asarray(B, dtype=float)))


def reorthonormalize(M) -> np.ndarray:
    """Nearest rotation to ``M`` in the Frobenius sense (polar factor via SVD)."""
    M = np.asarray(M, dtype=float)
    if np.linalg.det(M) <= 0.0:
        raise ValueError("reorthonormalize() needs det(M) > 0")
    U, _, Vt = np.linalg.svd(M)
    return U @ Vt


def is_rotation(R, tol: float = ROT_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    return (R.shape == (3, 3)
            and np.max(np.abs(R.T @ R - np.eye(3))) <= tol
            and abs(np.linalg.det(R) - 1.0) <= tol)


def rodrigues(w) -> np.ndarray:
    """Matrix exponential of ``hat(w)``."""
    w = np.asarray(w, dtype=float)
    th = np.linalg.norm(w)
    W = hat(w)
    if th < 1e-8:
        return np.eye(3) + W + 0.5 * W @ W
    return np.eye(3) + np.sin(th) / th * W + (1.0 - np.cos(th)) / th**2 * W @ W


def right_jacobian(w) -> np.ndarray:
    """SO(3) right Jacobian: d/dt exp(hat(w)) = exp(hat(w)) hat(J_r(w) w_dot)."""
    w = np.asarray(w, dtype=float)
    th = np.linalg.norm(w)
    W = hat(w)
    if th < 1e-5:
        return np.eye(3) - 0.5 * W + W @ W / 6.0
    return (np.eye(3) - (1.0 - np.cos(th)) / th**2 * W
            + (th - np.sin(th)) / th**3 * W @ W)


def tangent_basis(q) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors spanning the plane orthogonal to unit ``q``."""
    q = np.asarray(q, dtype=float)
    a = np.array([1.0, 0.0, 0.0]) if abs(q[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t1 = np.cross(q, a)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(q, t1)
    return t1, t2
