import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quadcable.geo3 import (E3, DegenerateAttitudeError, euler_to_rot, hat, is_rotation, kron, reorthonormalize,
                            right_jacobian, rodrigues, rot_to_euler, tangent_basis, vee)

vec3 = arrays(np.float64, 3, elements=st.floats(-10, 10))
angles = st.tuples(st.floats(-np.pi, np.pi), st.floats(-1.5, 1.5), st.floats(-np.pi, np.pi))


def test_hat_examples():
    assert np.allclose(hat([1, 0, 0]) @ [0, 1, 0], [0, 0, 1])
    assert np.array_equal(hat([0, 0, 0]), np.zeros((3, 3)))
    assert np.array_equal(hat([1, 2, 3]), [[0, -3, 2], [3, 0, -1], [-2, 1, 0]])


def test_vee_examples():
    assert np.array_equal(vee(hat([1, 2, 3])), [1, 2, 3])
    assert np.array_equal(vee(np.zeros((3, 3))), np.zeros(3))


def test_vee_rejects_non_skew():
    with pytest.raises(ValueError):
        vee(np.eye(3))


@given(vec3, vec3)
def test_hat_is_cross_product(a, b):
    assert np.allclose(hat(a) @ b, np.cross(a, b), atol=1e-12)


@given(vec3)
def test_hat_identities(a):
    A = hat(a)
    assert np.array_equal(A, -A.T)
    assert np.allclose(A @ a, 0.0, atol=1e-12)
    assert np.allclose(A @ A, np.outer(a, a) - (a @ a) * np.eye(3), atol=1e-10)
    assert np.array_equal(vee(A), a)


@given(vec3, angles)
def test_hat_rotation_covariance(a, ang):
    R = euler_to_rot(*ang)
    assert np.allclose(R @ hat(a) @ R.T, hat(R @ a), atol=1e-10)


def test_euler_zero_is_identity():
    assert np.array_equal(euler_to_rot(0, 0, 0), np.eye(3))
    assert np.array_equal(rot_to_euler(np.eye(3)), np.zeros(3))


def test_euler_entries_at_quarter_roll():
    R = euler_to_rot(np.pi / 2, 0.0, 0.0)
    assert np.allclose(R, [[1, 0, 0], [0, 0, -1], [0, 1, 0]], atol=1e-15)
    assert np.allclose(R @ E3, [0, -1, 0], atol=1e-15)


def test_euler_is_zyx_product():
    phi, theta, psi = 0.3, -0.4, 1.1
    c, s = np.cos, np.sin
    Rx = np.array([[1, 0, 0], [0, c(phi), -s(phi)], [0, s(phi), c(phi)]])
    Ry = np.array([[c(theta), 0, s(theta)], [0, 1, 0], [-s(theta), 0, c(theta)]])
    Rz = np.array([[c(psi), -s(psi), 0], [s(psi), c(psi), 0], [0, 0, 1]])
    assert np.allclose(euler_to_rot(phi, theta, psi), Rz @ Ry @ Rx, atol=1e-15)


@given(angles)
def test_euler_round_trip(ang):
    R = euler_to_rot(*ang)
    assert is_rotation(R)
    assert np.allclose(rot_to_euler(R), ang, atol=1e-9)
    assert np.max(np.abs(euler_to_rot(*rot_to_euler(R)) - R)) < 1e-12


def test_gimbal_lock_rejected():
    R = euler_to_rot(0.2, np.pi / 2, 0.1)
    with pytest.raises(DegenerateAttitudeError):
        rot_to_euler(R)


def test_kron_examples():
    assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))
    P = kron([[0, 1], [1, 0]], np.eye(3))
    assert np.array_equal(P[0:3, 3:6], np.eye(3))
    assert np.array_equal(P[3:6, 0:3], np.eye(3))
    assert np.array_equal(P[0:3, 0:3], np.zeros((3, 3)))


@given(arrays(np.float64, (2, 3), elements=st.floats(-5, 5)), arrays(np.float64, (3, 3), elements=st.floats(-5, 5)))
def test_kron_blocks(A, B):
    K = kron(A, B)
    for i in range(2):
        for j in range(3):
            assert np.array_equal(K[3 * i:3 * i + 3, 3 * j:3 * j + 3], A[i, j] * B)


def test_reorthonormalize_examples(rng):
    R = euler_to_rot(0.3, 0.2, -0.5)
    assert np.max(np.abs(reorthonormalize(R) - R)) < 1e-12
    Rp = reorthonormalize(R + 1e-6 * rng.normal(size=(3, 3)))
    assert np.max(np.abs(Rp.T @ Rp - np.eye(3))) < 1e-12
    with pytest.raises(ValueError):
        reorthonormalize(np.diag([1.0, 1.0, -1.0]))


@given(vec3)
def test_rodrigues_is_rotation_about_axis(w):
    R = rodrigues(w)
    assert is_rotation(R, 1e-10)
    assert np.allclose(R @ w, w, atol=1e-9)


@given(arrays(np.float64, 3, elements=st.floats(-2, 2)), arrays(np.float64, 3, elements=st.floats(-1, 1)))
def test_right_jacobian_matches_finite_difference(w, wd):
    h = 1e-6
    dR = (rodrigues(w + h * wd) - rodrigues(w - h * wd)) / (2 * h)
    expected = rodrigues(w) @ hat(right_jacobian(w) @ wd)
    assert np.allclose(dR, expected, atol=1e-7)


@given(arrays(np.float64, 3, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 0.1))
def test_tangent_basis_orthonormal(q):
    q = q / np.linalg.norm(q)
    t1, t2 = tangent_basis(q)
    B = np.column_stack([q, t1, t2])
    assert np.allclose(B.T @ B, np.eye(3), atol=1e-12)
