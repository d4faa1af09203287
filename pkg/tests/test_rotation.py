import numpy as np
import pytest

from mocapkin.errors import DegenerateRotation, NotARotation
from mocapkin.nn.core import grad_check
from mocapkin.rotation import (
    IDENTITY_6D,
    geodesic_angle,
    matrix_to_rot6d,
    random_rotations,
    rot6d_backward,
    rot6d_jacobian,
    rot6d_to_matrix,
)


def test_identity_maps_to_identity():
    np.testing.assert_allclose(rot6d_to_matrix([1, 0, 0, 0, 1, 0]), np.eye(3), atol=1e-12)


def test_quarter_turn_about_z():
    mat = rot6d_to_matrix([0, 1, 0, -1, 0, 0])
    want = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    np.testing.assert_allclose(mat, want, atol=1e-12)


def test_random_inputs_give_proper_rotations():
    rng = np.random.default_rng(0)
    r6 = rng.standard_normal((1000, 6))
    mats = rot6d_to_matrix(r6)
    gram = np.einsum("nji,njk->nik", mats, mats)
    assert np.max(np.abs(gram - np.eye(3))) < 1e-9
    assert np.max(np.abs(np.linalg.det(mats) - 1.0)) < 1e-9


def test_matrix_round_trip():
    np.testing.assert_allclose(matrix_to_rot6d(np.eye(3)), IDENTITY_6D, atol=0)
    rng = np.random.default_rng(1)
    mats = random_rotations(rng, 1000)
    back = rot6d_to_matrix(matrix_to_rot6d(mats))
    assert np.max(np.abs(back - mats)) < 1e-9


def test_degenerate_inputs_raise():
    with pytest.raises(DegenerateRotation):
        rot6d_to_matrix([0, 0, 0, 0, 1, 0])
    with pytest.raises(DegenerateRotation):
        rot6d_to_matrix([1, 0, 0, 2, 0, 0])  # parallel vectors
    with pytest.raises(NotARotation):
        matrix_to_rot6d(np.eye(3) * 2.0)
    flipped = np.diag([1.0, 1.0, -1.0])  # orthonormal but improper
    with pytest.raises(NotARotation):
        matrix_to_rot6d(flipped)


def test_backward_matches_finite_differences():
    rng = np.random.default_rng(2)
    for _ in range(10):
        proj = rng.standard_normal((3, 3))

        def fn(inputs):
            (r6,) = inputs
            mat = rot6d_to_matrix(r6)
            loss = float(np.sum(mat * proj))
            return loss, [rot6d_backward(r6, proj)]

        err = grad_check(fn, [rng.standard_normal(6)])
        assert err < 1e-6


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(3)
    r6 = rng.standard_normal((5, 6))
    _, jac = rot6d_jacobian(r6)
    h = 1e-6
    for m in range(6):
        delta = np.zeros(6)
        delta[m] = h
        numeric = (rot6d_to_matrix(r6 + delta) - rot6d_to_matrix(r6 - delta)) / (2 * h)
        assert np.max(np.abs(jac[:, m] - numeric)) < 1e-7


def test_geodesic_angle_quarter_turn():
    mat = rot6d_to_matrix([0, 1, 0, -1, 0, 0])
    assert abs(np.degrees(geodesic_angle(np.eye(3), mat)) - 90.0) < 1e-9


def test_geodesic_triangle_inequality():
    rng = np.random.default_rng(4)
    rot_a = random_rotations(rng, 200)
    rot_b = random_rotations(rng, 200)
    eye = np.broadcast_to(np.eye(3), (200, 3, 3))
    combined = geodesic_angle(np.einsum("nab,nbc->nac", rot_a, rot_b), eye)
    separate = geodesic_angle(rot_a, eye) + geodesic_angle(rot_b, eye)
    assert np.all(combined <= separate + 1e-9)
