"""Continuous 6D rotation representation and its derivatives.

A rotation is encoded as two 3-vectors (a, b) packed into 6 reals. The matrix
is recovered by Gram-Schmidt: c1 = a/|a|, c2 = normalized rejection of b from
c1, c3 = c1 x c2, with (c1, c2, c3) the matrix columns. The representation is
continuous in the matrix, which is why the networks regress it directly.

All functions accept arbitrary leading batch dimensions.
"""

import numpy as np

from .errors import DegenerateRotation, NotARotation

IDENTITY_6D = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])

_NORM_EPS = 1e-8


def rot6d_to_matrix(r6):
    """Map (..., 6) arrays to (..., 3, 3) rotation matrices.

    Raises DegenerateRotation if the first vector or the rejection of the
    second vector has norm <= 1e-8 anywhere in the batch.
    """
    r6 = np.asarray(r6, dtype=np.float64)
    if r6.shape[-1] != 6:
        raise DegenerateRotation(f"expected trailing dim 6, got {r6.shape}")
    a = r6[..., 0:3]
    b = r6[..., 3:6]
    na = np.linalg.norm(a, axis=-1, keepdims=True)
    if np.any(na <= _NORM_EPS) or not np.all(np.isfinite(r6)):
        raise DegenerateRotation("first 3-vector has near-zero norm")
    c1 = a / na
    w = b - np.sum(c1 * b, axis=-1, keepdims=True) * c1
    nw = np.linalg.norm(w, axis=-1, keepdims=True)
    if np.any(nw <= _NORM_EPS):
        raise DegenerateRotation("second 3-vector is parallel to the first")
    c2 = w / nw
    c3 = np.cross(c1, c2)
    return np.stack([c1, c2, c3], axis=-1)


def matrix_to_rot6d(mat):
    """Inverse of rot6d_to_matrix: keep the first two matrix columns."""
    mat = np.asarray(mat, dtype=np.float64)
    if mat.shape[-2:] != (3, 3):
        raise NotARotation(f"expected (..., 3, 3), got {mat.shape}")
    gram = np.einsum("...ji,...jk->...ik", mat, mat)
    eye = np.eye(3)
    if np.max(np.abs(gram - eye)) > 1e-5 or np.any(np.linalg.det(mat) < 0.0):
        raise NotARotation("matrix is not a proper rotation within 1e-5")
    return np.concatenate([mat[..., :, 0], mat[..., :, 1]], axis=-1)


def rot6d_backward(r6, grad_mat):
    """VJP of rot6d_to_matrix: (..., 6), (..., 3, 3) -> (..., 6).

    Hand-derived adjoint of the Gram-Schmidt construction; verified against
    central finite differences in the test suite.
    """
    r6 = np.asarray(r6, dtype=np.float64)
    grad_mat = np.asarray(grad_mat, dtype=np.float64)
    a = r6[..., 0:3]
    b = r6[..., 3:6]
    na = np.linalg.norm(a, axis=-1, keepdims=True)
    c1 = a / na
    dot_c1b = np.sum(c1 * b, axis=-1, keepdims=True)
    w = b - dot_c1b * c1
    nw = np.linalg.norm(w, axis=-1, keepdims=True)
    c2 = w / nw

    g1 = grad_mat[..., :, 0]
    g2 = grad_mat[..., :, 1]
    g3 = grad_mat[..., :, 2]

    # c3 = c1 x c2 routes its adjoint onto both factors.
    gc1 = g1 + np.cross(c2, g3)
    gc2 = g2 + np.cross(g3, c1)

    # c2 = w / |w|
    gw = (gc2 - np.sum(gc2 * c2, axis=-1, keepdims=True) * c2) / nw

    # w = b - (c1.b) c1
    gb = gw - np.sum(gw * c1, axis=-1, keepdims=True) * c1
    gc1 = gc1 - np.sum(gw * c1, axis=-1, keepdims=True) * b - dot_c1b * gw

    # c1 = a / |a|
    ga = (gc1 - np.sum(gc1 * c1, axis=-1, keepdims=True) * c1) / na
    return np.concatenate([ga, gb], axis=-1)


def rot6d_jacobian(r6):
    """Forward-mode derivative: returns (R, dR) with dR shape (..., 6, 3, 3).

    dR[..., m, :, :] is the derivative of the matrix w.r.t. r6[..., m].
    """
    r6 = np.asarray(r6, dtype=np.float64)
    a = r6[..., 0:3]
    b = r6[..., 3:6]
    na = np.linalg.norm(a, axis=-1, keepdims=True)
    c1 = a / na
    dot_c1b = np.sum(c1 * b, axis=-1, keepdims=True)
    w = b - dot_c1b * c1
    nw = np.linalg.norm(w, axis=-1, keepdims=True)
    c2 = w / nw
    c3 = np.cross(c1, c2)
    mat = np.stack([c1, c2, c3], axis=-1)

    batch = r6.shape[:-1]
    da = np.zeros(batch + (6, 3))
    db = np.zeros(batch + (6, 3))
    for m in range(3):
        da[..., m, m] = 1.0
        db[..., 3 + m, m] = 1.0

    c1e = c1[..., None, :]
    c2e = c2[..., None, :]
    be = b[..., None, :]
    dc1 = (da - np.sum(da * c1e, axis=-1, keepdims=True) * c1e) / na[..., None, :]
    dw = (
        db
        - (np.sum(dc1 * be, axis=-1, keepdims=True) + np.sum(c1e * db, axis=-1, keepdims=True)) * c1e
        - dot_c1b[..., None, :] * dc1
    )
    dc2 = (dw - np.sum(dw * c2e, axis=-1, keepdims=True) * c2e) / nw[..., None, :]
    dc3 = np.cross(dc1, c2e) + np.cross(c1e, dc2)
    dmat = np.stack([dc1, dc2, dc3], axis=-1)
    return mat, dmat


def geodesic_angle(rot_a, rot_b):
    """Geodesic angle in radians between rotation matrices, batched."""
    rel_trace = np.einsum("...ij,...ij->...", rot_a, rot_b)
    cos = np.clip((rel_trace - 1.0) / 2.0, -1.0, 1.0)
    return np.arccos(cos)


def axis_angle_to_matrix(axis, angle):
    """Rodrigues rotation; axis (3,) need not be normalized unless zero."""
    axis = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(axis)
    if norm < 1e-12:
        return np.eye(3)
    x, y, z = axis / norm
    c, s = np.cos(angle), np.sin(angle)
    cc = 1.0 - c
    return np.array([
        [c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s],
        [y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s],
        [z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc],
    ])


def random_rotations(rng, n):
    """n uniform-ish random rotation matrices from QR of Gaussian samples."""
    mats = np.empty((n, 3, 3))
    for i in range(n):
        q, r = np.linalg.qr(rng.standard_normal((3, 3)))
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 2] = -q[:, 2]
        mats[i] = q
    return mats
