"""Parametric 24-joint body: shape blending, forward kinematics, skinning.

The template stores a rest skeleton, per-coefficient shape offsets for joints
and vertices, skinning weights, and a joint regressor. Forward kinematics
composes parent-to-child rigid transforms down the tree; the root rotates
about the shaped root joint and the global translation is applied afterwards.

All heavy entry points are batched over arbitrary leading dimensions and have
hand-derived reverse-mode companions (`fk_backward`) used by the trainable
solver; `fk_jacobian` provides the forward-mode Jacobian for the damped
least-squares fitter.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidTemplate, InvariantViolation, ParseError
from .rotation import rot6d_backward, rot6d_jacobian, rot6d_to_matrix

NUM_JOINTS = 24
NUM_SHAPE_COEFFS = 10

# Standard 24-joint humanoid hierarchy (topologically ordered, root = 0).
PARENTS = np.array(
    [0, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21],
    dtype=np.int64,
)


@dataclass(frozen=True)
class BodyTemplate:
    """Rest-pose body definition. Arrays are float64, immutable by convention.

    faces is an artifact extension for ray casting the skinned surface; it is
    not part of the .bmt serialization and may be None for loaded models.
    """

    rest_joints: np.ndarray        # (24, 3) meters
    parent: np.ndarray             # (24,) indices, parent[0] == 0
    shape_basis_joints: np.ndarray  # (10, 24, 3)
    template_vertices: np.ndarray  # (NV, 3)
    shape_basis_vertices: np.ndarray  # (10, NV, 3)
    skin_weights: np.ndarray       # (NV, 24), rows sum to 1
    joint_regressor: np.ndarray    # (24, NV), rows sum to 1
    faces: np.ndarray | None = field(default=None)

    @property
    def num_vertices(self):
        return self.template_vertices.shape[0]


@dataclass
class Pose:
    """Per-joint 6D rotations, root first; shape (24, 6)."""

    rotations: np.ndarray

    @classmethod
    def identity(cls):
        r6 = np.tile(np.array([1.0, 0, 0, 0, 1.0, 0]), (NUM_JOINTS, 1))
        return cls(rotations=r6)


@dataclass
class Shape:
    """10 unitless blend coefficients."""

    coefficients: np.ndarray

    @classmethod
    def zero(cls):
        return cls(coefficients=np.zeros(NUM_SHAPE_COEFFS))


@dataclass
class Translation:
    """Global translation in meters."""

    t: np.ndarray

    @classmethod
    def zero(cls):
        return cls(t=np.zeros(3))


@dataclass
class MotionFrame:
    """One frame of ground-truth or solved motion."""

    pose: Pose
    shape: Shape
    trans: Translation
    joints: np.ndarray | None = None    # (24, 3) global
    vertices: np.ndarray | None = None  # (NV, 3) global


def _pose_array(pose):
    arr = pose.rotations if isinstance(pose, Pose) else pose
    return np.asarray(arr, dtype=np.float64)


def _shape_array(shape):
    arr = shape.coefficients if isinstance(shape, Shape) else shape
    return np.asarray(arr, dtype=np.float64)


def _trans_array(trans):
    arr = trans.t if isinstance(trans, Translation) else trans
    return np.asarray(arr, dtype=np.float64)


def validate_template(tpl):
    """Raise InvalidTemplate/InvariantViolation on malformed templates."""
    nv = tpl.template_vertices.shape[0]
    if nv <= 0:
        raise InvalidTemplate("template has no vertices")
    shapes = {
        "rest_joints": (NUM_JOINTS, 3),
        "parent": (NUM_JOINTS,),
        "shape_basis_joints": (NUM_SHAPE_COEFFS, NUM_JOINTS, 3),
        "template_vertices": (nv, 3),
        "shape_basis_vertices": (NUM_SHAPE_COEFFS, nv, 3),
        "skin_weights": (nv, NUM_JOINTS),
        "joint_regressor": (NUM_JOINTS, nv),
    }
    for name, want in shapes.items():
        got = getattr(tpl, name).shape
        if got != want:
            raise InvalidTemplate(f"{name}: expected shape {want}, got {got}")
    par = tpl.parent
    if par[0] != 0:
        raise InvalidTemplate("joint 0 must be the root (parent[0] == 0)")
    if np.any(par[1:] >= np.arange(1, NUM_JOINTS)):
        raise InvalidTemplate("parents must be topologically ordered (parent[j] < j)")
    for name in ("rest_joints", "shape_basis_joints", "template_vertices",
                 "shape_basis_vertices", "skin_weights", "joint_regressor"):
        if not np.all(np.isfinite(getattr(tpl, name))):
            raise InvariantViolation(f"{name} contains non-finite values")
    if np.any(tpl.skin_weights < -1e-9):
        raise InvariantViolation("skin_weights must be nonnegative")
    if np.any(tpl.joint_regressor < -1e-9):
        raise InvariantViolation("joint_regressor must be nonnegative")
    wsum = tpl.skin_weights.sum(axis=1)
    if np.max(np.abs(wsum - 1.0)) > 1e-6:
        bad = int(np.argmax(np.abs(wsum - 1.0)))
        raise InvariantViolation(f"skin_weights row {bad} sums to {wsum[bad]:.6g}")
    rsum = tpl.joint_regressor.sum(axis=1)
    if np.max(np.abs(rsum - 1.0)) > 1e-6:
        bad = int(np.argmax(np.abs(rsum - 1.0)))
        raise InvariantViolation(f"joint_regressor row {bad} sums to {rsum[bad]:.6g}")
    return tpl


def shaped_rest_joints(tpl, beta):
    """rest_joints + sum_k beta_k * shape_basis_joints[k]; batched over beta."""
    beta = np.asarray(beta, dtype=np.float64)
    return tpl.rest_joints + np.einsum("...k,kjc->...jc", beta, tpl.shape_basis_joints)


def shaped_vertices(tpl, beta):
    beta = np.asarray(beta, dtype=np.float64)
    return tpl.template_vertices + np.einsum("...k,kvc->...vc", beta, tpl.shape_basis_vertices)


def _fk_transforms(tpl, rot_mats, beta, trans):
    """Global joint rotations A (..., 24, 3, 3) and positions p (..., 24, 3)."""
    rest = shaped_rest_joints(tpl, beta)
    batch = rot_mats.shape[:-3]
    glob_rot = np.empty(batch + (NUM_JOINTS, 3, 3))
    glob_pos = np.empty(batch + (NUM_JOINTS, 3))
    glob_rot[..., 0, :, :] = rot_mats[..., 0, :, :]
    glob_pos[..., 0, :] = rest[..., 0, :] + trans
    for j in range(1, NUM_JOINTS):
        par = tpl.parent[j]
        rot_par = glob_rot[..., par, :, :]
        offset = rest[..., j, :] - rest[..., par, :]
        glob_rot[..., j, :, :] = rot_par @ rot_mats[..., j, :, :]
        glob_pos[..., j, :] = glob_pos[..., par, :] + np.einsum(
            "...ab,...b->...a", rot_par, offset
        )
    return glob_rot, glob_pos, rest


def fk_forward(tpl, pose_r6, beta, trans, with_vertices=False):
    """Batched FK, optionally with linear blend skinning.

    pose_r6 (..., 24, 6), beta (..., 10), trans (..., 3). Returns
    (joints, vertices, cache); vertices is None unless requested. The cache
    feeds fk_backward.
    """
    pose_r6 = np.asarray(pose_r6, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    trans = np.asarray(trans, dtype=np.float64)
    rot_mats = rot6d_to_matrix(pose_r6)
    glob_rot, glob_pos, rest = _fk_transforms(tpl, rot_mats, beta, trans)
    vertices = None
    verts_shaped = None
    if with_vertices:
        verts_shaped = shaped_vertices(tpl, beta)
        weights = tpl.skin_weights
        # Per-vertex blended affine transform: rot_v x + (p - A r) blended.
        vert_rot = np.einsum("vj,...jab->...vab", weights, glob_rot)
        joint_off = glob_pos - np.einsum("...jab,...jb->...ja", glob_rot, rest)
        vert_off = np.einsum("vj,...ja->...va", weights, joint_off)
        vertices = np.einsum("...vab,...vb->...va", vert_rot, verts_shaped) + vert_off
    cache = {
        "tpl": tpl,
        "pose_r6": pose_r6,
        "rot_mats": rot_mats,
        "glob_rot": glob_rot,
        "glob_pos": glob_pos,
        "rest": rest,
        "verts_shaped": verts_shaped,
    }
    return glob_pos, vertices, cache


def fk_backward(cache, grad_joints=None, grad_vertices=None):
    """Reverse-mode through skinning + FK.

    Returns (grad_pose_r6, grad_beta, grad_trans) matching fk_forward inputs.
    """
    tpl = cache["tpl"]
    rot_mats = cache["rot_mats"]
    glob_rot = cache["glob_rot"]
    glob_pos = cache["glob_pos"]
    rest = cache["rest"]
    batch = glob_pos.shape[:-2]

    g_rot = np.zeros(batch + (NUM_JOINTS, 3, 3))
    g_pos = np.zeros(batch + (NUM_JOINTS, 3))
    g_rest = np.zeros(batch + (NUM_JOINTS, 3))
    g_beta = np.zeros(batch + (NUM_SHAPE_COEFFS,))

    if grad_joints is not None:
        g_pos += np.asarray(grad_joints, dtype=np.float64)

    if grad_vertices is not None:
        gv = np.asarray(grad_vertices, dtype=np.float64)
        weights = tpl.skin_weights
        verts_shaped = cache["verts_shaped"]
        # world_v = sum_j w_vj (A_j (v~ - r_j) + p_j)
        q = np.einsum("vj,...va->...ja", weights, gv)
        g_pos += q
        g_rot += np.einsum("vj,...va,...vb->...jab", weights, gv, verts_shaped)
        g_rot -= np.einsum("...ja,...jb->...jab", q, rest)
        g_vshaped = np.einsum("vj,...jab,...va->...vb", weights, glob_rot, gv)
        g_rest -= np.einsum("...jab,...ja->...jb", glob_rot, q)
        g_beta += np.einsum("kvb,...vb->...k", tpl.shape_basis_vertices, g_vshaped)

    g_local = np.zeros(batch + (NUM_JOINTS, 3, 3))
    for j in range(NUM_JOINTS - 1, 0, -1):
        par = tpl.parent[j]
        rot_par = glob_rot[..., par, :, :]
        offset = rest[..., j, :] - rest[..., par, :]
        gaj = g_rot[..., j, :, :]
        gpj = g_pos[..., j, :]
        # A_j = A_par R_j
        g_rot[..., par, :, :] += np.einsum("...ab,...cb->...ac", gaj, rot_mats[..., j, :, :])
        g_local[..., j, :, :] = np.einsum("...ba,...bc->...ac", rot_par, gaj)
        # p_j = p_par + A_par (r_j - r_par)
        g_pos[..., par, :] += gpj
        g_rot[..., par, :, :] += np.einsum("...a,...b->...ab", gpj, offset)
        g_off = np.einsum("...ba,...b->...a", rot_par, gpj)
        g_rest[..., j, :] += g_off
        g_rest[..., par, :] -= g_off
    g_local[..., 0, :, :] = g_rot[..., 0, :, :]
    g_trans = g_pos[..., 0, :].copy()
    g_rest[..., 0, :] += g_pos[..., 0, :]

    g_beta += np.einsum("kjb,...jb->...k", tpl.shape_basis_joints, g_rest)
    g_pose = rot6d_backward(cache["pose_r6"], g_local)
    return g_pose, g_beta, g_trans


def forward_kinematics(template, pose, shape, trans):
    """Joint positions (24, 3) for a single frame."""
    validate_template(template)
    joints, _, _ = fk_forward(
        template, _pose_array(pose), _shape_array(shape), _trans_array(trans)
    )
    return joints


def skin_mesh(template, pose, shape, trans):
    """Linear-blend-skinned vertices (NV, 3) for a single frame."""
    validate_template(template)
    _, vertices, _ = fk_forward(
        template,
        _pose_array(pose),
        _shape_array(shape),
        _trans_array(trans),
        with_vertices=True,
    )
    return vertices


def regress_joints(template, vertices):
    """joint_regressor applied to vertices; batched."""
    return np.einsum("jv,...vc->...jc", template.joint_regressor, vertices)


def _descendants(parent):
    children = [[] for _ in range(NUM_JOINTS)]
    for j in range(1, NUM_JOINTS):
        children[parent[j]].append(j)
    desc = [[] for _ in range(NUM_JOINTS)]
    for j in range(NUM_JOINTS - 1, -1, -1):
        for c in children[j]:
            desc[j].extend([c] + desc[c])
    return desc


def fk_jacobian(template, pose_r6, beta, trans):
    """Analytic FK Jacobian for one frame.

    Returns (joints, d_pose, d_beta) with d_pose (24, 3, 24, 6) and
    d_beta (24, 3, 10); the translation Jacobian is the identity on every
    joint and is left to the caller.
    """
    pose_r6 = np.asarray(pose_r6, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    trans = np.asarray(trans, dtype=np.float64)
    rot_mats, rot_jac = rot6d_jacobian(pose_r6)  # (24,3,3), (24,6,3,3)
    glob_rot, glob_pos, _ = _fk_transforms(template, rot_mats, beta, trans)
    desc = _descendants(template.parent)

    d_pose = np.zeros((NUM_JOINTS, 3, NUM_JOINTS, 6))
    for j in range(NUM_JOINTS):
        rows = desc[j]
        if not rows:
            continue
        rot_par = np.eye(3) if j == 0 else glob_rot[template.parent[j]]
        rel = glob_pos[rows] - glob_pos[j]  # (D, 3)
        local = rel @ glob_rot[j]  # rows of A_j^T (p_i - p_j)
        for m in range(6):
            eff = rot_par @ rot_jac[j, m]  # d p_i = A_par dR_j A_j^T (p_i - p_j)
            d_pose[rows, :, j, m] = local @ eff.T

    basis = template.shape_basis_joints  # (10, 24, 3)
    d_beta = np.zeros((NUM_JOINTS, 3, NUM_SHAPE_COEFFS))
    d_beta[0] = basis[:, 0, :].T
    for j in range(1, NUM_JOINTS):
        par = template.parent[j]
        step = (basis[:, j, :] - basis[:, par, :]) @ glob_rot[par].T  # (10, 3)
        d_beta[j] = d_beta[par] + step.T
    return glob_pos, d_pose, d_beta


# ---------------------------------------------------------------------------
# Synthetic template
# ---------------------------------------------------------------------------

_REST_JOINTS = np.array([
    [0.000, 0.95, 0.00],   # pelvis
    [0.090, 0.91, 0.00],   # left hip
    [-0.090, 0.91, 0.00],  # right hip
    [0.000, 1.05, 0.00],   # spine1
    [0.100, 0.50, 0.00],   # left knee
    [-0.100, 0.50, 0.00],  # right knee
    [0.000, 1.15, 0.00],   # spine2
    [0.105, 0.09, 0.00],   # left ankle
    [-0.105, 0.09, 0.00],  # right ankle
    [0.000, 1.25, 0.00],   # spine3
    [0.110, 0.02, 0.12],   # left foot
    [-0.110, 0.02, 0.12],  # right foot
    [0.000, 1.40, 0.00],   # neck
    [0.060, 1.33, 0.00],   # left collar
    [-0.060, 1.33, 0.00],  # right collar
    [0.000, 1.55, 0.00],   # head
    [0.170, 1.37, 0.00],   # left shoulder
    [-0.170, 1.37, 0.00],  # right shoulder
    [0.450, 1.37, 0.00],   # left elbow
    [-0.450, 1.37, 0.00],  # right elbow
    [0.700, 1.37, 0.00],   # left wrist
    [-0.700, 1.37, 0.00],  # right wrist
    [0.780, 1.37, 0.00],   # left hand
    [-0.780, 1.37, 0.00],  # right hand
])

_RING_RADII = np.array([
    0.12, 0.09, 0.09, 0.11, 0.06, 0.06, 0.11, 0.045, 0.045, 0.10, 0.04, 0.04,
    0.05, 0.06, 0.06, 0.09, 0.05, 0.05, 0.04, 0.04, 0.035, 0.035, 0.03, 0.03,
])

_RING_SIDES = 8
_LEAF_JOINTS = (10, 11, 15, 22, 23)


def _ring_frame(axis):
    axis = axis / np.linalg.norm(axis)
    helper = np.array([0.0, 1.0, 0.0])
    if abs(axis @ helper) > 0.9:
        helper = np.array([1.0, 0.0, 0.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return e1, e2


def _ring(center, axis, radius):
    e1, e2 = _ring_frame(axis)
    ang = 2.0 * np.pi * np.arange(_RING_SIDES) / _RING_SIDES
    return center + radius * (np.cos(ang)[:, None] * e1 + np.sin(ang)[:, None] * e2)


def synthetic_template(seed):
    """Deterministic capsule-style humanoid; stand-in for licensed models.

    Joint rings of 8 vertices are centered exactly on each joint and skinned
    rigidly to it, so the regressor reproduces FK joints at any pose. The
    seed perturbs proportions slightly and fixes the shape basis.
    """
    rng = np.random.default_rng(seed)
    scale = 1.0 + 0.05 * rng.uniform(-1.0, 1.0)
    rest = _REST_JOINTS * scale
    rest = rest + 0.004 * rng.standard_normal(rest.shape)
    # keep left/right symmetric in x by mirroring the left side onto the right
    for left, right in ((1, 2), (4, 5), (7, 8), (10, 11), (13, 14), (16, 17),
                        (18, 19), (20, 21), (22, 23)):
        mirrored = rest[left].copy()
        mirrored[0] = -mirrored[0]
        rest[right] = mirrored

    verts = []
    weights = []
    mid_info = []  # (joint a, joint b, fraction) per vertex, for the shape basis
    ring_start = np.zeros(NUM_JOINTS, dtype=np.int64)
    for j in range(NUM_JOINTS):
        axis = rest[j] - rest[PARENTS[j]] if j > 0 else np.array([0.0, 1.0, 0.0])
        if np.linalg.norm(axis) < 1e-9:
            axis = np.array([0.0, 1.0, 0.0])
        ring_start[j] = len(verts)
        for v in _ring(rest[j], axis, _RING_RADII[j] * scale):
            verts.append(v)
            w = np.zeros(NUM_JOINTS)
            w[j] = 1.0
            weights.append(w)
            mid_info.append((j, j, 1.0))  # ring vertices follow their joint

    faces = []
    for j in range(1, NUM_JOINTS):
        par = PARENTS[j]
        axis = rest[j] - rest[par]
        bone_rings = [list(range(ring_start[par], ring_start[par] + _RING_SIDES))]
        for frac in (1.0 / 3.0, 2.0 / 3.0):
            center = rest[par] + frac * axis
            radius = ((1 - frac) * _RING_RADII[par] + frac * _RING_RADII[j]) * scale
            idx0 = len(verts)
            for v in _ring(center, axis, radius):
                verts.append(v)
                w = np.zeros(NUM_JOINTS)
                w[par] = 1.0 - frac
                w[j] = frac
                weights.append(w)
                mid_info.append((par, j, frac))
            bone_rings.append(list(range(idx0, idx0 + _RING_SIDES)))
        bone_rings.append(list(range(ring_start[j], ring_start[j] + _RING_SIDES)))
        for ra, rb in zip(bone_rings[:-1], bone_rings[1:]):
            for k in range(_RING_SIDES):
                k2 = (k + 1) % _RING_SIDES
                faces.append((ra[k], ra[k2], rb[k]))
                faces.append((ra[k2], rb[k2], rb[k]))

    for j in _LEAF_JOINTS:
        axis = rest[j] - rest[PARENTS[j]]
        tip = rest[j] + 0.6 * _RING_RADII[j] * scale * axis / np.linalg.norm(axis)
        tip_idx = len(verts)
        verts.append(tip)
        w = np.zeros(NUM_JOINTS)
        w[j] = 1.0
        weights.append(w)
        mid_info.append((j, j, 1.0))
        ring = list(range(ring_start[j], ring_start[j] + _RING_SIDES))
        for k in range(_RING_SIDES):
            faces.append((ring[k], ring[(k + 1) % _RING_SIDES], tip_idx))

    verts = np.array(verts)
    weights = np.array(weights)
    faces = np.array(faces, dtype=np.int64)
    nv = verts.shape[0]

    regressor = np.zeros((NUM_JOINTS, nv))
    for j in range(NUM_JOINTS):
        regressor[j, ring_start[j]:ring_start[j] + _RING_SIDES] = 1.0 / _RING_SIDES

    # Shape basis: coefficient 0 scales the skeleton about the pelvis,
    # coefficient 1 lengthens limbs, the rest are small seeded smooth offsets.
    basis_j = np.zeros((NUM_SHAPE_COEFFS, NUM_JOINTS, 3))
    basis_j[0] = 0.03 * (rest - rest[0])
    limb = np.zeros(NUM_JOINTS)
    for j in (4, 5, 7, 8, 10, 11, 18, 19, 20, 21, 22, 23):
        limb[j] = 1.0
    for j in range(1, NUM_JOINTS):
        par = PARENTS[j]
        if limb[j]:
            basis_j[1, j] = basis_j[1, par] + 0.04 * (rest[j] - rest[par])
        else:
            basis_j[1, j] = basis_j[1, par]
    basis_j[2:] = 0.01 * rng.standard_normal((NUM_SHAPE_COEFFS - 2, NUM_JOINTS, 3))

    # Radial fattening per coefficient keeps the ring means on the joints.
    radial_gain = np.zeros(NUM_SHAPE_COEFFS)
    radial_gain[0] = 0.02
    radial_gain[2] = 0.03
    basis_v = np.zeros((NUM_SHAPE_COEFFS, nv, 3))
    for v in range(nv):
        ja, jb, frac = mid_info[v]
        anchor = (1 - frac) * rest[ja] + frac * rest[jb]
        interp = (1 - frac) * basis_j[:, ja, :] + frac * basis_j[:, jb, :]
        basis_v[:, v, :] = interp + radial_gain[:, None] * (verts[v] - anchor)

    tpl = BodyTemplate(
        rest_joints=rest,
        parent=PARENTS.copy(),
        shape_basis_joints=basis_j,
        template_vertices=verts,
        shape_basis_vertices=basis_v,
        skin_weights=weights,
        joint_regressor=regressor,
        faces=faces,
    )
    return validate_template(tpl)


# ---------------------------------------------------------------------------
# .bmt model file format
# ---------------------------------------------------------------------------

_BMT_MAGIC = b"BMT1"


def save_model(tpl, path):
    """Write the template in the .bmt binary format (faces are not stored)."""
    validate_template(tpl)
    nv = tpl.num_vertices
    with open(path, "wb") as fh:
        fh.write(_BMT_MAGIC)
        fh.write(struct.pack("<I", nv))
        fh.write(tpl.rest_joints.astype("<f4").tobytes())
        fh.write(tpl.parent.astype("<u4").tobytes())
        fh.write(tpl.shape_basis_joints.astype("<f4").tobytes())
        fh.write(tpl.template_vertices.astype("<f4").tobytes())
        fh.write(tpl.shape_basis_vertices.astype("<f4").tobytes())
        fh.write(tpl.skin_weights.astype("<f4").tobytes())
        fh.write(tpl.joint_regressor.astype("<f4").tobytes())


def load_model(path):
    """Read a .bmt file; raises ParseError / InvariantViolation."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 or blob[:4] != _BMT_MAGIC:
        raise ParseError(f"{path}: missing BMT1 magic")
    (nv,) = struct.unpack_from("<I", blob, 4)
    off = 8

    def take(count, dtype):
        nonlocal off
        width = np.dtype(dtype).itemsize
        end = off + count * width
        if end > len(blob):
            raise ParseError(f"{path}: truncated file")
        arr = np.frombuffer(blob, dtype=dtype, count=count, offset=off)
        off = end
        return arr

    rest = take(NUM_JOINTS * 3, "<f4").reshape(NUM_JOINTS, 3).astype(np.float64)
    parent = take(NUM_JOINTS, "<u4").astype(np.int64)
    basis_j = take(NUM_SHAPE_COEFFS * NUM_JOINTS * 3, "<f4").reshape(
        NUM_SHAPE_COEFFS, NUM_JOINTS, 3).astype(np.float64)
    verts = take(nv * 3, "<f4").reshape(nv, 3).astype(np.float64)
    basis_v = take(NUM_SHAPE_COEFFS * nv * 3, "<f4").reshape(
        NUM_SHAPE_COEFFS, nv, 3).astype(np.float64)
    weights = take(nv * NUM_JOINTS, "<f4").reshape(nv, NUM_JOINTS).astype(np.float64)
    regressor = take(NUM_JOINTS * nv, "<f4").reshape(NUM_JOINTS, nv).astype(np.float64)
    if off != len(blob):
        raise ParseError(f"{path}: {len(blob) - off} trailing bytes")
    tpl = BodyTemplate(
        rest_joints=rest,
        parent=parent,
        shape_basis_joints=basis_j,
        template_vertices=verts,
        shape_basis_vertices=basis_v,
        skin_weights=weights,
        joint_regressor=regressor,
    )
    return validate_template(tpl)
