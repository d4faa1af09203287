"""Triangle meshes: validation, OBJ I/O, and a small primitive library.

The primitives (box, cylinder, chair-like compound) keep the scan simulator
asset-free; arbitrary OBJ files can be dropped in for richer noise objects.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, ParseError


@dataclass
class TriangleMesh:
    vertices: np.ndarray  # (V, 3) meters
    faces: np.ndarray     # (F, 3) vertex indices


def face_areas(mesh):
    v = mesh.vertices
    f = mesh.faces
    cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    return 0.5 * np.linalg.norm(cross, axis=1)


def validate_mesh(mesh):
    verts = np.asarray(mesh.vertices, dtype=np.float64)
    faces = np.asarray(mesh.faces)
    if verts.ndim != 2 or verts.shape[1] != 3 or verts.shape[0] == 0:
        raise InvariantViolation(f"bad vertex array shape {verts.shape}")
    if faces.ndim != 2 or faces.shape[1] != 3 or faces.shape[0] == 0:
        raise InvariantViolation(f"bad face array shape {faces.shape}")
    if faces.min() < 0 or faces.max() >= verts.shape[0]:
        raise InvariantViolation("face index out of range")
    if not np.all(np.isfinite(verts)):
        raise InvariantViolation("non-finite vertex")
    areas = face_areas(mesh)
    if np.any(areas <= 1e-12):
        raise InvariantViolation(f"degenerate face (area {areas.min():.3g})")
    return mesh


def transform_mesh(mesh, rotation=None, translation=None, scale=1.0, about=None):
    """Rigid transform + isotropic scale, optionally about a pivot point."""
    verts = np.asarray(mesh.vertices, dtype=np.float64)
    pivot = np.zeros(3) if about is None else np.asarray(about, dtype=np.float64)
    out = (verts - pivot) * scale
    if rotation is not None:
        out = out @ np.asarray(rotation).T
    out = out + pivot
    if translation is not None:
        out = out + np.asarray(translation, dtype=np.float64)
    return TriangleMesh(vertices=out, faces=np.asarray(mesh.faces).copy())


def mesh_bounds(mesh):
    v = np.asarray(mesh.vertices)
    return v.min(axis=0), v.max(axis=0)


# ---------------------------------------------------------------------------
# OBJ I/O (v and f records only; faces triangulated as fans)
# ---------------------------------------------------------------------------

def load_obj(path):
    verts = []
    faces = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                if len(parts) < 4:
                    raise ParseError(f"{path}:{lineno}: short vertex record")
                try:
                    verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: bad vertex") from exc
            elif parts[0] == "f":
                idx = []
                for token in parts[1:]:
                    head = token.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError as exc:
                        raise ParseError(f"{path}:{lineno}: bad face index") from exc
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                if len(idx) < 3:
                    raise ParseError(f"{path}:{lineno}: face with <3 vertices")
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
    if not verts or not faces:
        raise ParseError(f"{path}: no usable geometry")
    mesh = TriangleMesh(vertices=np.array(verts), faces=np.array(faces, dtype=np.int64))
    return validate_mesh(mesh)


def save_obj(mesh, path):
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


# ---------------------------------------------------------------------------
# Primitives
# ---------------------------------------------------------------------------

def box_mesh(extents=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)):
    ex, ey, ez = np.asarray(extents, dtype=np.float64) / 2.0
    cx, cy, cz = center
    verts = np.array([
        [cx - ex, cy - ey, cz - ez], [cx + ex, cy - ey, cz - ez],
        [cx + ex, cy + ey, cz - ez], [cx - ex, cy + ey, cz - ez],
        [cx - ex, cy - ey, cz + ez], [cx + ex, cy - ey, cz + ez],
        [cx + ex, cy + ey, cz + ez], [cx - ex, cy + ey, cz + ez],
    ])
    faces = np.array([
        [0, 2, 1], [0, 3, 2], [4, 5, 6], [4, 6, 7],
        [0, 1, 5], [0, 5, 4], [2, 3, 7], [2, 7, 6],
        [1, 2, 6], [1, 6, 5], [3, 0, 4], [3, 4, 7],
    ], dtype=np.int64)
    return TriangleMesh(vertices=verts, faces=faces)


def cylinder_mesh(radius=0.3, height=1.0, segments=16, center=(0.0, 0.0, 0.0)):
    ang = 2 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(ang), np.zeros(segments), radius * np.sin(ang)], axis=1)
    bottom = ring + [0, -height / 2, 0]
    top = ring + [0, height / 2, 0]
    verts = np.concatenate([bottom, top,
                            [[0, -height / 2, 0]], [[0, height / 2, 0]]]) + center
    faces = []
    bc = 2 * segments
    tc = 2 * segments + 1
    for k in range(segments):
        k2 = (k + 1) % segments
        faces.append([k, k2, segments + k])
        faces.append([k2, segments + k2, segments + k])
        faces.append([k2, k, bc])
        faces.append([segments + k, segments + k2, tc])
    return TriangleMesh(vertices=verts, faces=np.array(faces, dtype=np.int64))


def chair_mesh():
    """Chair-like compound: seat, back, four legs."""
    parts = [
        box_mesh((0.45, 0.05, 0.45), (0.0, 0.45, 0.0)),      # seat
        box_mesh((0.45, 0.45, 0.05), (0.0, 0.70, -0.20)),     # back
        box_mesh((0.05, 0.45, 0.05), (-0.18, 0.21, -0.18)),
        box_mesh((0.05, 0.45, 0.05), (0.18, 0.21, -0.18)),
        box_mesh((0.05, 0.45, 0.05), (-0.18, 0.21, 0.18)),
        box_mesh((0.05, 0.45, 0.05), (0.18, 0.21, 0.18)),
    ]
    verts = []
    faces = []
    offset = 0
    for p in parts:
        verts.append(p.vertices)
        faces.append(p.faces + offset)
        offset += p.vertices.shape[0]
    return TriangleMesh(vertices=np.concatenate(verts), faces=np.concatenate(faces))


PRIMITIVES = {"box": box_mesh, "cylinder": cylinder_mesh, "chair": chair_mesh}
