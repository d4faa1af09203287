"""Ray casting against triangle soups: brute force, BVH, and batched paths.

All three paths share one vectorized Moller-Trumbore kernel and one hit
selection rule (smallest positive distance, ties to the lowest global
triangle index), so they agree exactly — the BVH and the chunked batch
evaluator are pure accelerations.
"""

from dataclasses import dataclass

import numpy as np

_MIN_T = 1e-9
_DET_EPS = 1e-12


def _tri_intersect(origin, direction, v0, v1, v2):
    """Moller-Trumbore over a triangle array. Returns t (inf on miss)."""
    e1 = v1 - v0
    e2 = v2 - v0
    pvec = np.cross(direction, e2)
    det = np.einsum("...i,...i->...", e1, pvec)
    ok = np.abs(det) > _DET_EPS
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tvec = origin - v0
    u = np.einsum("...i,...i->...", tvec, pvec) * inv
    qvec = np.cross(tvec, e1)
    v = np.einsum("...i,...i->...", direction, qvec) * inv
    t = np.einsum("...i,...i->...", e2, qvec) * inv
    ok &= (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t > _MIN_T)
    return np.where(ok, t, np.inf)


@dataclass
class Hit:
    distance: float
    point: np.ndarray
    triangle: int  # global triangle index in the scene


class RayScene:
    """Triangle soup assembled from meshes, with a median-split BVH.

    `sources[i]` identifies which input mesh triangle i came from, so callers
    can map hits back to scene objects.
    """

    def __init__(self, meshes, leaf_size=8):
        tri_v0, tri_v1, tri_v2, sources = [], [], [], []
        for mesh_idx, mesh in enumerate(meshes):
            v = np.asarray(mesh.vertices, dtype=np.float64)
            f = np.asarray(mesh.faces)
            tri_v0.append(v[f[:, 0]])
            tri_v1.append(v[f[:, 1]])
            tri_v2.append(v[f[:, 2]])
            sources.append(np.full(f.shape[0], mesh_idx, dtype=np.int64))
        self.v0 = np.concatenate(tri_v0)
        self.v1 = np.concatenate(tri_v1)
        self.v2 = np.concatenate(tri_v2)
        self.sources = np.concatenate(sources)
        self.n_triangles = self.v0.shape[0]
        self._build(leaf_size)

    def _build(self, leaf_size):
        lo = np.minimum(np.minimum(self.v0, self.v1), self.v2)
        hi = np.maximum(np.maximum(self.v0, self.v1), self.v2)
        centers = (lo + hi) / 2.0
        self.bbox_lo = lo.min(axis=0)
        self.bbox_hi = hi.max(axis=0)

        nodes = []  # (lo, hi, left, right, start, count); leaf when count > 0
        order = np.arange(self.n_triangles)

        def build(idx):
            node_lo = lo[idx].min(axis=0)
            node_hi = hi[idx].max(axis=0)
            node_id = len(nodes)
            nodes.append([node_lo, node_hi, -1, -1, 0, 0])
            if idx.size <= leaf_size:
                nodes[node_id][4] = build.cursor
                nodes[node_id][5] = idx.size
                build.perm[build.cursor:build.cursor + idx.size] = idx
                build.cursor += idx.size
                return node_id
            axis = int(np.argmax(node_hi - node_lo))
            mid = idx[np.argsort(centers[idx, axis], kind="stable")]
            half = idx.size // 2
            left = build(mid[:half])
            right = build(mid[half:])
            nodes[node_id][2] = left
            nodes[node_id][3] = right
            return node_id

        build.perm = np.empty(self.n_triangles, dtype=np.int64)
        build.cursor = 0
        build(order)
        self.nodes = nodes
        self.perm = build.perm
        # pre-permuted triangle arrays for leaf tests
        self.p0 = self.v0[self.perm]
        self.p1 = self.v1[self.perm]
        self.p2 = self.v2[self.perm]

    def _slab(self, origin, inv_dir, node_lo, node_hi, best_t):
        t0 = (node_lo - origin) * inv_dir
        t1 = (node_hi - origin) * inv_dir
        tmin = np.minimum(t0, t1).max()
        tmax = np.maximum(t0, t1).min()
        return tmax >= max(tmin, 0.0) and tmin <= best_t

    def raycast(self, origin, direction):
        """Nearest hit along one ray via BVH traversal, or None."""
        origin = np.asarray(origin, dtype=np.float64)
        direction = np.asarray(direction, dtype=np.float64)
        # huge finite inverse avoids 0*inf=NaN in the slab test
        inv_dir = 1.0 / np.where(direction == 0.0, 1e-300, direction)
        best_t = np.inf
        best_idx = -1
        stack = [0]
        while stack:
            node = self.nodes[stack.pop()]
            if not self._slab(origin, inv_dir, node[0], node[1], best_t):
                continue
            if node[5] > 0:  # leaf
                start, count = node[4], node[5]
                t = _tri_intersect(origin, direction,
                                   self.p0[start:start + count],
                                   self.p1[start:start + count],
                                   self.p2[start:start + count])
                local = self.perm[start:start + count]
                for k in np.nonzero(np.isfinite(t))[0]:
                    tk, gk = t[k], local[k]
                    if tk < best_t or (tk == best_t and gk < best_idx):
                        best_t, best_idx = tk, int(gk)
            else:
                stack.append(node[3])
                stack.append(node[2])
        if best_idx < 0:
            return None
        return Hit(distance=float(best_t), point=origin + best_t * direction,
                   triangle=best_idx)

    def raycast_brute(self, origin, direction):
        """All-triangle scan; the oracle the BVH must match exactly."""
        origin = np.asarray(origin, dtype=np.float64)
        direction = np.asarray(direction, dtype=np.float64)
        t = _tri_intersect(origin, direction, self.v0, self.v1, self.v2)
        idx = int(np.argmin(t))
        if not np.isfinite(t[idx]):
            return None
        return Hit(distance=float(t[idx]), point=origin + t[idx] * direction,
                   triangle=idx)

    def raycast_batch(self, origins, directions, chunk_bytes=64 << 20):
        """Vectorized nearest-hit for many rays.

        Returns (t (R,), triangle (R,)) with inf / -1 for misses. Rays that
        miss the scene bounding box are skipped; per-triangle math is the
        same kernel as the scalar paths, so results match them exactly.
        """
        origins = np.asarray(origins, dtype=np.float64)
        directions = np.asarray(directions, dtype=np.float64)
        n = origins.shape[0]
        out_t = np.full(n, np.inf)
        out_idx = np.full(n, -1, dtype=np.int64)
        inv = 1.0 / np.where(directions == 0.0, 1e-300, directions)
        t0 = (self.bbox_lo - origins) * inv
        t1 = (self.bbox_hi - origins) * inv
        tmin = np.minimum(t0, t1).max(axis=1)
        tmax = np.maximum(t0, t1).min(axis=1)
        active = np.nonzero(tmax >= np.maximum(tmin, 0.0))[0]
        if active.size == 0:
            return out_t, out_idx
        rows_per_chunk = max(1, int(chunk_bytes / (self.n_triangles * 8 * 6)))
        for s in range(0, active.size, rows_per_chunk):
            rows = active[s:s + rows_per_chunk]
            t = _tri_intersect(origins[rows, None, :], directions[rows, None, :],
                               self.v0[None, :, :], self.v1[None, :, :],
                               self.v2[None, :, :])
            best = np.argmin(t, axis=1)
            bt = t[np.arange(rows.size), best]
            hit = np.isfinite(bt)
            out_t[rows[hit]] = bt[hit]
            out_idx[rows[hit]] = best[hit]
        return out_t, out_idx


def ray_cast(origin, direction, meshes):
    """Single-ray convenience entry point (builds a throwaway BVH scene)."""
    scene = meshes if isinstance(meshes, RayScene) else RayScene(meshes)
    return scene.raycast(origin, direction)
