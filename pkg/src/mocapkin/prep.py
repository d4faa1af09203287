"""Deterministic point-cloud preprocessing.

Covers resampling to a fixed point count by farthest point sampling, the
frame-wise / sequence-wise normalization pair, centroid trajectories,
offset and velocity ground truth, and slicing sequences into training
windows. Everything is a pure function of (input, seed).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput, SequenceTooShort, ShapeMismatch, WindowTooShort

DEFAULT_POINTS = 256
DEFAULT_WINDOW = 32
DEFAULT_FPS = 10.0  # sensor frame rate, Hz


@dataclass
class RawFrame:
    points: np.ndarray        # (M, 3) meters, M >= 1
    timestamp: float = 0.0


@dataclass
class PreppedFrame:
    points: np.ndarray        # (N, 3) centered positions
    centroid: np.ndarray      # (3,) mean of the resampled cloud
    indices: np.ndarray       # (N,) resample indices into the raw frame


@dataclass
class WindowGT:
    poses: np.ndarray         # (L, 24, 6)
    shapes: np.ndarray        # (L, 10)
    trans: np.ndarray         # (L, 3)
    joints: np.ndarray        # (L, 24, 3) global


@dataclass
class SequenceWindow:
    frames: list              # L PreppedFrames
    trajectory: np.ndarray    # (L, 3), trajectory[0] == 0
    gt: WindowGT | None = None
    labels: list | None = None  # per frame (N,) provenance ids, optional


@dataclass
class ScanSequence:
    frames: list              # RawFrames
    fps: float = DEFAULT_FPS
    gt: list | None = None    # MotionFrames, parallel to frames
    labels: list | None = None  # per frame (M,) int provenance, optional

    def __len__(self):
        return len(self.frames)


@dataclass
class VelocityField:
    joint_vel: np.ndarray     # (24, L, 3) displacement per frame interval
    trans_vel: np.ndarray     # (L, 3)


def fps_ordering(points, seed=0):
    """Greedy farthest-point ordering of all M points.

    The first index is the lexicographic (x, y, z) minimum; the seed only
    breaks exact coordinate ties. Subsequent picks maximize distance to the
    selected set, ties to the lowest index.
    """
    points = np.asarray(points, dtype=np.float64)
    m = points.shape[0]
    if m == 0:
        raise EmptyInput("cannot sample from an empty point set")
    order = np.lexsort((points[:, 2], points[:, 1], points[:, 0]))
    first = order[0]
    ties = np.nonzero(np.all(points == points[first], axis=1))[0]
    if ties.size > 1:
        first = int(np.random.default_rng(seed).choice(ties))
    selected = np.empty(m, dtype=np.int64)
    selected[0] = first
    dist = np.linalg.norm(points - points[first], axis=1)
    dist[first] = -1.0
    for i in range(1, m):
        nxt = int(np.argmax(dist))
        selected[i] = nxt
        dist = np.minimum(dist, np.linalg.norm(points - points[nxt], axis=1))
        dist[nxt] = -1.0
    return selected


def farthest_point_sample(points, n, seed=0):
    """n resample indices; distinct when M >= n, cycling the ordering when
    M < n."""
    if n < 1:
        raise EmptyInput("need at least one sample")
    order = fps_ordering(points, seed=seed)
    m = order.shape[0]
    if n <= m:
        return order[:n].copy()
    reps = int(np.ceil(n / m))
    return np.tile(order, reps)[:n]


def normalize_frame(raw, n_points=DEFAULT_POINTS, seed=0):
    """Resample to n_points, then center on the resampled centroid."""
    pts = np.asarray(raw.points if isinstance(raw, RawFrame) else raw, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ShapeMismatch(f"expected (M, 3) points, got {pts.shape}")
    if pts.shape[0] == 0:
        raise EmptyInput("frame has no points")
    idx = farthest_point_sample(pts, n_points, seed=seed)
    resampled = pts[idx]
    centroid = resampled.mean(axis=0)
    return PreppedFrame(points=resampled - centroid, centroid=centroid, indices=idx)


def normalize_sequence_wise(raw_frames, n_points=DEFAULT_POINTS, seed=0):
    """Resample every frame, subtract the FIRST frame's centroid from all.

    Preserves inter-frame motion; differs from frame-wise output exactly by
    the per-frame trajectory.
    """
    if not raw_frames:
        raise EmptyInput("no frames")
    frames = [normalize_frame(f, n_points=n_points, seed=seed) for f in raw_frames]
    anchor = frames[0].centroid
    out = []
    for f in frames:
        shifted = f.points + (f.centroid - anchor)
        out.append(PreppedFrame(points=shifted, centroid=anchor.copy(), indices=f.indices))
    return out


def compute_trajectory(centroids):
    """Traj(t) = Loc(t) - Loc(1); first row exactly zero."""
    centroids = np.asarray(centroids, dtype=np.float64)
    return centroids - centroids[0]


def offset_ground_truth(centroid, trans_gt):
    """Offset target: cloud centroid minus true translation."""
    return np.asarray(centroid, dtype=np.float64) - np.asarray(trans_gt, dtype=np.float64)


def velocity_ground_truth(joints_gt, trans_gt):
    """Forward differences as velocity supervision.

    joints_gt (L, 24, 3), trans_gt (L, 3). The last frame repeats the
    previous difference so the field spans the full window.
    """
    joints_gt = np.asarray(joints_gt, dtype=np.float64)
    trans_gt = np.asarray(trans_gt, dtype=np.float64)
    length = joints_gt.shape[0]
    if length < 2:
        raise WindowTooShort("velocity needs at least two frames")
    if trans_gt.shape[0] != length:
        raise ShapeMismatch("joints and translations disagree on frame count")
    jv = np.empty((length,) + joints_gt.shape[1:])
    jv[:-1] = joints_gt[1:] - joints_gt[:-1]
    jv[-1] = jv[-2]
    tv = np.empty_like(trans_gt)
    tv[:-1] = trans_gt[1:] - trans_gt[:-1]
    tv[-1] = tv[-2]
    return VelocityField(joint_vel=np.moveaxis(jv, 0, 1), trans_vel=tv)


def prep_frames(sequence, n_points=DEFAULT_POINTS, seed=0):
    """Frame-wise normalize a whole ScanSequence once."""
    return [normalize_frame(f, n_points=n_points, seed=seed) for f in sequence.frames]


def window_slices(sequence, window=DEFAULT_WINDOW, stride=1, n_points=DEFAULT_POINTS,
                  seed=0):
    """Slide a window over the sequence; trajectories restart per window."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    total = len(sequence)
    if total < window:
        raise SequenceTooShort(f"sequence of {total} frames < window {window}")
    prepped = prep_frames(sequence, n_points=n_points, seed=seed)
    centroids = np.array([f.centroid for f in prepped])
    windows = []
    for start in range(0, total - window + 1, stride):
        end = start + window
        gt = None
        if sequence.gt is not None:
            frames_gt = sequence.gt[start:end]
            gt = WindowGT(
                poses=np.array([np.asarray(g.pose.rotations) for g in frames_gt]),
                shapes=np.array([np.asarray(g.shape.coefficients) for g in frames_gt]),
                trans=np.array([np.asarray(g.trans.t) for g in frames_gt]),
                joints=np.array([np.asarray(g.joints) for g in frames_gt]),
            )
        labels = None
        if sequence.labels is not None:
            labels = [sequence.labels[i][prepped[i].indices] for i in range(start, end)]
        windows.append(
            SequenceWindow(
                frames=prepped[start:end],
                trajectory=compute_trajectory(centroids[start:end]),
                gt=gt,
                labels=labels,
            )
        )
    return windows
