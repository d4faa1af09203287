import numpy as np
import pytest

from mocapkin.body_model import MotionFrame, Pose, Shape, Translation
from mocapkin.errors import EmptyInput, SequenceTooShort, WindowTooShort
from mocapkin.prep import (
    RawFrame,
    ScanSequence,
    compute_trajectory,
    farthest_point_sample,
    fps_ordering,
    normalize_frame,
    normalize_sequence_wise,
    offset_ground_truth,
    velocity_ground_truth,
    window_slices,
)


def fps_oracle(points, n, seed=0):
    """Independent O(M^2 n) greedy max-min selection with the same tie rules."""
    pts = np.asarray(points, dtype=np.float64)
    m = pts.shape[0]
    first = min(range(m), key=lambda i: tuple(pts[i]))
    ties = [i for i in range(m) if tuple(pts[i]) == tuple(pts[first])]
    if len(ties) > 1:
        first = int(np.random.default_rng(seed).choice(ties))
    chosen = [first]
    while len(chosen) < m:
        best, best_d = None, -1.0
        for i in range(m):
            if i in chosen:
                continue
            d = min(np.linalg.norm(pts[i] - pts[j]) for j in chosen)
            if d > best_d:
                best, best_d = i, d
        chosen.append(best)
    if n <= m:
        return np.array(chosen[:n])
    reps = int(np.ceil(n / m))
    return np.tile(np.array(chosen), reps)[:n]


def test_fps_two_points():
    idx = farthest_point_sample(np.array([[0.0, 0, 0], [1.0, 0, 0]]), 2)
    assert sorted(idx.tolist()) == [0, 1]


def test_fps_collinear_greedy():
    pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [10.0, 0, 0]])
    idx = farthest_point_sample(pts, 2)
    assert idx.tolist() == [0, 2]


def test_fps_matches_bruteforce_oracle():
    rng = np.random.default_rng(0)
    for trial in range(25):
        m = int(rng.integers(1, 65))
        n = int(rng.integers(1, 2 * m + 1))
        pts = rng.standard_normal((m, 3))
        got = farthest_point_sample(pts, n, seed=trial)
        want = fps_oracle(pts, n, seed=trial)
        assert np.array_equal(got, want), f"trial {trial}: m={m} n={n}"


def test_fps_distinct_when_enough_points():
    rng = np.random.default_rng(1)
    pts = rng.standard_normal((64, 3))
    idx = farthest_point_sample(pts, 16)
    assert len(set(idx.tolist())) == 16


def test_fps_cycles_when_short():
    pts = np.random.default_rng(2).standard_normal((5, 3))
    idx = farthest_point_sample(pts, 12)
    order = fps_ordering(pts)
    assert np.array_equal(idx, np.tile(order, 3)[:12])


def test_fps_duplicate_tie_break_seeded():
    pts = np.zeros((4, 3))
    pts[2] = [1.0, 0, 0]
    a = farthest_point_sample(pts, 2, seed=0)
    b = farthest_point_sample(pts, 2, seed=0)
    assert np.array_equal(a, b)


def test_fps_empty_raises():
    with pytest.raises(EmptyInput):
        farthest_point_sample(np.zeros((0, 3)), 4)


def test_normalize_constant_cloud():
    frame = RawFrame(points=np.ones((10, 3)))
    prepped = normalize_frame(frame, n_points=256)
    np.testing.assert_allclose(prepped.centroid, [1, 1, 1], atol=0)
    np.testing.assert_allclose(prepped.points, 0, atol=0)
    assert prepped.points.shape == (256, 3)


def test_normalize_symmetric_pair():
    pts = np.array([[1.0, 0, 0], [-1.0, 0, 0]])
    prepped = normalize_frame(RawFrame(points=pts), n_points=256)
    np.testing.assert_allclose(prepped.centroid, 0, atol=1e-12)


def test_normalize_centroid_is_resampled_mean():
    rng = np.random.default_rng(3)
    pts = rng.standard_normal((500, 3)) + [0.5, 1.0, -2.0]
    prepped = normalize_frame(RawFrame(points=pts), n_points=256)
    np.testing.assert_allclose(prepped.points.mean(axis=0), 0, atol=1e-6)
    np.testing.assert_allclose(prepped.centroid, pts[prepped.indices].mean(axis=0),
                               atol=1e-12)


def test_trajectory_examples():
    cents = np.array([[0.0, 0, 0], [1, 0, 0], [3, 0, 0]])
    np.testing.assert_array_equal(compute_trajectory(cents), cents)
    shifted = compute_trajectory(cents + [5.0, -2.0, 1.0])
    np.testing.assert_allclose(shifted, cents, atol=1e-12)
    np.testing.assert_array_equal(compute_trajectory(np.tile([2.0, 1, 0], (4, 1))),
                                  np.zeros((4, 3)))


def test_offset_ground_truth():
    np.testing.assert_array_equal(offset_ground_truth([1.0, 2, 3], [1.0, 2, 3]), np.zeros(3))
    np.testing.assert_array_equal(offset_ground_truth([1.0, 2, 3], np.zeros(3)), [1, 2, 3])
    rng = np.random.default_rng(4)
    for _ in range(20):
        cent = rng.standard_normal(3)
        trans = rng.standard_normal(3)
        off = offset_ground_truth(cent, trans)
        np.testing.assert_allclose(cent - off, trans, atol=1e-12)


def test_velocity_static_and_linear():
    joints = np.tile(np.arange(72).reshape(24, 3), (5, 1, 1)).astype(float)
    trans = np.zeros((5, 3))
    vel = velocity_ground_truth(joints, trans)
    np.testing.assert_array_equal(vel.joint_vel, 0)
    np.testing.assert_array_equal(vel.trans_vel, 0)

    moving = joints + 0.1 * np.arange(5)[:, None, None] * np.array([1.0, 0, 0])
    vel = velocity_ground_truth(moving, trans)
    np.testing.assert_allclose(vel.joint_vel[:, :, 0], 0.1, atol=1e-12)
    np.testing.assert_allclose(vel.joint_vel[:, :, 1:], 0, atol=1e-12)


def test_velocity_telescoping_reconstruction():
    rng = np.random.default_rng(5)
    joints = rng.standard_normal((8, 24, 3))
    trans = rng.standard_normal((8, 3))
    vel = velocity_ground_truth(joints, trans)
    jv = np.moveaxis(vel.joint_vel, 0, 1)  # (L, 24, 3)
    rebuilt = joints[0] + np.concatenate(
        [np.zeros((1, 24, 3)), np.cumsum(jv[:-1], axis=0)], axis=0)
    np.testing.assert_allclose(rebuilt, joints, atol=1e-12)
    with pytest.raises(WindowTooShort):
        velocity_ground_truth(joints[:1], trans[:1])


def _sequence(total, seed=0, with_gt=False):
    rng = np.random.default_rng(seed)
    frames, gts = [], []
    for t in range(total):
        center = np.array([0.05 * t, 1.0, 0.0])
        frames.append(RawFrame(points=center + 0.3 * rng.standard_normal((300, 3)),
                               timestamp=t / 10.0))
        if with_gt:
            gts.append(MotionFrame(pose=Pose.identity(), shape=Shape.zero(),
                                   trans=Translation(center.copy()),
                                   joints=np.tile(center, (24, 1))))
    return ScanSequence(frames=frames, gt=gts if with_gt else None)


@pytest.mark.parametrize("total,window,stride,expect", [
    (32, 32, 1, 1),
    (34, 32, 1, 3),
    (64, 32, 32, 2),
])
def test_window_counts(total, window, stride, expect):
    wins = window_slices(_sequence(total), window=window, stride=stride, n_points=64)
    assert len(wins) == expect
    for w in wins:
        assert len(w.frames) == window
        np.testing.assert_array_equal(w.trajectory[0], np.zeros(3))


def test_window_too_short():
    with pytest.raises(SequenceTooShort):
        window_slices(_sequence(10), window=32)


def test_window_gt_sliced():
    wins = window_slices(_sequence(40, with_gt=True), window=32, stride=8, n_points=64)
    assert len(wins) == 2
    assert wins[1].gt.joints.shape == (32, 24, 3)
    np.testing.assert_allclose(wins[1].gt.trans[0], [0.05 * 8, 1.0, 0.0], atol=1e-12)


def test_sequence_wise_vs_frame_wise_algebra():
    seq = _sequence(6, seed=7)
    seq_frames = normalize_sequence_wise(seq.frames, n_points=128)
    trajectory = compute_trajectory(
        [normalize_frame(f, n_points=128).centroid for f in seq.frames])
    for t, raw in enumerate(seq.frames):
        frame_wise = normalize_frame(raw, n_points=128)
        np.testing.assert_allclose(
            frame_wise.points + trajectory[t], seq_frames[t].points, atol=1e-6)


def test_sequence_wise_single_frame_matches_frame_wise():
    seq = _sequence(1, seed=8)
    a = normalize_sequence_wise(seq.frames, n_points=64)[0]
    b = normalize_frame(seq.frames[0], n_points=64)
    np.testing.assert_allclose(a.points, b.points, atol=1e-12)
    np.testing.assert_allclose(a.centroid, b.centroid, atol=1e-12)


def test_sequence_wise_preserves_displacement():
    rng = np.random.default_rng(9)
    base = rng.standard_normal((64, 3))
    frames = [RawFrame(points=base + [0.2 * t, 0.0, 0.0]) for t in range(4)]
    prepped = normalize_sequence_wise(frames, n_points=64)
    for t in range(1, 4):
        # same cloud rigidly shifted: per-point displacement preserved exactly
        delta = prepped[t].points - prepped[0].points
        np.testing.assert_allclose(delta, np.tile([0.2 * t, 0.0, 0.0], (64, 1)),
                                   atol=1e-9)
