import numpy as np
import pytest

from mocapkin.body_model import synthetic_template
from mocapkin.errors import EmptyScan, PlacementFailure
from mocapkin.meshes import TriangleMesh, box_mesh, chair_mesh
from mocapkin.metrics import jitter
from mocapkin.prep import normalize_frame
from mocapkin.raycast import RayScene
from mocapkin.synth import (
    LidarSpec,
    ObjectSpec,
    PlacementConfig,
    SceneSpec,
    augment_object,
    beam_directions,
    body_mesh_at,
    generate_sequence,
    place_objects,
    simulate_scan,
    synthetic_motion,
)


def small_lidar(**kw):
    args = dict(origin=(0.0, 1.0, 0.0), channels=16, vertical_fov=(-20.0, 20.0),
                azimuth_step=1.0, max_range=30.0, range_noise_sigma=0.0,
                dropout_prob=0.0)
    args.update(kw)
    return LidarSpec(**args)


def test_beam_directions_unit_and_count():
    lidar = small_lidar()
    dirs = beam_directions(lidar)
    assert dirs.shape == (16 * 360, 3)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-12)


def test_augment_identity():
    rng = np.random.default_rng(0)
    mesh = chair_mesh()
    out = augment_object(mesh, 0.0, (1.0, 1.0), rng)
    np.testing.assert_allclose(out.vertices, mesh.vertices, atol=1e-12)


def test_augment_scale_doubles_distances():
    rng = np.random.default_rng(1)
    mesh = box_mesh()
    out = augment_object(mesh, 0.0, (2.0, 2.0), rng)
    c = mesh.vertices.mean(axis=0)
    np.testing.assert_allclose(
        np.linalg.norm(out.vertices - c, axis=1),
        2 * np.linalg.norm(mesh.vertices - c, axis=1), atol=1e-12)


def test_augment_deterministic():
    mesh = chair_mesh()
    a = augment_object(mesh, 90.0, (0.5, 1.5), np.random.default_rng(7))
    b = augment_object(mesh, 90.0, (0.5, 1.5), np.random.default_rng(7))
    np.testing.assert_array_equal(a.vertices, b.vertices)


def _body_bboxes(frames, tpl):
    out = np.empty((len(frames), 2, 3))
    for t, f in enumerate(frames):
        verts = body_mesh_at(tpl, f).vertices
        out[t, 0] = verts.min(axis=0)
        out[t, 1] = verts.max(axis=0)
    return out


def test_place_objects_empty():
    assert place_objects([], np.zeros((4, 2, 3)), 0.05, np.random.default_rng(0)) == []


def test_place_objects_degenerate_annulus():
    tpl = synthetic_template(0)
    motion = synthetic_motion(0, 4, speed=0.0)
    bboxes = _body_bboxes(motion, tpl)
    placed = place_objects([ObjectSpec(mesh=box_mesh((0.3, 0.3, 0.3)))], bboxes,
                           0.0, np.random.default_rng(1), r_min=1.0, r_max=1.0)
    center = (bboxes[:, 0] + bboxes[:, 1]).mean(axis=0) / 2.0
    obj_center = placed[0].mesh.vertices.mean(axis=0) + placed[0].translations[0]
    dist_xz = np.linalg.norm((obj_center - center)[[0, 2]])
    radius = np.linalg.norm(placed[0].mesh.vertices
                            - placed[0].mesh.vertices.mean(axis=0), axis=1).max()
    assert abs(dist_xz - 1.0) <= radius + 1e-9


def test_place_objects_min_gap_vertex_oracle():
    tpl = synthetic_template(0)
    motion = synthetic_motion(2, 4, speed=0.0)
    bboxes = _body_bboxes(motion, tpl)
    body_verts = body_mesh_at(tpl, motion[0]).vertices
    min_gap = 0.05
    placed = place_objects(
        [ObjectSpec(mesh=chair_mesh()), ObjectSpec(mesh=box_mesh((0.4, 0.8, 0.4)))],
        bboxes, min_gap, np.random.default_rng(3), r_min=0.6, r_max=1.5)
    for obj in placed:
        verts = obj.mesh.vertices + obj.translations[0]
        d = np.linalg.norm(verts[:, None, :] - body_verts[None, :, :], axis=-1)
        assert d.min() >= min_gap


def test_place_objects_failure():
    # huge object in a tiny annulus right on top of the body cannot respect the gap
    tpl = synthetic_template(0)
    motion = synthetic_motion(0, 2, speed=0.0)
    bboxes = _body_bboxes(motion, tpl)
    with pytest.raises(PlacementFailure):
        place_objects([ObjectSpec(mesh=box_mesh((8.0, 2.0, 8.0)))], bboxes, 0.5,
                      np.random.default_rng(0), r_min=0.1, r_max=0.2, max_attempts=8)


def _wall(width, height, z):
    verts = np.array([[-width / 2, 0.0, z], [width / 2, 0.0, z],
                      [width / 2, height, z], [-width / 2, height, z]])
    return TriangleMesh(vertices=verts, faces=np.array([[0, 1, 2], [0, 2, 3]]))


def test_simulate_scan_zero_noise_surface_adherence():
    lidar = small_lidar()
    mesh = box_mesh((1.0, 1.6, 0.8), center=(0.0, 0.8, 3.0))
    rng = np.random.default_rng(0)
    points, labels = simulate_scan([(mesh, 0)], lidar, rng)
    assert points.shape[0] > 100
    scene = RayScene([mesh])
    origin = np.asarray(lidar.origin)
    for p in points[::7]:
        ray = p - origin
        dist = np.linalg.norm(ray)
        hit = scene.raycast(origin, ray / dist)
        assert hit is not None
        assert abs(hit.distance - dist) < 1e-6


def test_simulate_scan_max_range_empty():
    lidar = small_lidar(max_range=1.0)
    mesh = box_mesh((1.0, 1.0, 1.0), center=(0.0, 1.0, 5.0))
    with pytest.raises(EmptyScan):
        simulate_scan([(mesh, 0)], lidar, np.random.default_rng(0))


def test_simulate_scan_noise_statistics():
    # near-normal incidence wall so point-to-plane distance ~ |range noise|
    lidar = LidarSpec(origin=(0.0, 1.0, 0.0), channels=64,
                      vertical_fov=(-22.5, 22.5), azimuth_step=0.1,
                      max_range=30.0, range_noise_sigma=0.01, dropout_prob=0.0)
    wall = _wall(1.6, 2.6, 3.0)
    points, _ = simulate_scan([(wall, 0)], lidar, np.random.default_rng(1))
    near_normal = np.abs(np.degrees(np.arctan2(points[:, 0], 3.0))) < 15.0
    dist = np.abs(points[near_normal, 2] - 3.0)
    # half-normal mean sigma*sqrt(2/pi), mildly shrunk by incidence cosines
    assert dist.size > 10_000
    mean = dist.mean()
    assert abs(mean - 0.008) / 0.008 < 0.15


def test_generate_sequence_no_objects_labels_human():
    tpl = synthetic_template(0)
    spec = SceneSpec(motion=synthetic_motion(1, 6), template=tpl, rng_seed=4)
    seq = generate_sequence(spec, small_lidar(azimuth_step=0.7))
    assert len(seq) == 6
    assert all(np.all(lbl == 0) for lbl in seq.labels)
    assert all(f.points.shape[0] > 50 for f in seq.frames)


def test_generate_sequence_deterministic():
    tpl = synthetic_template(0)

    def build():
        spec = SceneSpec(motion=synthetic_motion(5, 5), template=tpl, rng_seed=11,
                         objects=[ObjectSpec(mesh=chair_mesh())])
        return generate_sequence(spec, small_lidar(range_noise_sigma=0.01,
                                                   dropout_prob=0.02))

    a = build()
    b = build()
    for fa, fb, la, lb in zip(a.frames, b.frames, a.labels, b.labels):
        np.testing.assert_array_equal(fa.points, fb.points)
        np.testing.assert_array_equal(la, lb)


def test_generate_sequence_static_body_stable():
    tpl = synthetic_template(0)
    motion = synthetic_motion(3, 8, speed=0.0, swing_scale=0.0)
    spec = SceneSpec(motion=motion, template=tpl, rng_seed=5)
    seq = generate_sequence(spec, small_lidar(range_noise_sigma=0.01))
    gt_joints = np.array([g.joints for g in seq.gt])
    assert np.max(np.abs(gt_joints - gt_joints[0])) < 1e-9
    centroids = np.array([f.points.mean(axis=0) for f in seq.frames])
    beam_spacing = 3.5 * np.sin(np.radians(1.0))
    drift = np.linalg.norm(centroids - centroids.mean(axis=0), axis=1).max()
    assert drift < 2 * beam_spacing


def test_generate_sequence_label_soundness():
    tpl = synthetic_template(0)
    sigma = 0.01
    spec = SceneSpec(motion=synthetic_motion(6, 5), template=tpl, rng_seed=6,
                     objects=[ObjectSpec(mesh=chair_mesh())])
    lidar = small_lidar(range_noise_sigma=sigma, dropout_prob=0.02)
    seq = generate_sequence(spec, lidar)
    origin = np.asarray(lidar.origin)
    for t in range(len(seq)):
        body = body_mesh_at(tpl, seq.gt[t])
        scene = RayScene([body])
        human = seq.frames[t].points[seq.labels[t] == 0]
        for p in human[::11]:
            ray = p - origin
            dist = np.linalg.norm(ray)
            hit = scene.raycast(origin, ray / dist)
            assert hit is not None and abs(hit.distance - dist) <= 3 * sigma + 1e-6


def test_noisy_scene_centroid_more_jittery_than_clean():
    tpl = synthetic_template(0)
    motion = synthetic_motion(7, 12, speed=0.4)
    lidar = small_lidar(range_noise_sigma=0.01, dropout_prob=0.02)
    clean = generate_sequence(SceneSpec(motion=motion, template=tpl, rng_seed=8),
                              lidar)
    noisy = generate_sequence(
        SceneSpec(motion=motion, template=tpl, rng_seed=8,
                  objects=[ObjectSpec(mesh=chair_mesh(), rot_range=30.0,
                                      scale_range=(1.2, 1.4))],
                  placement=PlacementConfig(r_min=0.5, r_max=0.9, min_gap=0.02)),
        lidar)

    def centroid_track(seq):
        cents = [normalize_frame(f, n_points=256).centroid for f in seq.frames]
        return np.asarray(cents).reshape(-1, 1, 3)

    j_clean = jitter(centroid_track(clean), 10.0)
    j_noisy = jitter(centroid_track(noisy), 10.0)
    assert j_noisy > j_clean
