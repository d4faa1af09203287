"""Synthetic noisy-scan generation: a virtual spinning LiDAR over an animated
body plus static/dynamic noise objects.

Scenes are a pure function of (SceneSpec, LidarSpec): augmentation, placement
and per-frame scan noise all derive from the scene seed. Every returned point
carries a provenance label (0 = human, i >= 1 = object i) for diagnostics and
label-soundness checks.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .body_model import MotionFrame, Pose, Shape, Translation, fk_forward, synthetic_template
from .errors import EmptyScan, InvariantViolation, PlacementFailure
from .meshes import TriangleMesh, mesh_bounds, transform_mesh, validate_mesh
from .prep import RawFrame, ScanSequence
from .raycast import RayScene
from .rotation import axis_angle_to_matrix, matrix_to_rot6d


@dataclass
class LidarSpec:
    origin: tuple = (0.0, 1.0, 0.0)
    channels: int = 64
    vertical_fov: tuple = (-22.5, 22.5)   # degrees (min, max)
    azimuth_step: float = 0.35            # degrees
    max_range: float = 30.0               # meters
    range_noise_sigma: float = 0.01       # meters, clipped at 3 sigma
    dropout_prob: float = 0.02

    def __post_init__(self):
        if self.channels < 1:
            raise InvariantViolation("channels must be >= 1")
        if self.azimuth_step <= 0:
            raise InvariantViolation("azimuth_step must be > 0")
        if self.max_range <= 0:
            raise InvariantViolation("max_range must be > 0")
        if not 0.0 <= self.dropout_prob < 1.0:
            raise InvariantViolation("dropout_prob must be in [0, 1)")


@dataclass
class ObjectSpec:
    mesh: TriangleMesh
    mode: str = "static"                  # "static" | "dynamic"
    rot_range: float = 180.0              # degrees about the vertical axis
    scale_range: tuple = (0.8, 1.2)

    def __post_init__(self):
        if self.mode not in ("static", "dynamic"):
            raise InvariantViolation(f"unknown placement mode {self.mode!r}")
        if self.scale_range[0] <= 0:
            raise InvariantViolation("scale range must be positive")


@dataclass
class PlacementConfig:
    r_min: float = 0.8                    # annulus around the body mean, meters
    r_max: float = 2.5
    min_gap: float = 0.05                 # body/object surface gap at frame 0
    max_attempts: int = 64


@dataclass
class SceneSpec:
    motion: list                          # MotionFrames (joints may be None)
    objects: list = field(default_factory=list)
    rng_seed: int = 0
    template: object = None               # BodyTemplate; default synthetic
    placement: PlacementConfig = field(default_factory=PlacementConfig)
    fps: float = 10.0

    def __post_init__(self):
        if not self.motion:
            raise InvariantViolation("motion must be nonempty")


@dataclass
class PlacedObject:
    mesh: TriangleMesh                    # augmented, untranslated
    mode: str
    translations: np.ndarray              # (L, 3) per-frame offset


def beam_directions(lidar):
    """Unit directions ordered by (channel, azimuth); y is up."""
    n_az = int(round(360.0 / lidar.azimuth_step))
    elev = np.radians(np.linspace(lidar.vertical_fov[0], lidar.vertical_fov[1],
                                  lidar.channels))
    azim = np.radians(np.arange(n_az) * lidar.azimuth_step)
    ce, se = np.cos(elev), np.sin(elev)
    ca, sa = np.cos(azim), np.sin(azim)
    dirs = np.empty((lidar.channels, n_az, 3))
    dirs[:, :, 0] = ce[:, None] * sa[None, :]
    dirs[:, :, 1] = se[:, None] * np.ones_like(ca)[None, :]
    dirs[:, :, 2] = ce[:, None] * ca[None, :]
    return dirs.reshape(-1, 3)


def augment_object(mesh, rot_range, scale_range, rng):
    """Seeded rotation about the vertical axis and isotropic scale, both
    about the mesh centroid."""
    angle = math.radians(rng.uniform(-rot_range, rot_range))
    scale = rng.uniform(scale_range[0], scale_range[1])
    centroid = np.asarray(mesh.vertices).mean(axis=0)
    rot = axis_angle_to_matrix([0.0, 1.0, 0.0], angle)
    return transform_mesh(mesh, rotation=rot, scale=scale, about=centroid)


def _box_gap(lo_a, hi_a, lo_b, hi_b):
    """Euclidean distance between two axis-aligned boxes (0 if overlapping)."""
    gap = np.maximum(0.0, np.maximum(lo_a - hi_b, lo_b - hi_a))
    return float(np.linalg.norm(gap))


def _ground_offset(mesh, x, z):
    lo, _ = mesh_bounds(mesh)
    return np.array([x, -lo[1], z])


def place_objects(objects, body_bbox_sequence, min_gap, rng, r_min=0.8, r_max=2.5,
                  max_attempts=64):
    """Static objects: rejection-sampled ground positions in an annulus around
    the body's mean position, enforcing a bounding-box gap >= min_gap against
    the frame-0 body (a conservative bound on the surface gap). Dynamic
    objects: seeded piecewise-linear trajectories crossing the annulus."""
    body_bbox_sequence = np.asarray(body_bbox_sequence, dtype=np.float64)
    n_frames = body_bbox_sequence.shape[0]
    centers = (body_bbox_sequence[:, 0] + body_bbox_sequence[:, 1]) / 2.0
    mean_xz = centers.mean(axis=0)[[0, 2]]
    placed = []
    for spec in objects:
        validate_mesh(spec.mesh)
        mesh = augment_object(spec.mesh, spec.rot_range, spec.scale_range, rng)
        if spec.mode == "static":
            ok = False
            for _ in range(max_attempts):
                radius = rng.uniform(r_min, r_max)
                theta = rng.uniform(0.0, 2.0 * math.pi)
                x = mean_xz[0] + radius * math.cos(theta)
                z = mean_xz[1] + radius * math.sin(theta)
                offset = _ground_offset(mesh, x, z)
                lo, hi = mesh_bounds(mesh)
                gap = _box_gap(lo + offset, hi + offset,
                               body_bbox_sequence[0, 0], body_bbox_sequence[0, 1])
                if gap >= min_gap:
                    ok = True
                    break
            if not ok:
                raise PlacementFailure(
                    f"no valid static placement in {max_attempts} attempts")
            translations = np.tile(offset, (n_frames, 1))
        else:
            n_way = int(rng.integers(2, 5))
            waypoints = []
            for _ in range(n_way):
                radius = rng.uniform(r_min, r_max)
                theta = rng.uniform(0.0, 2.0 * math.pi)
                waypoints.append([mean_xz[0] + radius * math.cos(theta),
                                  mean_xz[1] + radius * math.sin(theta)])
            waypoints = np.array(waypoints)
            ts = np.linspace(0.0, n_way - 1.0, n_frames)
            xz = np.empty((n_frames, 2))
            for axis in range(2):
                xz[:, axis] = np.interp(ts, np.arange(n_way), waypoints[:, axis])
            translations = np.array([_ground_offset(mesh, x, z) for x, z in xz])
        placed.append(PlacedObject(mesh=mesh, mode=spec.mode, translations=translations))
    return placed


def simulate_scan(meshes, lidar, rng):
    """One sweep over labeled meshes [(mesh, label), ...].

    Returns (points (M, 3), labels (M,)) in beam order. Range noise is a
    clipped Gaussian (|n| <= 3 sigma) along the beam; dropout removes hits
    independently. Raises EmptyScan when nothing is hit.
    """
    scene = RayScene([m for m, _ in meshes])
    label_of_mesh = np.array([lbl for _, lbl in meshes], dtype=np.int64)
    dirs = beam_directions(lidar)
    origin = np.asarray(lidar.origin, dtype=np.float64)
    origins = np.broadcast_to(origin, dirs.shape)
    t, tri = scene.raycast_batch(origins, dirs)

    n_beams = dirs.shape[0]
    noise = rng.normal(0.0, 1.0, n_beams)
    keep = rng.random(n_beams) >= lidar.dropout_prob
    sigma = lidar.range_noise_sigma
    noise = np.clip(noise, -3.0, 3.0) * sigma

    hit = np.isfinite(t) & (t <= lidar.max_range) & keep
    if not np.any(hit):
        raise EmptyScan("no beams returned a point")
    t_hit = t[hit] + noise[hit]
    points = origin + t_hit[:, None] * dirs[hit]
    labels = label_of_mesh[scene.sources[tri[hit]]]
    return points, labels


def body_mesh_at(template, frame):
    """Skinned body surface for one MotionFrame."""
    _, verts, _ = fk_forward(
        template,
        np.asarray(frame.pose.rotations, dtype=np.float64),
        np.asarray(frame.shape.coefficients, dtype=np.float64),
        np.asarray(frame.trans.t, dtype=np.float64),
        with_vertices=True,
    )
    return TriangleMesh(vertices=verts, faces=template.faces)


def generate_sequence(spec, lidar):
    """Full labeled scan sequence with ground truth attached."""
    template = spec.template if spec.template is not None else synthetic_template(0)
    if template.faces is None:
        raise InvariantViolation("template has no faces; cannot ray cast")
    rng = np.random.default_rng(spec.rng_seed)
    n_frames = len(spec.motion)

    body_meshes = []
    gt_frames = []
    bboxes = np.empty((n_frames, 2, 3))
    for t, frame in enumerate(spec.motion):
        joints, verts, _ = fk_forward(
            template,
            np.asarray(frame.pose.rotations, dtype=np.float64),
            np.asarray(frame.shape.coefficients, dtype=np.float64),
            np.asarray(frame.trans.t, dtype=np.float64),
            with_vertices=True,
        )
        body_meshes.append(TriangleMesh(vertices=verts, faces=template.faces))
        bboxes[t, 0] = verts.min(axis=0)
        bboxes[t, 1] = verts.max(axis=0)
        gt_frames.append(MotionFrame(pose=frame.pose, shape=frame.shape,
                                     trans=frame.trans, joints=joints))

    placed = place_objects(spec.objects, bboxes, spec.placement.min_gap, rng,
                           r_min=spec.placement.r_min, r_max=spec.placement.r_max,
                           max_attempts=spec.placement.max_attempts)
    frame_seeds = rng.integers(0, 2 ** 63, size=n_frames)

    frames = []
    labels = []
    for t in range(n_frames):
        meshes = [(body_meshes[t], 0)]
        for i, obj in enumerate(placed):
            meshes.append((transform_mesh(obj.mesh, translation=obj.translations[t]),
                           i + 1))
        points, lbl = simulate_scan(meshes, lidar, np.random.default_rng(frame_seeds[t]))
        frames.append(RawFrame(points=points, timestamp=t / spec.fps))
        labels.append(lbl)
    return ScanSequence(frames=frames, fps=spec.fps, gt=gt_frames, labels=labels)


# ---------------------------------------------------------------------------
# Seeded motion clips
# ---------------------------------------------------------------------------

_SWING_JOINTS = {
    1: 0.5, 2: 0.5, 4: 0.6, 5: 0.6,       # hips, knees
    16: 0.5, 17: 0.5, 18: 0.7, 19: 0.7,    # shoulders, elbows
    3: 0.1, 6: 0.1, 12: 0.15, 15: 0.15,    # spine, neck, head
}


def synthetic_motion(seed, n_frames, fps=10.0, start=(0.0, 0.0, 3.5), speed=0.5,
                     swing_scale=1.0):
    """Smooth seeded walking-style motion at a few meters from the sensor.

    Joint angles follow per-joint sinusoids; the root translates at `speed`
    m/s along a gentle arc and slowly yaws. Returns a list of MotionFrames
    (joints left to the caller's FK).
    """
    rng = np.random.default_rng(seed)
    beta = np.clip(rng.normal(0.0, 0.8, 10), -2.5, 2.5)
    heading = rng.uniform(0, 2 * math.pi)
    turn_rate = rng.uniform(-0.2, 0.2) if speed > 0 else 0.0

    amp = {}
    freq = {}
    phase = {}
    axes = {}
    for j, a in _SWING_JOINTS.items():
        amp[j] = swing_scale * a * rng.uniform(0.3, 1.0)
        freq[j] = rng.uniform(0.5, 1.5)
        phase[j] = rng.uniform(0, 2 * math.pi)
        axis = rng.standard_normal(3)
        axes[j] = axis / np.linalg.norm(axis)
    root_yaw0 = rng.uniform(0, 2 * math.pi)

    frames = []
    pos = np.array(start, dtype=np.float64)
    for t in range(n_frames):
        time = t / fps
        r6 = np.tile(np.array([1.0, 0, 0, 0, 1.0, 0]), (24, 1))
        yaw = root_yaw0 + turn_rate * time
        r6[0] = matrix_to_rot6d(axis_angle_to_matrix([0, 1, 0], yaw))
        for j in _SWING_JOINTS:
            angle = amp[j] * math.sin(2 * math.pi * freq[j] * time + phase[j])
            r6[j] = matrix_to_rot6d(axis_angle_to_matrix(axes[j], angle))
        frames.append(MotionFrame(
            pose=Pose(rotations=r6),
            shape=Shape(coefficients=beta.copy()),
            trans=Translation(t=pos.copy()),
        ))
        step_heading = heading + turn_rate * time
        pos = pos + (speed / fps) * np.array([math.cos(step_heading), 0.0,
                                              math.sin(step_heading)])
    return frames
