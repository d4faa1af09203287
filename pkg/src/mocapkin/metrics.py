"""Motion evaluation metrics: positional errors (PS/PST), angular error,
acceleration error, and jitter, plus report aggregation and export.

Positional errors are reported in millimeters. PS subtracts each side's own
per-frame translation before measuring (pose+shape isolation); PST measures
in global coordinates. Acceleration uses the central second difference,
jitter the 4-point third difference, both scaled by powers of the frame
rate; jitter is divided by 100 to express 1e2 m/s^3.
"""

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np

from .body_model import fk_forward
from .errors import ShapeMismatch, WindowTooShort
from .rotation import geodesic_angle, rot6d_to_matrix


@dataclass
class EvalReport:
    j_err_ps: float | None = None     # mm
    v_err_ps: float | None = None     # mm
    j_err_pst: float | None = None    # mm
    v_err_pst: float | None = None    # mm
    ang_err: float | None = None      # degrees
    accel_err: float | None = None    # m/s^2
    jitter: float | None = None       # 1e2 m/s^3 (prediction-only metric)
    frame_count: int = 0
    fps: float = 10.0

    def to_dict(self):
        return asdict(self)


def _check_pair(pred, gt):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"pred {pred.shape} vs gt {gt.shape}")
    return pred, gt


def joint_vertex_error(pred, gt, mode="PST", pred_trans=None, gt_trans=None):
    """Mean Euclidean error in millimeters over frames and points.

    mode PST measures global coordinates; mode PS subtracts per-frame
    translations first (given explicitly, else each side's first point, which
    is the root joint for joint arrays).
    """
    pred, gt = _check_pair(pred, gt)
    if mode not in ("PS", "PST"):
        raise ValueError(f"mode must be PS or PST, got {mode!r}")
    if mode == "PS":
        p_t = pred[:, 0] if pred_trans is None else np.asarray(pred_trans, dtype=np.float64)
        g_t = gt[:, 0] if gt_trans is None else np.asarray(gt_trans, dtype=np.float64)
        pred = pred - p_t[:, None, :]
        gt = gt - g_t[:, None, :]
    return float(np.linalg.norm(pred - gt, axis=-1).mean() * 1000.0)


def angle_error(pred_poses, gt_poses):
    """Mean geodesic angle in degrees over joints and frames (root included)."""
    pred_poses, gt_poses = _check_pair(pred_poses, gt_poses)
    rot_p = rot6d_to_matrix(pred_poses)
    rot_g = rot6d_to_matrix(gt_poses)
    return float(np.degrees(geodesic_angle(rot_p, rot_g)).mean())


def _second_difference(joints, fps):
    return (joints[2:] - 2.0 * joints[1:-1] + joints[:-2]) * fps * fps


def _third_difference(joints, fps):
    # j(t) = (J(t+2) - 3 J(t+1) + 3 J(t) - J(t-1)) * fps^3
    return (joints[3:] - 3.0 * joints[2:-1] + 3.0 * joints[1:-2] - joints[:-3]) \
        * fps ** 3


def accel_error(pred_joints, gt_joints, fps):
    """Mean acceleration-difference magnitude in m/s^2 (needs >= 3 frames)."""
    pred_joints, gt_joints = _check_pair(pred_joints, gt_joints)
    if pred_joints.shape[0] < 3:
        raise WindowTooShort("acceleration needs at least 3 frames")
    diff = _second_difference(pred_joints, fps) - _second_difference(gt_joints, fps)
    return float(np.linalg.norm(diff, axis=-1).mean())


def jitter(joints, fps):
    """Mean jerk magnitude in units of 1e2 m/s^3 (needs >= 4 frames)."""
    joints = np.asarray(joints, dtype=np.float64)
    if joints.shape[0] < 4:
        raise WindowTooShort("jitter needs at least 4 frames")
    jerk = _third_difference(joints, fps)
    return float(np.linalg.norm(jerk, axis=-1).mean() / 100.0)


def _bundle_joints_vertices(bundle, template, need_vertices):
    """Derive joints/vertices from parameters when not given directly."""
    joints = bundle.get("joints")
    vertices = bundle.get("vertices")
    have_params = all(k in bundle for k in ("poses", "shape", "trans"))
    if (joints is None or (need_vertices and vertices is None)) and have_params:
        poses = np.asarray(bundle["poses"], dtype=np.float64)
        shape = np.asarray(bundle["shape"], dtype=np.float64)
        trans = np.asarray(bundle["trans"], dtype=np.float64)
        if shape.ndim == 1:
            shape = np.broadcast_to(shape, poses.shape[:1] + shape.shape)
        fk_j, fk_v, _ = fk_forward(template, poses, shape, trans,
                                   with_vertices=need_vertices)
        joints = fk_j if joints is None else joints
        vertices = fk_v if vertices is None else vertices
    return joints, vertices


def evaluate_sequence(pred, gt, template=None, fps=10.0):
    """EvalReport for one sequence.

    pred/gt are dicts with any of: poses (T,24,6), shape (10,) or (T,10),
    trans (T,3), joints (T,24,3), vertices (T,NV,3). Joints and vertices are
    derived through the body model when parameters are available. Metrics
    whose inputs are missing are left as None.
    """
    want_vertices = ("vertices" in pred or "poses" in pred) and \
        ("vertices" in gt or "poses" in gt) and template is not None
    pred_j, pred_v = _bundle_joints_vertices(pred, template, want_vertices)
    gt_j, gt_v = _bundle_joints_vertices(gt, template, want_vertices)
    if pred_j is None or gt_j is None:
        raise ShapeMismatch("both bundles need joints or full parameters")
    pred_j = np.asarray(pred_j, dtype=np.float64)
    gt_j = np.asarray(gt_j, dtype=np.float64)

    p_trans = pred.get("trans")
    g_trans = gt.get("trans")
    report = EvalReport(frame_count=pred_j.shape[0], fps=fps)
    report.j_err_pst = joint_vertex_error(pred_j, gt_j, "PST")
    report.j_err_ps = joint_vertex_error(pred_j, gt_j, "PS",
                                         pred_trans=p_trans, gt_trans=g_trans)
    if pred_v is not None and gt_v is not None:
        report.v_err_pst = joint_vertex_error(pred_v, gt_v, "PST")
        if p_trans is not None and g_trans is not None:
            report.v_err_ps = joint_vertex_error(pred_v, gt_v, "PS",
                                                 pred_trans=p_trans, gt_trans=g_trans)
    if "poses" in pred and "poses" in gt:
        report.ang_err = angle_error(pred["poses"], gt["poses"])
    if pred_j.shape[0] >= 3:
        report.accel_err = accel_error(pred_j, gt_j, fps)
    if pred_j.shape[0] >= 4:
        report.jitter = jitter(pred_j, fps)
    return report


def aggregate_reports(reports):
    """Frame-weighted mean over sequences; None fields are skipped."""
    agg = EvalReport(frame_count=sum(r.frame_count for r in reports),
                     fps=reports[0].fps if reports else 10.0)
    for name in ("j_err_ps", "v_err_ps", "j_err_pst", "v_err_pst", "ang_err",
                 "accel_err", "jitter"):
        pairs = [(getattr(r, name), r.frame_count) for r in reports
                 if getattr(r, name) is not None]
        if pairs:
            total = sum(w for _, w in pairs)
            setattr(agg, name, sum(v * w for v, w in pairs) / total)
    return agg


def write_report_json(path, per_sequence, aggregate):
    payload = {
        "aggregate": aggregate.to_dict(),
        "sequences": {sid: rep.to_dict() for sid, rep in per_sequence.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def write_report_csv(path, per_sequence):
    fields = ["sequence", "j_err_ps", "v_err_ps", "j_err_pst", "v_err_pst",
              "ang_err", "accel_err", "jitter", "frame_count", "fps"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for sid, rep in per_sequence.items():
            row = rep.to_dict()
            writer.writerow([sid] + [row[f] for f in fields[1:]])
