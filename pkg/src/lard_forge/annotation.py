"""Per-frame runway labels: projected corners, bounding box and shape metrics."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .approach_cone import ApproachPose, pose_to_camera
from .camera import Intrinsics, extrinsic_from_pose, project_runway
from .errors import BehindCamera, DegenerateQuad, InvalidCrop
from .runway_db import RunwayDefinition, RunwayFrame

DEFAULT_CROP_PX = 300
MIN_QUAD_AREA = 1e-9


class Visibility(str, enum.Enum):
    FULLY_VISIBLE = "FullyVisible"
    CLIPPED = "Clipped"
    BEHIND_CAMERA = "BehindCamera"


@dataclass(frozen=True)
class BoxMetrics:
    bbox: tuple[float, float, float, float]
    area: float  # quadrilateral area, px^2
    fill_ratio: float
    aspect_ratio: float

    @property
    def bbox_area(self) -> float:
        x0, y0, x1, y1 = self.bbox
        return (x1 - x0) * (y1 - y0)


@dataclass(frozen=True)
class FrameLabel:
    image_id: str
    airport_icao: str
    runway_id: str
    corners: np.ndarray | None  # (4, 2) u, v
    metrics: BoxMetrics | None
    visibility: Visibility
    pose: ApproachPose
    slant_distance_m: float
    width: int
    height: int
    crop_top: int = 0
    crop_bottom: int = 0

    @property
    def bbox(self):
        return None if self.metrics is None else self.metrics.bbox


def shoelace_area(pts) -> float:
    """Signed area of a polygon given in order (positive when counter-clockwise in x/y)."""
    p = np.asarray(pts, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1, d2 = _orient(q1, q2, p1), _orient(q1, q2, p2)
    d3, d4 = _orient(p1, p2, q1), _orient(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


def box_metrics(corners) -> BoxMetrics:
    c = np.asarray(corners, dtype=float)
    if c.shape != (4, 2):
        raise ValueError(f"expected 4 corners, got shape {c.shape}")
    if _segments_cross(c[0], c[1], c[2], c[3]) or _segments_cross(c[1], c[2], c[3], c[0]):
        raise DegenerateQuad("corner order describes a self-intersecting quadrilateral")
    area = abs(shoelace_area(c))
    if area < MIN_QUAD_AREA:
        raise DegenerateQuad(f"quadrilateral area {area:g} px^2 is degenerate")
    x0, y0 = c.min(axis=0)
    x1, y1 = c.max(axis=0)
    w, h = x1 - x0, y1 - y0
    return BoxMetrics(
        bbox=(float(x0), float(y0), float(x1), float(y1)),
        area=area,
        fill_ratio=min(area / (w * h), 1.0),
        aspect_ratio=float(h / w),
    )


def classify_visibility(corners, width, height, crop_top=0, crop_bottom=0) -> Visibility:
    """Fully visible only when every corner is strictly inside the usable image area."""
    c = np.asarray(corners, dtype=float)
    u, v = c[:, 0], c[:, 1]
    inside = (u > 0) & (u < width) & (v > crop_top) & (v < height - crop_bottom)
    return Visibility.FULLY_VISIBLE if inside.all() else Visibility.CLIPPED


def annotate_frame(
    pose: ApproachPose,
    r: RunwayDefinition,
    frame: RunwayFrame,
    intr: Intrinsics,
    *,
    image_id: str = "",
    crop_top: int = DEFAULT_CROP_PX,
    crop_bottom: int = DEFAULT_CROP_PX,
) -> FrameLabel:
    """Label one rendered frame.

    Corners are in full-image pixel coordinates; visibility is judged
    against the image minus the watermark bands. Labels whose corners
    project to a degenerate quad are reported as clipped without metrics.
    """
    cp = pose_to_camera(pose, frame)
    base = dict(
        image_id=image_id, airport_icao=r.airport_icao, runway_id=r.runway_id,
        pose=pose, slant_distance_m=cp.slant_distance_m,
        width=intr.width, height=intr.height, crop_top=crop_top, crop_bottom=crop_bottom,
    )
    try:
        corners = project_runway(intr, extrinsic_from_pose(cp), r, frame)
    except BehindCamera:
        return FrameLabel(corners=None, metrics=None, visibility=Visibility.BEHIND_CAMERA, **base)
    try:
        metrics = box_metrics(corners)
    except DegenerateQuad:
        return FrameLabel(corners=corners, metrics=None, visibility=Visibility.CLIPPED, **base)
    vis = classify_visibility(corners, intr.width, intr.height, crop_top, crop_bottom)
    return FrameLabel(corners=corners, metrics=metrics, visibility=vis, **base)


def apply_watermark_crop(label: FrameLabel, crop_top: int = DEFAULT_CROP_PX,
                         crop_bottom: int = DEFAULT_CROP_PX) -> FrameLabel:
    """Re-express a label in the coordinates of the image with the bands removed."""
    if crop_top < 0 or crop_bottom < 0 or crop_top + crop_bottom >= label.height:
        raise InvalidCrop(f"crop {crop_top}+{crop_bottom} px exhausts image height {label.height}")
    height = label.height - crop_top - crop_bottom
    new_top = max(label.crop_top - crop_top, 0)
    new_bottom = max(label.crop_bottom - crop_bottom, 0)
    if label.corners is None:
        return replace(label, height=height, crop_top=new_top, crop_bottom=new_bottom)
    corners = label.corners - np.array([0.0, crop_top])
    try:
        metrics = box_metrics(corners)
    except DegenerateQuad:
        metrics = None
    vis = Visibility.CLIPPED
    if metrics is not None and label.visibility is not Visibility.BEHIND_CAMERA:
        vis = classify_visibility(corners, label.width, height, new_top, new_bottom)
    return replace(label, corners=corners, metrics=metrics, visibility=vis,
                   height=height, crop_top=new_top, crop_bottom=new_bottom)
