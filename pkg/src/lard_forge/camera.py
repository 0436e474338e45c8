"""Pinhole camera: intrinsics from image size + FOV, extrinsics from a pose, projection.

Pixel coordinates are continuous with the origin at the top-left corner,
u to the right and v downwards. No lens distortion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .approach_cone import CameraPose
from .errors import BehindCamera, InvalidFov
from .geodesy import geodetic_to_ecef_array
from .runway_db import CORNER_NAMES, RunwayDefinition, RunwayFrame

MIN_DEPTH_M = 1e-9


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    fov_deg: float
    fov_axis: str = "vertical"

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def vertical_fov_deg(self) -> float:
        return math.degrees(2.0 * math.atan(0.5 * self.height / self.fy))


def intrinsic_from_fov(width: int, height: int, fov_deg: float, axis: str = "vertical") -> Intrinsics:
    """Square-pixel intrinsics with the principal point at the image center.

    ``axis`` selects whether ``fov_deg`` spans the image height (default)
    or its width.
    """
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be >= 1 px")
    if not (0.0 < fov_deg < 180.0):
        raise InvalidFov(f"field of view {fov_deg} deg outside (0, 180)")
    if axis not in ("vertical", "horizontal"):
        raise ValueError(f"unknown FOV axis {axis!r}")
    span = height if axis == "vertical" else width
    f = 0.5 * span / math.tan(math.radians(fov_deg) / 2.0)
    return Intrinsics(f, f, width / 2.0, height / 2.0, int(width), int(height), float(fov_deg), axis)


@dataclass(frozen=True)
class Extrinsics:
    """``p_cam = rotation @ (p_world - camera_center)``; ``world`` is "enu" or "ecef"."""

    rotation: np.ndarray = field(repr=False)
    camera_center: np.ndarray
    world: str = "enu"

    def to_camera(self, p) -> np.ndarray:
        return (np.asarray(p, dtype=float) - self.camera_center) @ self.rotation.T


def extrinsic_from_pose(cp: CameraPose) -> Extrinsics:
    return Extrinsics(np.array(cp.orientation, dtype=float), np.array(cp.enu, dtype=float), "enu")


def project_camera_points(intr: Intrinsics, pc) -> np.ndarray:
    """Project camera-frame points ``(..., 3)``; raises if any depth is too small."""
    pc = np.asarray(pc, dtype=float)
    z = pc[..., 2]
    if np.any(z <= MIN_DEPTH_M):
        raise BehindCamera("point at or behind the image plane")
    u = intr.cx + intr.fx * pc[..., 0] / z
    v = intr.cy + intr.fy * pc[..., 1] / z
    return np.stack([u, v], axis=-1)


def project_point(intr: Intrinsics, extr: Extrinsics, p) -> np.ndarray:
    """World point -> ``(u, v)`` pixel coordinates."""
    return project_camera_points(intr, extr.to_camera(p))


def runway_corners_world(r: RunwayDefinition, frame: RunwayFrame, world: str = "enu") -> np.ndarray:
    ecef = geodetic_to_ecef_array(r.corners_llh())
    return frame.enu.ecef_to_enu(ecef) if world == "enu" else ecef


def project_runway(intr: Intrinsics, extr: Extrinsics, r: RunwayDefinition, frame: RunwayFrame) -> np.ndarray:
    """Pixel coordinates of the four corners, shape (4, 2), canonical order kept."""
    pc = extr.to_camera(runway_corners_world(r, frame, extr.world))
    for name, depth in zip(CORNER_NAMES, pc[:, 2]):
        if depth <= MIN_DEPTH_M:
            raise BehindCamera(f"{r.key}: corner {name} behind camera (depth {depth:.3f} m)", corner=name)
    return project_camera_points(intr, pc)
