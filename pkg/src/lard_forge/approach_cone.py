"""Generic landing approach cone: parameter ranges, pose sampling and camera placement.

Attitude convention (documented because the choice is ours):

* heading = runway heading + yaw, clockwise from true north;
* rotations are applied intrinsically in the order yaw (about up),
  pitch (about the lateral axis, positive nose-up), roll (about the
  forward axis, positive right wing down);
* camera axes are x right, y down, z forward, with zero boresight offset
  from the aircraft nose.

World coordinates are the ENU frame anchored at the runway aiming point.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .geodesy import NM_IN_M, GeodeticPoint
from .runway_db import RunwayFrame

DEFAULT_SPREAD = 0.25  # sigma = range width * spread
_SEED_MASK = (1 << 64) - 1


def _range(lo, hi):
    lo, hi = float(lo), float(hi)
    return (lo, hi) if lo <= hi else (hi, lo)


@dataclass(frozen=True)
class ConeParams:
    """Closed parameter ranges. Along-track in NM, angles in degrees."""

    along_track_distance: tuple[float, float] = (0.08, 3.0)
    vertical_path_angle: tuple[float, float] = (-3.8, -2.2)
    lateral_path_angle: tuple[float, float] = (-4.0, 4.0)
    yaw: tuple[float, float] = (-10.0, 10.0)
    pitch: tuple[float, float] = (-8.0, 0.0)
    roll: tuple[float, float] = (-10.0, 10.0)

    def __post_init__(self):
        for f in fields(self):
            lo, hi = _range(*getattr(self, f.name))
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"{f.name}: non-finite bound")
            object.__setattr__(self, f.name, (lo, hi))

    @classmethod
    def from_dict(cls, d: dict | None) -> "ConeParams":
        d = dict(d or {})
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown cone parameter(s): {sorted(unknown)}")
        return cls(**{k: tuple(v) for k, v in d.items()})

    @classmethod
    def from_json(cls, path) -> "ConeParams":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in asdict(self).items()}

    def ranges_si(self) -> dict[str, tuple[float, float]]:
        """Ranges keyed by ApproachPose field name, along-track in meters."""
        lo, hi = self.along_track_distance
        return {
            "along_track_m": (lo * NM_IN_M, hi * NM_IN_M),
            "vertical_path_deg": self.vertical_path_angle,
            "lateral_path_deg": self.lateral_path_angle,
            "yaw_deg": self.yaw,
            "pitch_deg": self.pitch,
            "roll_deg": self.roll,
        }


@dataclass(frozen=True)
class ApproachPose:
    along_track_m: float
    vertical_path_deg: float
    lateral_path_deg: float
    yaw_deg: float
    pitch_deg: float
    roll_deg: float

    def as_tuple(self):
        return (self.along_track_m, self.vertical_path_deg, self.lateral_path_deg,
                self.yaw_deg, self.pitch_deg, self.roll_deg)


POSE_FIELDS = tuple(f.name for f in fields(ApproachPose))


@dataclass(frozen=True)
class CameraPose:
    position: GeodeticPoint
    enu: np.ndarray = field(repr=False)  # camera center, aiming-point ENU
    local: tuple[float, float, float]  # (along, cross, height) in meters
    orientation: np.ndarray = field(repr=False)  # world(ENU) -> camera
    slant_distance_m: float
    heading_deg: float  # absolute, [0, 360)
    pitch_deg: float
    roll_deg: float


@dataclass(frozen=True)
class PoseCheck:
    inside: bool
    violations: tuple[str, ...] = ()

    def __bool__(self):
        return self.inside


def _rng(seed: int, frame_index: int, attempt: int = 0) -> np.random.Generator:
    if frame_index < 0 or attempt < 0:
        raise ValueError("frame_index and attempt must be non-negative")
    return np.random.default_rng([seed & _SEED_MASK, frame_index, attempt])


def _truncated_normal(rng, lo, hi, spread):
    mid = 0.5 * (lo + hi)
    sigma = (hi - lo) * spread
    if sigma == 0.0:
        return mid
    while True:
        x = rng.normal(mid, sigma)
        if lo <= x <= hi:
            return float(x)


def sample_pose(params: ConeParams, seed: int, frame_index: int, *, attempt: int = 0,
                spread: float = DEFAULT_SPREAD) -> ApproachPose:
    """Draw one pose; a pure function of ``(seed, frame_index, attempt)``.

    Each parameter is Gaussian around its range midpoint with
    ``sigma = width * spread`` and rejected until it falls in range.
    ``spread=0`` returns the midpoint pose.
    """
    rng = _rng(seed, frame_index, attempt)
    values = [_truncated_normal(rng, lo, hi, spread) for lo, hi in params.ranges_si().values()]
    return ApproachPose(*values)


def midpoint_pose(params: ConeParams = ConeParams()) -> ApproachPose:
    return ApproachPose(*(0.5 * (lo + hi) for lo, hi in params.ranges_si().values()))


def validate_pose(pose: ApproachPose, params: ConeParams) -> PoseCheck:
    bad = []
    for name, (lo, hi) in params.ranges_si().items():
        v = getattr(pose, name)
        if not (lo <= v <= hi):
            bad.append(f"{name}={v!r} outside [{lo}, {hi}]")
    return PoseCheck(not bad, tuple(bad))


def local_position(pose: ApproachPose) -> tuple[float, float, float]:
    """(along, cross, height) of the camera relative to the aiming point."""
    along = pose.along_track_m
    cross = along * math.tan(math.radians(pose.lateral_path_deg))
    height = along * math.tan(math.radians(abs(pose.vertical_path_deg)))
    return along, cross, height


def pose_from_local(along, cross, height, yaw_deg, pitch_deg, roll_deg) -> ApproachPose:
    """Inverse of :func:`local_position` (vertical path angle is returned negative)."""
    return ApproachPose(
        along,
        -math.degrees(math.atan2(height, along)),
        math.degrees(math.atan2(cross, along)),
        yaw_deg, pitch_deg, roll_deg,
    )


# body (x forward, y right, z down) -> camera (x right, y down, z forward)
_CAM_FROM_BODY = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
_ENU_FROM_NED = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])


def _rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def attitude_to_rotation(heading_deg: float, pitch_deg: float, roll_deg: float) -> np.ndarray:
    """World(ENU)-to-camera rotation for an absolute heading/pitch/roll."""
    ned_from_body = (
        _rot_z(math.radians(heading_deg))
        @ _rot_y(math.radians(pitch_deg))
        @ _rot_x(math.radians(roll_deg))
    )
    enu_from_body = _ENU_FROM_NED @ ned_from_body
    return _CAM_FROM_BODY @ enu_from_body.T


def camera_pose_from_enu(enu_position, heading_deg, pitch_deg, roll_deg, frame: RunwayFrame) -> CameraPose:
    enu_position = np.asarray(enu_position, dtype=float)
    along, cross, height = frame.to_local(enu_position).tolist()
    lat, lon, alt = frame.enu.enu_to_geodetic(enu_position).tolist()
    return CameraPose(
        position=GeodeticPoint(lat, lon, alt),
        enu=enu_position,
        local=(along, cross, height),
        orientation=attitude_to_rotation(heading_deg, pitch_deg, roll_deg),
        slant_distance_m=math.sqrt(along * along + cross * cross + height * height),
        heading_deg=float(heading_deg) % 360.0,
        pitch_deg=float(pitch_deg),
        roll_deg=float(roll_deg),
    )


def pose_to_camera(pose: ApproachPose, frame: RunwayFrame) -> CameraPose:
    along, cross, height = local_position(pose)
    enu_position = frame.from_local(np.array([along, cross, height]))
    cp = camera_pose_from_enu(enu_position, frame.heading + pose.yaw_deg, pose.pitch_deg, pose.roll_deg, frame)
    # keep the exact generating values rather than the projected-back ones
    return CameraPose(
        position=cp.position,
        enu=cp.enu,
        local=(along, cross, height),
        orientation=cp.orientation,
        slant_distance_m=math.sqrt(along * along + cross * cross + height * height),
        heading_deg=cp.heading_deg,
        pitch_deg=cp.pitch_deg,
        roll_deg=cp.roll_deg,
    )


def camera_to_pose(cp: CameraPose, frame: RunwayFrame) -> ApproachPose:
    yaw = (cp.heading_deg - frame.heading + 180.0) % 360.0 - 180.0
    return pose_from_local(*cp.local, yaw, cp.pitch_deg, cp.roll_deg)
