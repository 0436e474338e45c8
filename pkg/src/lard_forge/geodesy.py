"""WGS84 geodetic / ECEF / local ENU conversions.

All altitudes are ellipsoidal heights. Array helpers accept ``(..., 3)``
arrays so that batches of corners or test points convert in one call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NearSingular

WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_B = WGS84_A * (1.0 - WGS84_F)
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)

NM_IN_M = 1852.0

_MAX_ITER = 50
_LAT_TOL = 1e-12


@dataclass(frozen=True)
class GeodeticPoint:
    latitude: float
    longitude: float
    altitude: float = 0.0

    def __post_init__(self):
        if not (-90.0 <= self.latitude <= 90.0):
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not (-180.0 < self.longitude <= 180.0):
            raise ValueError(f"longitude {self.longitude} outside (-180, 180]")
        if not math.isfinite(self.altitude):
            raise ValueError("altitude must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.latitude, self.longitude, self.altitude])


@dataclass(frozen=True)
class EcefPoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError("ECEF components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def nm_to_m(d: float) -> float:
    if d < 0:
        raise ValueError(f"negative distance: {d} NM")
    return d * NM_IN_M


def wrap_longitude(lon):
    """Map degrees into (-180, 180]."""
    lon = np.asarray(lon, dtype=float)
    out = np.mod(lon + 180.0, 360.0) - 180.0
    out = np.where(out == -180.0, 180.0, out)
    # avoid -0.0 leaking into serialized output
    return out + 0.0


def geodetic_to_ecef_array(llh) -> np.ndarray:
    llh = np.asarray(llh, dtype=float)
    lat = np.radians(llh[..., 0])
    lon = np.radians(llh[..., 1])
    h = llh[..., 2]
    slat, clat = np.sin(lat), np.cos(lat)
    n = WGS84_A / np.sqrt(1.0 - WGS84_E2 * slat * slat)
    x = (n + h) * clat * np.cos(lon)
    y = (n + h) * clat * np.sin(lon)
    z = (n * (1.0 - WGS84_E2) + h) * slat
    return np.stack([x, y, z], axis=-1)


def ecef_to_geodetic_array(xyz) -> np.ndarray:
    """Inverse of :func:`geodetic_to_ecef_array`.

    Latitude is refined with ``phi <- atan2(z + e2 N(phi) sin(phi), p)``,
    which stays well conditioned at the poles. Longitude on the polar axis
    is reported as 0.
    """
    xyz = np.asarray(xyz, dtype=float)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    if np.any(np.sqrt(x * x + y * y + z * z) < 1000.0):
        raise NearSingular("point within 1 km of the Earth's center")
    p = np.hypot(x, y)
    lat = np.arctan2(z, p * (1.0 - WGS84_E2))
    for _ in range(_MAX_ITER):
        s = np.sin(lat)
        n = WGS84_A / np.sqrt(1.0 - WGS84_E2 * s * s)
        new = np.arctan2(z + WGS84_E2 * n * s, p)
        done = np.all(np.abs(new - lat) < _LAT_TOL)
        lat = new
        if done:
            break
    s, c = np.sin(lat), np.cos(lat)
    h = p * c + z * s - WGS84_A * np.sqrt(1.0 - WGS84_E2 * s * s)
    lon = np.where(p > 0.0, np.arctan2(y, x), 0.0)
    return np.stack([np.degrees(lat), wrap_longitude(np.degrees(lon)), h], axis=-1)


def geodetic_to_ecef(p: GeodeticPoint) -> EcefPoint:
    return EcefPoint(*geodetic_to_ecef_array(p.as_array()).tolist())


def ecef_to_geodetic(p: EcefPoint) -> GeodeticPoint:
    lat, lon, h = ecef_to_geodetic_array(p.as_array()).tolist()
    return GeodeticPoint(lat, lon, h)


def enu_basis(lat_deg: float, lon_deg: float) -> np.ndarray:
    """Rows are the East, North, Up unit vectors expressed in ECEF."""
    lat, lon = math.radians(lat_deg), math.radians(lon_deg)
    sl, cl = math.sin(lat), math.cos(lat)
    so, co = math.sin(lon), math.cos(lon)
    return np.array([
        [-so, co, 0.0],
        [-sl * co, -sl * so, cl],
        [cl * co, cl * so, sl],
    ])


@dataclass(frozen=True)
class EnuFrame:
    """Local East-North-Up tangent frame anchored at ``origin``."""

    origin: GeodeticPoint
    origin_ecef: np.ndarray = field(repr=False)
    basis: np.ndarray = field(repr=False)

    def ecef_to_enu(self, q) -> np.ndarray:
        return (np.asarray(q, dtype=float) - self.origin_ecef) @ self.basis.T

    def enu_to_ecef(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.basis + self.origin_ecef

    def geodetic_to_enu(self, llh) -> np.ndarray:
        return self.ecef_to_enu(geodetic_to_ecef_array(llh))

    def enu_to_geodetic(self, v) -> np.ndarray:
        return ecef_to_geodetic_array(self.enu_to_ecef(v))


def enu_frame_at(origin: GeodeticPoint) -> EnuFrame:
    return EnuFrame(
        origin=origin,
        origin_ecef=geodetic_to_ecef_array(origin.as_array()),
        basis=enu_basis(origin.latitude, origin.longitude),
    )
