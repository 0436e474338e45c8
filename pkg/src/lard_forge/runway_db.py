"""Runway database: loading, validation and runway-local geometry.

Corners are stored in a fixed order as seen by an aircraft on final:
A = threshold-left, B = threshold-right, C = far-right, D = far-left.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateRunway, ParseError, ValidationError
from .geodesy import EnuFrame, GeodeticPoint, enu_frame_at

AIMING_POINT_DISTANCE_M = 300.0
CORNER_NAMES = ("A", "B", "C", "D")

HEADER = ["airport_icao", "runway_id"] + [
    f"corner{c}_{k}" for c in CORNER_NAMES for k in ("lat", "lon", "alt")
]


@dataclass(frozen=True)
class RunwayDefinition:
    airport_icao: str
    runway_id: str
    corners: tuple[GeodeticPoint, GeodeticPoint, GeodeticPoint, GeodeticPoint]

    @property
    def key(self) -> str:
        return f"{self.airport_icao}/{self.runway_id}"

    def corners_llh(self) -> np.ndarray:
        return np.array([c.as_array() for c in self.corners])

    def threshold_midpoint(self) -> GeodeticPoint:
        a, b = self.corners[0], self.corners[1]
        # midpoint taken in ENU so it lies on the threshold segment
        enu = enu_frame_at(a)
        mid = 0.5 * (enu.geodetic_to_enu(a.as_array()) + enu.geodetic_to_enu(b.as_array()))
        lat, lon, alt = enu.enu_to_geodetic(mid).tolist()
        return GeodeticPoint(lat, lon, alt)


@dataclass(frozen=True)
class RunwayBounds:
    width_m: tuple[float, float] = (10.0, 120.0)
    length_m: tuple[float, float] = (300.0, 6000.0)
    coplanarity_m: float = 5.0
    max_edge_misalignment_deg: float = 5.0


@dataclass(frozen=True)
class RunwayFrame:
    """Runway-local axes expressed in the ENU frame anchored at the aiming point."""

    aiming_point: GeodeticPoint
    enu: EnuFrame = field(repr=False)
    centerline_dir: np.ndarray = field(repr=False)
    lateral_dir: np.ndarray = field(repr=False)
    up_dir: np.ndarray = field(repr=False)
    heading: float
    corners_enu: np.ndarray = field(repr=False)

    def to_local(self, enu_points) -> np.ndarray:
        """ENU (aiming-point origin) -> (along, cross, height).

        ``along`` is positive *before* the aiming point, i.e. on the approach
        side, so approach poses have positive along-track distance.
        """
        p = np.asarray(enu_points, dtype=float)
        return np.stack(
            [-(p @ self.centerline_dir), p @ self.lateral_dir, p @ self.up_dir], axis=-1
        )

    def from_local(self, local) -> np.ndarray:
        q = np.asarray(local, dtype=float)
        return (
            -q[..., :1] * self.centerline_dir
            + q[..., 1:2] * self.lateral_dir
            + q[..., 2:3] * self.up_dir
        )


def _horizontal_unit(v: np.ndarray) -> np.ndarray:
    h = np.array([v[0], v[1], 0.0])
    return h / np.linalg.norm(h)


def _edge_directions(enu_corners: np.ndarray, max_misalignment_deg: float):
    a, b, c, d = enu_corners
    left = _horizontal_unit(d - a)
    right = _horizontal_unit(c - b)
    angle = math.degrees(math.acos(float(np.clip(left @ right, -1.0, 1.0))))
    if angle > max_misalignment_deg:
        raise DegenerateRunway(
            f"side edges differ by {angle:.3f} deg (limit {max_misalignment_deg})"
        )
    mean = left + right
    return mean / np.linalg.norm(mean)


def runway_dimensions(r: RunwayDefinition) -> tuple[float, float]:
    """(width, length) in meters, averaged over opposite edges in the local plane."""
    enu = enu_frame_at(r.corners[0])
    a, b, c, d = enu.geodetic_to_enu(r.corners_llh())
    width = 0.5 * (np.linalg.norm(b - a) + np.linalg.norm(c - d))
    length = 0.5 * (np.linalg.norm(d - a) + np.linalg.norm(c - b))
    return float(width), float(length)


def compute_aiming_point(r: RunwayDefinition) -> GeodeticPoint:
    thr = r.threshold_midpoint()
    enu = enu_frame_at(thr)
    corners = enu.geodetic_to_enu(r.corners_llh())
    centerline = _edge_directions(corners, 180.0)
    far_mid = 0.5 * (corners[2] + corners[3])
    length = float(far_mid @ centerline)
    if length < AIMING_POINT_DISTANCE_M:
        raise DegenerateRunway(
            f"{r.key}: runway length {length:.1f} m shorter than the aiming point distance"
        )
    lat, lon, alt = enu.enu_to_geodetic(AIMING_POINT_DISTANCE_M * centerline).tolist()
    return GeodeticPoint(lat, lon, alt)


def runway_frame(r: RunwayDefinition, max_edge_misalignment_deg: float = 5.0) -> RunwayFrame:
    aim = compute_aiming_point(r)
    enu = enu_frame_at(aim)
    corners = enu.geodetic_to_enu(r.corners_llh())
    centerline = _edge_directions(corners, max_edge_misalignment_deg)
    up = np.array([0.0, 0.0, 1.0])
    lateral = np.cross(centerline, up)
    heading = math.degrees(math.atan2(centerline[0], centerline[1])) % 360.0
    return RunwayFrame(
        aiming_point=aim,
        enu=enu,
        centerline_dir=centerline,
        lateral_dir=lateral,
        up_dir=up,
        heading=heading,
        corners_enu=corners,
    )


def validate_runway(r: RunwayDefinition, bounds: RunwayBounds = RunwayBounds()) -> list[str]:
    """Return the list of violated invariants (empty when valid)."""
    problems = []
    if len(r.airport_icao) != 4:
        problems.append(f"airport_icao {r.airport_icao!r} is not a 4-character code")
    if not r.runway_id:
        problems.append("empty runway_id")
    enu = enu_frame_at(r.corners[0])
    pts = enu.geodetic_to_enu(r.corners_llh())
    xy = pts[:, :2]

    edges = np.roll(xy, -1, axis=0) - xy
    turns = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
    if np.allclose(turns, 0.0, atol=1e-6):
        problems.append("corners are collinear")
        return problems
    if not np.all(turns > 0.0):
        problems.append(
            "corner quadrilateral is not convex in canonical order "
            "(threshold-left, threshold-right, far-right, far-left)"
        )

    centered = pts - pts.mean(axis=0)
    normal = np.linalg.svd(centered)[2][-1]
    offplane = float(np.max(np.abs(centered @ normal)))
    if offplane > bounds.coplanarity_m:
        problems.append(f"corners deviate {offplane:.2f} m from a common plane")

    width, length = runway_dimensions(r)
    lo, hi = bounds.width_m
    if not lo <= width <= hi:
        problems.append(f"width {width:.1f} m outside [{lo}, {hi}]")
    lo, hi = bounds.length_m
    if not lo <= length <= hi:
        problems.append(f"length {length:.1f} m outside [{lo}, {hi}]")

    if not problems:
        try:
            _edge_directions(pts, bounds.max_edge_misalignment_deg)
        except DegenerateRunway as exc:
            problems.append(str(exc))
    return problems


def _parse_float(raw, name, line):
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ParseError(f"field {name} is not a number: {raw!r}", line=line) from None
    if not math.isfinite(value):
        raise ParseError(f"field {name} is not finite", line=line)
    return value


def _definition_from_record(rec: dict, line: int) -> RunwayDefinition:
    missing = [k for k in HEADER if rec.get(k) in (None, "")]
    if missing:
        raise ParseError(f"missing field(s) {', '.join(missing)}", line=line)
    corners = []
    for c in CORNER_NAMES:
        lat = _parse_float(rec[f"corner{c}_lat"], f"corner{c}_lat", line)
        lon = _parse_float(rec[f"corner{c}_lon"], f"corner{c}_lon", line)
        alt = _parse_float(rec[f"corner{c}_alt"], f"corner{c}_alt", line)
        try:
            corners.append(GeodeticPoint(lat, lon, alt))
        except ValueError as exc:
            raise ParseError(f"corner {c}: {exc}", line=line) from None
    return RunwayDefinition(str(rec["airport_icao"]).strip(), str(rec["runway_id"]).strip(), tuple(corners))


def _records(text: str):
    """Yield (line_number, record) from either the CSV or the JSON form."""
    stripped = text.lstrip()
    if stripped.startswith("[") or stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
        rows = doc.get("runways", []) if isinstance(doc, dict) else doc
        for i, rec in enumerate(rows, start=1):
            if not isinstance(rec, dict):
                raise ParseError("runway entry is not an object", line=i)
            yield i, rec
        return

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return
    header = [h.strip() for h in header]
    if header != HEADER:
        raise ParseError("unexpected header; expected " + ",".join(HEADER), line=1)
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(HEADER):
            raise ParseError(
                f"expected {len(HEADER)} fields (4 corners), got {len(row)}", line=reader.line_num
            )
        yield reader.line_num, dict(zip(HEADER, row))


def read_runway_db(text: str, bounds: RunwayBounds = RunwayBounds()):
    """Parse and validate; returns ``(definitions, problems)``.

    ``problems`` holds ``(line, key, reason)`` for every runway failing
    validation. Malformed rows raise :class:`ParseError` immediately.
    """
    good, problems = [], []
    for line, rec in _records(text):
        r = _definition_from_record(rec, line)
        reasons = validate_runway(r, bounds)
        if reasons:
            problems.extend((line, r.key, reason) for reason in reasons)
        else:
            good.append(r)
    return good, problems


def load_runway_db(source, bounds: RunwayBounds = RunwayBounds()) -> list[RunwayDefinition]:
    """Load a runway database from a path or from document text."""
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, Path) else source
    good, problems = read_runway_db(text, bounds)
    if problems:
        detail = "; ".join(f"line {ln} ({key}): {why}" for ln, key, why in problems)
        raise ValidationError(f"{len(problems)} runway validation failure(s): {detail}", problems)
    return good


def _fmt_deg(x: float) -> str:
    return np.format_float_positional(x, unique=True, min_digits=9, trim="k")


def dump_runway_db(runways) -> str:
    """Serialize to the CSV form; lossless so that ``load(dump(load(x))) == load(x)``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in runways:
        row = [r.airport_icao, r.runway_id]
        for c in r.corners:
            row += [_fmt_deg(c.latitude), _fmt_deg(c.longitude), _fmt_deg(c.altitude)]
        w.writerow(row)
    return buf.getvalue()


def runway_from_enu(airport_icao, runway_id, origin: GeodeticPoint, corners_enu) -> RunwayDefinition:
    """Build a definition from corner coordinates given in the ENU frame at ``origin``."""
    llh = enu_frame_at(origin).enu_to_geodetic(np.asarray(corners_enu, dtype=float))
    return RunwayDefinition(airport_icao, runway_id, tuple(GeodeticPoint(*row) for row in llh.tolist()))


def rectangular_runway(
    airport_icao, runway_id, threshold: GeodeticPoint, heading_deg: float, width_m: float, length_m: float
) -> RunwayDefinition:
    """Flat rectangular runway whose threshold midpoint sits at ``threshold``."""
    h = math.radians(heading_deg)
    fwd = np.array([math.sin(h), math.cos(h), 0.0])
    right = np.array([math.cos(h), -math.sin(h), 0.0])
    half = 0.5 * width_m * right
    corners = [-half, half, half + length_m * fwd, -half + length_m * fwd]
    return runway_from_enu(airport_icao, runway_id, threshold, corners)
