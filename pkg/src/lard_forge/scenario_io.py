"""Renderer scenario documents, renderer metadata ingestion, and label files.

The native scenario format is JSON with one object per frame carrying the
camera position (longitude, latitude, altitude), rotation (horizontal
angle, vertical angle, roll), field of view and output size. A KML camera
tour can be exported for tools that only read KML.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from xml.etree import ElementTree as ET

import numpy as np

from .annotation import BoxMetrics, FrameLabel, Visibility
from .approach_cone import ApproachPose, CameraPose, camera_pose_from_enu
from .camera import Intrinsics
from .errors import RangeError, SchemaError
from .geodesy import wrap_longitude
from .runway_db import RunwayFrame

FRAME_FIELDS = (
    "frame_id", "longitude", "latitude", "altitude",
    "horizontal_angle", "vertical_angle", "roll", "fov_deg", "width", "height",
)
MAX_ALTITUDE_M = 20_000.0
MIN_ALTITUDE_M = -1_000.0

LABEL_FIELDS = (
    "image_id", "airport_icao", "runway_id",
    "xA", "yA", "xB", "yB", "xC", "yC", "xD", "yD",
    "bbox_xmin", "bbox_ymin", "bbox_xmax", "bbox_ymax",
    "fill_ratio", "aspect_ratio", "visibility", "slant_distance_m",
    "along_track_m", "lateral_path_deg", "vertical_path_deg", "yaw_deg", "pitch_deg", "roll_deg",
)


# Earth Studio angle mapping lives here so it can be recalibrated in one place.
def camera_angles(cp: CameraPose) -> tuple[float, float, float]:
    """(horizontal_angle, vertical_angle, roll) for a camera pose."""
    return cp.heading_deg % 360.0, cp.pitch_deg, cp.roll_deg


def angles_to_attitude(horizontal: float, vertical: float, roll: float) -> tuple[float, float, float]:
    return horizontal % 360.0, vertical, roll


def emit_scenario(poses, intr: Intrinsics, frame: RunwayFrame, frame_ids=None, **extra) -> dict:
    """Build a scenario document (a JSON-ready dict), one frame per camera pose.

    ``extra`` keys (e.g. ``airport_icao``) are stored at the top level;
    readers ignore them.
    """
    poses = list(poses)
    if frame_ids is None:
        frame_ids = [f"{i:05d}" for i in range(len(poses))]
    frames = []
    for fid, cp in zip(frame_ids, poses, strict=True):
        h, v, r = camera_angles(cp)
        frames.append({
            "frame_id": str(fid),
            "longitude": float(cp.position.longitude),
            "latitude": float(cp.position.latitude),
            "altitude": float(cp.position.altitude),
            "horizontal_angle": float(h),
            "vertical_angle": float(v),
            "roll": float(r),
            "fov_deg": float(intr.fov_deg),
            "width": int(intr.width),
            "height": int(intr.height),
        })
    doc = {k: v for k, v in extra.items()}
    doc["frames"] = frames
    return doc


def dumps_scenario(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_scenario(path, doc: dict) -> Path:
    path = Path(path)
    path.write_text(dumps_scenario(doc), encoding="utf-8")
    return path


def _number(rec, name, index):
    if name not in rec:
        raise SchemaError(f"frame {index}: missing field {name!r}", field=name, frame_index=index)
    value = rec[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"frame {index}: field {name!r} is not a number", field=name, frame_index=index)
    if not math.isfinite(value):
        raise RangeError(f"frame {index}: field {name!r} is not finite", field=name, frame_index=index)
    return float(value)


def _load_document(document):
    if isinstance(document, Path):
        document = document.read_text(encoding="utf-8")
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from None
    if isinstance(document, list):
        document = {"frames": document}
    if not isinstance(document, dict) or not isinstance(document.get("frames"), list):
        raise SchemaError("document has no 'frames' list", field="frames")
    return document


def parse_metadata(document, frame: RunwayFrame) -> list[CameraPose]:
    """Camera poses from a scenario document or renderer metadata.

    ``document`` may be a dict, JSON text or a path. Unknown fields are
    ignored; missing or non-numeric required fields raise
    :class:`SchemaError` naming the field and frame index.
    """
    doc = _load_document(document)
    poses = []
    for i, rec in enumerate(doc["frames"]):
        if not isinstance(rec, dict):
            raise SchemaError(f"frame {i}: not an object", frame_index=i)
        lon = _number(rec, "longitude", i)
        lat = _number(rec, "latitude", i)
        alt = _number(rec, "altitude", i)
        h = _number(rec, "horizontal_angle", i)
        v = _number(rec, "vertical_angle", i)
        roll = _number(rec, "roll", i)
        if not -90.0 <= lat <= 90.0:
            raise RangeError(f"frame {i}: latitude {lat} out of range", field="latitude", frame_index=i)
        if not -180.0 <= lon <= 180.0:
            raise RangeError(f"frame {i}: longitude {lon} out of range", field="longitude", frame_index=i)
        if not MIN_ALTITUDE_M <= alt < MAX_ALTITUDE_M:
            raise RangeError(f"frame {i}: altitude {alt} m out of range", field="altitude", frame_index=i)
        lon = float(wrap_longitude(lon))
        enu = frame.enu.geodetic_to_enu(np.array([lat, lon, alt]))
        heading, pitch, roll = angles_to_attitude(h, v, roll)
        poses.append(camera_pose_from_enu(enu, heading, pitch, roll, frame))
    return poses


def frame_ids(document) -> list[str]:
    doc = _load_document(document)
    return [str(rec.get("frame_id", i)) for i, rec in enumerate(doc["frames"])]


def export_kml(doc: dict, name: str = "approach") -> str:
    """Minimal KML camera tour (one Placemark with a Camera per frame)."""
    kml = ET.Element("kml", xmlns="http://www.opengis.net/kml/2.2")
    folder = ET.SubElement(ET.SubElement(kml, "Document"), "Folder")
    ET.SubElement(folder, "name").text = name
    for rec in doc["frames"]:
        pm = ET.SubElement(folder, "Placemark")
        ET.SubElement(pm, "name").text = str(rec["frame_id"])
        cam = ET.SubElement(pm, "Camera")
        ET.SubElement(cam, "longitude").text = repr(rec["longitude"])
        ET.SubElement(cam, "latitude").text = repr(rec["latitude"])
        ET.SubElement(cam, "altitude").text = repr(rec["altitude"])
        ET.SubElement(cam, "heading").text = repr(rec["horizontal_angle"])
        # KML tilt: 0 looks straight down, 90 at the horizon
        ET.SubElement(cam, "tilt").text = repr(90.0 + rec["vertical_angle"])
        ET.SubElement(cam, "roll").text = repr(rec["roll"])
        ET.SubElement(cam, "altitudeMode").text = "absolute"
    ET.indent(kml)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(kml, encoding="unicode") + "\n"


# -- labels -----------------------------------------------------------------

def _f3(x):
    return "" if x is None else f"{x:.3f}"


def _f6(x):
    return "" if x is None else f"{x:.6f}"


def _exact(x):
    return repr(float(x))


def label_record(label: FrameLabel) -> dict:
    """Label as an ordered mapping of CSV cell strings."""
    rec = {"image_id": label.image_id, "airport_icao": label.airport_icao, "runway_id": label.runway_id}
    corners = label.corners if label.corners is not None else [(None, None)] * 4
    for name, (u, v) in zip("ABCD", corners):
        rec[f"x{name}"] = _f3(None if u is None else float(u))
        rec[f"y{name}"] = _f3(None if v is None else float(v))
    bbox = label.bbox or (None,) * 4
    for key, val in zip(("bbox_xmin", "bbox_ymin", "bbox_xmax", "bbox_ymax"), bbox):
        rec[key] = _f3(val)
    m = label.metrics
    rec["fill_ratio"] = _f6(None if m is None else m.fill_ratio)
    rec["aspect_ratio"] = _f6(None if m is None else m.aspect_ratio)
    rec["visibility"] = label.visibility.value
    rec["slant_distance_m"] = _exact(label.slant_distance_m)
    p = label.pose
    rec["along_track_m"] = _exact(p.along_track_m)
    rec["lateral_path_deg"] = _exact(p.lateral_path_deg)
    rec["vertical_path_deg"] = _exact(p.vertical_path_deg)
    rec["yaw_deg"] = _exact(p.yaw_deg)
    rec["pitch_deg"] = _exact(p.pitch_deg)
    rec["roll_deg"] = _exact(p.roll_deg)
    return rec


def _json_value(key, cell):
    if key in ("image_id", "airport_icao", "runway_id", "visibility"):
        return cell
    return None if cell == "" else float(cell)


def labels_csv(labels) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LABEL_FIELDS)
    for label in labels:
        rec = label_record(label)
        w.writerow([rec[k] for k in LABEL_FIELDS])
    return buf.getvalue()


def labels_jsonl(labels) -> str:
    lines = []
    for label in labels:
        rec = label_record(label)
        lines.append(json.dumps({k: _json_value(k, rec[k]) for k in LABEL_FIELDS}))
    return "".join(line + "\n" for line in lines)


def write_labels(labels, destination, stem: str = "labels") -> tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.jsonl`` into ``destination``."""
    labels = list(labels)
    dest = Path(destination)
    csv_path, jsonl_path = dest / f"{stem}.csv", dest / f"{stem}.jsonl"
    try:
        dest.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(labels_csv(labels), encoding="utf-8")
        jsonl_path.write_text(labels_jsonl(labels), encoding="utf-8")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write labels: {exc.strerror}", str(dest)) from exc
    return csv_path, jsonl_path


def _opt(row, key):
    cell = row[key]
    return None if cell == "" else float(cell)


def read_labels(path, width: int = 2448, height: int = 2648,
                crop_top: int = 0, crop_bottom: int = 0) -> list[FrameLabel]:
    """Read a labels CSV. Image size and crop bands are not stored in the file."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != LABEL_FIELDS:
        raise SchemaError("labels CSV header does not match the expected columns")
    out = []
    for row in reader:
        xs = [_opt(row, f"x{c}") for c in "ABCD"]
        ys = [_opt(row, f"y{c}") for c in "ABCD"]
        corners = None if None in xs or None in ys else np.column_stack([xs, ys])
        bbox = tuple(_opt(row, k) for k in ("bbox_xmin", "bbox_ymin", "bbox_xmax", "bbox_ymax"))
        metrics = None
        if None not in bbox and row["fill_ratio"] != "":
            fill = float(row["fill_ratio"])
            area = fill * (bbox[2] - bbox[0]) * (bbox[3] - bbox[1])
            metrics = BoxMetrics(bbox, area, fill, float(row["aspect_ratio"]))
        pose = ApproachPose(*(float(row[k]) for k in (
            "along_track_m", "vertical_path_deg", "lateral_path_deg", "yaw_deg", "pitch_deg", "roll_deg")))
        out.append(FrameLabel(
            image_id=row["image_id"], airport_icao=row["airport_icao"], runway_id=row["runway_id"],
            corners=corners, metrics=metrics, visibility=Visibility(row["visibility"]),
            pose=pose, slant_distance_m=float(row["slant_distance_m"]),
            width=width, height=height, crop_top=crop_top, crop_bottom=crop_bottom,
        ))
    return out
