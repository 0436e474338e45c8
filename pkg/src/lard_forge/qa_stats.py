"""Dataset-quality statistics over a set of frame labels.

Histograms use fixed bin edges so reports from different runs line up.
Values outside a histogram's range are counted in its first or last bin,
which keeps every histogram's total equal to the number of usable labels.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .annotation import Visibility
from .approach_cone import local_position

HIST_SPECS = {
    "aspect": (30, 0.0, 3.0),
    "fill": (20, 0.0, 1.0),
    "area_log10": (30, 1.0, 7.0),
    "slant": (30, 0.0, 6000.0),
}


@dataclass(frozen=True)
class ClaimThresholds:
    aspect_range: tuple[float, float] = (0.5, 1.5)
    aspect_min_fraction: float = 0.70
    fill_range: tuple[float, float] = (0.2, 0.8)
    fill_min_fraction: float = 0.70
    min_bbox_area_px2: float = 625.0
    area_min_fraction: float = 0.95


@dataclass(frozen=True)
class ClaimVerdict:
    name: str
    fraction: float
    threshold: float
    passed: bool


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    @classmethod
    def of(cls, values, bins, lo, hi) -> "Histogram":
        edges = np.linspace(lo, hi, bins + 1)
        v = np.clip(np.asarray(values, dtype=float), lo, hi)
        counts, _ = np.histogram(v, bins=edges)
        return cls(edges, counts.astype(np.int64))

    def __add__(self, other: "Histogram") -> "Histogram":
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("cannot merge histograms with different edges")
        return Histogram(self.edges, self.counts + other.counts)

    def to_rows(self):
        return [(float(self.edges[i]), float(self.edges[i + 1]), int(c)) for i, c in enumerate(self.counts)]


@dataclass
class QaReport:
    n_labels: int
    n_usable: int  # FullyVisible labels
    n_clipped: int
    n_behind: int
    center_points: np.ndarray  # (n, 2) normalized bbox centers
    aspect: np.ndarray  # per-label raw values, kept for exact claim checks
    fill: np.ndarray
    bbox_area: np.ndarray
    slant: np.ndarray
    cone_points: np.ndarray  # (n, 3) along, cross, height
    histograms: dict[str, Histogram] = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return self.n_usable == 0

    def merge(self, other: "QaReport") -> "QaReport":
        """Combine two partial reports (order of the per-label arrays follows the arguments)."""
        cat = np.concatenate
        return QaReport(
            n_labels=self.n_labels + other.n_labels,
            n_usable=self.n_usable + other.n_usable,
            n_clipped=self.n_clipped + other.n_clipped,
            n_behind=self.n_behind + other.n_behind,
            center_points=cat([self.center_points, other.center_points]),
            aspect=cat([self.aspect, other.aspect]),
            fill=cat([self.fill, other.fill]),
            bbox_area=cat([self.bbox_area, other.bbox_area]),
            slant=cat([self.slant, other.slant]),
            cone_points=cat([self.cone_points, other.cone_points]),
            histograms={k: self.histograms[k] + other.histograms[k] for k in HIST_SPECS},
        )

    def summary(self) -> dict:
        return {
            "n_labels": self.n_labels,
            "n_fully_visible": self.n_usable,
            "n_clipped": self.n_clipped,
            "n_behind_camera": self.n_behind,
            "empty_dataset": self.empty,
        }


def compute_stats(labels) -> QaReport:
    labels = list(labels)
    usable = [lb for lb in labels if lb.visibility is Visibility.FULLY_VISIBLE and lb.metrics is not None]
    centers, aspect, fill, area, slant, cone = [], [], [], [], [], []
    for lb in usable:
        x0, y0, x1, y1 = lb.metrics.bbox
        centers.append((0.5 * (x0 + x1) / lb.width, 0.5 * (y0 + y1) / lb.height))
        aspect.append(lb.metrics.aspect_ratio)
        fill.append(lb.metrics.fill_ratio)
        area.append(lb.metrics.bbox_area)
        slant.append(lb.slant_distance_m)
        cone.append(local_position(lb.pose))
    aspect_a, fill_a, area_a, slant_a = (np.asarray(x, dtype=float) for x in (aspect, fill, area, slant))
    with np.errstate(divide="ignore"):
        log_area = np.log10(area_a) if area_a.size else area_a
    hists = {
        "aspect": Histogram.of(aspect_a, *HIST_SPECS["aspect"]),
        "fill": Histogram.of(fill_a, *HIST_SPECS["fill"]),
        "area_log10": Histogram.of(log_area, *HIST_SPECS["area_log10"]),
        "slant": Histogram.of(slant_a, *HIST_SPECS["slant"]),
    }
    return QaReport(
        n_labels=len(labels),
        n_usable=len(usable),
        n_clipped=sum(lb.visibility is Visibility.CLIPPED for lb in labels),
        n_behind=sum(lb.visibility is Visibility.BEHIND_CAMERA for lb in labels),
        center_points=np.asarray(centers, dtype=float).reshape(-1, 2),
        aspect=aspect_a, fill=fill_a, bbox_area=area_a, slant=slant_a,
        cone_points=np.asarray(cone, dtype=float).reshape(-1, 3),
        histograms=hists,
    )


def _fraction(mask) -> float:
    return float(np.mean(mask)) if np.size(mask) else 0.0


def check_claims(report: QaReport, thresholds: ClaimThresholds = ClaimThresholds()) -> list[ClaimVerdict]:
    t = thresholds
    lo, hi = t.aspect_range
    f_aspect = _fraction((report.aspect >= lo) & (report.aspect <= hi))
    lo, hi = t.fill_range
    f_fill = _fraction((report.fill >= lo) & (report.fill <= hi))
    f_area = _fraction(report.bbox_area > t.min_bbox_area_px2)
    return [
        ClaimVerdict("aspect_ratio_in_range", f_aspect, t.aspect_min_fraction, f_aspect >= t.aspect_min_fraction),
        ClaimVerdict("fill_ratio_in_range", f_fill, t.fill_min_fraction, f_fill >= t.fill_min_fraction),
        ClaimVerdict("bbox_area_above_min", f_area, t.area_min_fraction, f_area >= t.area_min_fraction),
    ]


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows([[repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row] for row in rows])
    return buf.getvalue()


def write_report(report: QaReport, out_dir, thresholds: ClaimThresholds = ClaimThresholds()) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    verdicts = check_claims(report, thresholds)
    doc = {
        **report.summary(),
        "histograms": {
            k: {"edges": h.edges.tolist(), "counts": h.counts.tolist()} for k, h in report.histograms.items()
        },
        "claims": [
            {"name": v.name, "fraction": v.fraction, "threshold": v.threshold, "passed": v.passed}
            for v in verdicts
        ],
    }
    files = {
        "qa_report.json": json.dumps(doc, indent=2) + "\n",
        "centers.csv": _csv(["u_norm", "v_norm"], report.center_points.tolist()),
        "aspect_hist.csv": _csv(["bin_lo", "bin_hi", "count"], report.histograms["aspect"].to_rows()),
        "fill_hist.csv": _csv(["bin_lo", "bin_hi", "count"], report.histograms["fill"].to_rows()),
        "area_hist.csv": _csv(["log10_area_lo", "log10_area_hi", "count"], report.histograms["area_log10"].to_rows()),
        "slant_hist.csv": _csv(["slant_m_lo", "slant_m_hi", "count"], report.histograms["slant"].to_rows()),
        "cone_points.csv": _csv(["along_m", "cross_m", "height_m"], report.cone_points.tolist()),
    }
    paths = []
    for name, text in files.items():
        p = out / name
        p.write_text(text, encoding="utf-8")
        paths.append(p)
    return paths
