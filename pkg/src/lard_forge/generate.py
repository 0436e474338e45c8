"""Per-runway frame generation with visibility-driven resampling."""
from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .annotation import FrameLabel, Visibility, annotate_frame
from .approach_cone import ApproachPose, CameraPose, ConeParams, pose_to_camera, sample_pose
from .camera import Intrinsics
from .runway_db import RunwayDefinition, RunwayFrame

THREADS_ENV = "LARD_FORGE_THREADS"


@dataclass(frozen=True)
class GeneratedFrame:
    slot: int
    attempt: int
    pose: ApproachPose
    camera: CameraPose
    label: FrameLabel


@dataclass(frozen=True)
class RejectedSlot:
    runway: str
    slot: int
    attempts: int
    last_visibility: str


def runway_seed(seed: int, runway_key: str) -> int:
    """Independent 64-bit stream seed per runway, stable under runway selection changes."""
    digest = hashlib.sha256(f"{int(seed)}:{runway_key}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def frame_id(r: RunwayDefinition, slot: int) -> str:
    return f"{r.airport_icao}_{r.runway_id}_{slot:05d}"


def _fill_slot(r, frame, params, intr, seed, slot, crop, max_attempts):
    label = None
    for attempt in range(max_attempts):
        pose = sample_pose(params, seed, slot, attempt=attempt)
        label = annotate_frame(pose, r, frame, intr, image_id=frame_id(r, slot),
                               crop_top=crop[0], crop_bottom=crop[1])
        if label.visibility is Visibility.FULLY_VISIBLE:
            return GeneratedFrame(slot, attempt, pose, pose_to_camera(pose, frame), label)
    return RejectedSlot(r.key, slot, max_attempts, label.visibility.value if label else "")


def generate_runway(
    r: RunwayDefinition,
    frame: RunwayFrame,
    params: ConeParams,
    intr: Intrinsics,
    seed: int,
    n_frames: int,
    crop: tuple[int, int] = (300, 300),
    max_attempts: int = 100,
    threads: int | None = None,
):
    """Return ``(frames, rejected)`` for one runway.

    Each slot is resampled until its runway is fully visible, up to
    ``max_attempts`` draws; slots that never succeed are reported in
    ``rejected``. Output order is by slot regardless of thread count.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    rseed = runway_seed(seed, r.key)
    job = lambda slot: _fill_slot(r, frame, params, intr, rseed, slot, crop, max_attempts)
    threads = threads or worker_count()
    if threads == 1:
        results = [job(s) for s in range(n_frames)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, range(n_frames)))
    frames = [x for x in results if isinstance(x, GeneratedFrame)]
    rejected = [x for x in results if isinstance(x, RejectedSlot)]
    return frames, rejected
