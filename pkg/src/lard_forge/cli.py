"""``lard-forge`` command line: runway database -> scenarios -> labels -> statistics.

Subcommands: validate-db, gen-scenario, annotate, stats, pipeline.
Exit codes: 0 success, 2 validation failure, 3 I/O failure. Errors are
reported on stderr as a single JSON object.
"""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import scenario_io
from .annotation import annotate_frame
from .approach_cone import ConeParams, camera_to_pose
from .camera import intrinsic_from_fov
from .errors import LardError, ValidationError
from .generate import frame_id, generate_runway
from .qa_stats import check_claims, compute_stats, write_report
from .runway_db import read_runway_db, runway_frame

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 2, 3


@dataclass
class RunConfig:
    runway_db_path: str
    runways: list[str] | None = None  # "ICAO/RWY" keys; None selects all
    frames_per_runway: int = 450
    seed: int = 0
    cone: dict = field(default_factory=dict)
    width: int = 2448
    height: int = 2648
    fov_deg: float = 60.0
    fov_axis: str = "vertical"
    crop_top: int = 300
    crop_bottom: int = 300
    max_attempts: int = 100
    out_dir: str = "out"
    metadata_dir: str | None = None  # renderer metadata to annotate from
    export_kml: bool = False

    def __post_init__(self):
        if self.frames_per_runway < 1:
            raise ValidationError("frames_per_runway must be >= 1")
        if self.max_attempts < 1:
            raise ValidationError("max_attempts must be >= 1")

    @classmethod
    def from_file(cls, path, **overrides) -> "RunConfig":
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown config field(s): {sorted(unknown)}")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        base = path.parent
        for key in ("runway_db_path", "out_dir", "metadata_dir"):
            if raw.get(key) is not None and not Path(raw[key]).is_absolute():
                raw[key] = str(base / raw[key])
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ValidationError(f"invalid config: {exc}") from None

    @property
    def crop(self):
        return (self.crop_top, self.crop_bottom)


class Context:
    """Resolved inputs shared by the subcommands."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.params = ConeParams.from_dict(cfg.cone)
        self.intr = intrinsic_from_fov(cfg.width, cfg.height, cfg.fov_deg, cfg.fov_axis)
        text = Path(cfg.runway_db_path).read_text(encoding="utf-8")
        self.runways, self.problems = read_runway_db(text)
        if cfg.runways is not None:
            by_key = {r.key: r for r in self.runways}
            bad_keys = {k for _, k, _ in self.problems}
            missing = [k for k in cfg.runways if k not in by_key and k not in bad_keys]
            if missing:
                raise ValidationError(f"runway(s) not in database: {missing}")
            self.runways = [by_key[k] for k in cfg.runways if k in by_key]
            self.problems = [p for p in self.problems if p[1] in cfg.runways]

    def require_valid(self):
        if self.problems:
            detail = "; ".join(f"line {ln} ({key}): {why}" for ln, key, why in self.problems)
            raise ValidationError(f"invalid runway database: {detail}", self.problems)


def _scenario_name(r) -> str:
    return f"{r.airport_icao}_{r.runway_id}.json"


def cmd_validate_db(ctx: Context, dest: Path, out) -> int:
    for r in ctx.runways:
        frame = runway_frame(r)
        print(f"OK {r.key} heading={frame.heading:.3f}", file=out)
    for line, key, why in ctx.problems:
        print(f"FAIL {key} (line {line}): {why}", file=out)
    return EXIT_VALIDATION if ctx.problems else EXIT_OK


def cmd_gen_scenario(ctx: Context, dest: Path, out) -> int:
    ctx.require_valid()
    cfg = ctx.cfg
    scen_dir = dest / "scenarios"
    scen_dir.mkdir(parents=True, exist_ok=True)
    rejected = []
    for r in ctx.runways:
        frame = runway_frame(r)
        frames, rej = generate_runway(r, frame, ctx.params, ctx.intr, cfg.seed, cfg.frames_per_runway,
                                      cfg.crop, cfg.max_attempts)
        doc = scenario_io.emit_scenario(
            [g.camera for g in frames], ctx.intr, frame,
            frame_ids=[frame_id(r, g.slot) for g in frames],
            airport_icao=r.airport_icao, runway_id=r.runway_id,
        )
        scenario_io.write_scenario(scen_dir / _scenario_name(r), doc)
        if cfg.export_kml:
            (scen_dir / _scenario_name(r).replace(".json", ".kml")).write_text(
                scenario_io.export_kml(doc, name=r.key), encoding="utf-8")
        rejected += [dataclasses.asdict(x) for x in rej]
        print(f"{r.key}: {len(frames)} frames, {len(rej)} rejected slots", file=out)
    (dest / "rejected.json").write_text(json.dumps(rejected, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_annotate(ctx: Context, dest: Path, out, scen_dir: Path | None = None) -> int:
    ctx.require_valid()
    cfg = ctx.cfg
    if scen_dir is None:
        scen_dir = Path(cfg.metadata_dir) if cfg.metadata_dir else Path(cfg.out_dir) / "scenarios"
    labels = []
    for r in ctx.runways:
        frame = runway_frame(r)
        path = scen_dir / _scenario_name(r)
        doc = json.loads(path.read_text(encoding="utf-8"))
        ids = scenario_io.frame_ids(doc)
        for fid, cp in zip(ids, scenario_io.parse_metadata(doc, frame)):
            pose = camera_to_pose(cp, frame)
            labels.append(annotate_frame(pose, r, frame, ctx.intr, image_id=fid,
                                         crop_top=cfg.crop_top, crop_bottom=cfg.crop_bottom))
    scenario_io.write_labels(labels, dest)
    print(f"{len(labels)} labels written", file=out)
    return EXIT_OK


def cmd_stats(ctx: Context, dest: Path, out, labels_path: Path | None = None) -> int:
    cfg = ctx.cfg
    labels_path = labels_path or Path(cfg.out_dir) / "labels.csv"
    labels = scenario_io.read_labels(labels_path, cfg.width, cfg.height, cfg.crop_top, cfg.crop_bottom)
    report = compute_stats(labels)
    write_report(report, dest / "qa")
    if report.empty:
        print("EmptyDataset: no fully visible labels", file=out)
    for v in check_claims(report):
        status = "PASS" if v.passed else "FAIL"
        print(f"{status} {v.name}: {v.fraction:.4f} (threshold {v.threshold})", file=out)
    return EXIT_OK


def cmd_pipeline(ctx: Context, dest: Path, out) -> int:
    for step in (cmd_validate_db, cmd_gen_scenario):
        code = step(ctx, dest, out)
        if code:
            return code
    cmd_annotate(ctx, dest, out, scen_dir=dest / "scenarios")
    return cmd_stats(ctx, dest, out, labels_path=dest / "labels.csv")


COMMANDS = {
    "validate-db": cmd_validate_db,
    "gen-scenario": cmd_gen_scenario,
    "annotate": cmd_annotate,
    "stats": cmd_stats,
    "pipeline": cmd_pipeline,
}


@contextlib.contextmanager
def staged_output(out_dir: Path):
    """Write into a scratch directory; publish into ``out_dir`` only on success."""
    out_dir.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    try:
        yield stage
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    for src in sorted(stage.rglob("*")):
        if src.is_file():
            target = out_dir / src.relative_to(stage)
            target.parent.mkdir(parents=True, exist_ok=True)
            os.replace(src, target)
    shutil.rmtree(stage, ignore_errors=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lard-forge", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="RunConfig JSON file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory (overrides out_dir)")
    return parser


def _fail(code: int, exc: BaseException, subcommand: str) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "subcommand": subcommand, "exit_code": code}
    print(json.dumps(err), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config, seed=args.seed)
        if args.out is not None:
            cfg.out_dir = args.out
        ctx = Context(cfg)
        with staged_output(Path(cfg.out_dir)) as stage:
            code = COMMANDS[args.subcommand](ctx, stage, sys.stdout)
        return code
    except (LardError, ValueError) as exc:
        return _fail(EXIT_VALIDATION, exc, args.subcommand)
    except OSError as exc:
        return _fail(EXIT_IO, exc, args.subcommand)


if __name__ == "__main__":
    sys.exit(main())
