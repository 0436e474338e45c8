"""Exit criteria. Each test prints one PASS/FAIL line (visible without -s)."""
import json
import time

import numpy as np
import pytest

from lard_forge import cli
from lard_forge.annotation import Visibility, box_metrics, shoelace_area
from lard_forge.approach_cone import ApproachPose, ConeParams, pose_to_camera, sample_pose
from lard_forge.camera import Extrinsics, extrinsic_from_pose, intrinsic_from_fov, project_point, project_runway
from lard_forge.errors import BehindCamera
from lard_forge.generate import generate_runway
from lard_forge.geodesy import GeodeticPoint, ecef_to_geodetic_array, enu_frame_at, geodetic_to_ecef_array
from lard_forge.qa_stats import check_claims, compute_stats
from lard_forge.runway_db import runway_frame
from lard_forge.scenario_io import dumps_scenario, emit_scenario, parse_metadata, read_labels, write_labels

from conftest import sample_db_text
from oracles import project_direct_ecef

PARAMS = ConeParams()


@pytest.fixture
def report(capsys):
    def _report(n, name, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'} {name}: {detail}")
        assert ok, detail
    return _report


@pytest.fixture(scope="module")
def frames(sample_runways):
    return [runway_frame(r) for r in sample_runways]


def test_1_projection_oracle_equivalence(sample_runways, frames, intr, report):
    t0 = time.perf_counter()
    worst, compared, i = 0.0, 0, 0
    while compared < 1000:
        k = i % 3
        r, frame = sample_runways[k], frames[k]
        pose = sample_pose(PARAMS, 1001, i)
        i += 1
        try:
            uv = project_runway(intr, extrinsic_from_pose(pose_to_camera(pose, frame)), r, frame)
        except BehindCamera:
            continue
        ref = project_direct_ecef(r.corners_llh(), frame.aiming_point.as_array(), frame.heading,
                                  pose.as_tuple(), intr.fx, intr.fy, intr.cx, intr.cy)
        worst = max(worst, float(np.abs(uv - ref).max()))
        compared += 1
    elapsed = time.perf_counter() - t0
    report(1, "projection oracle equivalence", worst < 1e-3 and elapsed < 10.0,
           f"max |ENU path - direct ECEF| = {worst:.3e} px over {compared} poses in {elapsed:.2f} s")


def test_2_geodesy_round_trips(report):
    rng = np.random.default_rng(2)
    n = 10_000
    llh = np.column_stack([rng.uniform(-90, 90, n), rng.uniform(-180, 180, n), rng.uniform(-20_000, 20_000, n)])
    x = geodetic_to_ecef_array(llh)
    geo_err = float(np.linalg.norm(geodetic_to_ecef_array(ecef_to_geodetic_array(x)) - x, axis=1).max())
    enu_err = 0.0
    for j in range(n):
        f = enu_frame_at(GeodeticPoint(*llh[j]))
        q = f.origin_ecef + rng.uniform(-57_000, 57_000, 3)
        enu_err = max(enu_err, float(np.linalg.norm(f.enu_to_ecef(f.ecef_to_enu(q)) - q)))
    report(2, "geodesy round trips", geo_err < 1e-6 and enu_err < 1e-9,
           f"geodetic max {geo_err:.2e} m (< 1e-6), ENU max {enu_err:.2e} m (< 1e-9), {n} points")


def test_3_geometric_invariants(north_runway, north_frame, intr, report):
    rng = np.random.default_rng(3)
    failures = []

    mirror = 0.0
    for _ in range(200):
        pose = ApproachPose(rng.uniform(400, 5556), rng.uniform(-3.8, -2.2), 0.0, 0.0, rng.uniform(-8, 0), 0.0)
        uv = project_runway(intr, extrinsic_from_pose(pose_to_camera(pose, north_frame)), north_runway, north_frame)
        mirror = max(mirror, abs(uv[0, 0] + uv[1, 0] - 2 * intr.cx), abs(uv[2, 0] + uv[3, 0] - 2 * intr.cx))
    if mirror >= 1e-6:
        failures.append(f"mirror {mirror:.2e}")

    pp = 0.0
    for _ in range(200):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        q *= np.sign(np.linalg.det(q))
        extr = Extrinsics(q, rng.normal(size=3) * 1000)
        on_axis = extr.camera_center + q[2] * rng.uniform(1, 1e4)
        pp = max(pp, float(np.abs(project_point(intr, extr, on_axis) - [intr.cx, intr.cy]).max()))
    if pp >= 1e-6:
        failures.append(f"principal point {pp:.2e}")

    mono_bad = 0
    for _ in range(200):
        base = sample_pose(PARAMS, 33, int(rng.integers(1 << 30)))
        alongs = np.linspace(max(base.along_track_m, 600.0), 5556.0, 6)
        areas = []
        for a in alongs:
            pose = ApproachPose(a, *base.as_tuple()[1:])
            uv = project_runway(intr, extrinsic_from_pose(pose_to_camera(pose, north_frame)), north_runway, north_frame)
            areas.append(box_metrics(uv).bbox_area)
        mono_bad += int(np.any(np.diff(areas) >= 0))
    if mono_bad:
        failures.append(f"{mono_bad} non-monotone area sweeps")

    cyc = 0.0
    fill_bad = 0
    for _ in range(1000):
        pts = rng.uniform(-1000, 1000, (4, 2))
        c = pts.mean(axis=0)
        pts = pts[np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]))]
        a = shoelace_area(pts)
        for k in range(1, 4):
            cyc = max(cyc, abs(shoelace_area(np.roll(pts, k, axis=0)) - a))
        cyc = max(cyc, abs(shoelace_area(pts[::-1]) + a))
        fr = box_metrics(pts).fill_ratio
        fill_bad += int(not 0.0 < fr <= 1.0)
    if cyc >= 1e-6:
        failures.append(f"shoelace cyclic {cyc:.2e}")
    if fill_bad:
        failures.append(f"{fill_bad} fill ratios outside (0, 1]")

    report(3, "geometric invariants", not failures,
           "; ".join(failures) or f"mirror {mirror:.1e} px, principal point {pp:.1e} px, "
           "monotone area, shoelace cyclic/reversal, fill in (0,1]")


@pytest.fixture(scope="module")
def desk_scale(sample_runways, frames):
    intr = intrinsic_from_fov(2448, 2648, 60.0)
    t0 = time.perf_counter()
    generated, rejected = [], []
    for r, frame in zip(sample_runways, frames):
        got, rej = generate_runway(r, frame, PARAMS, intr, seed=42, n_frames=450, crop=(300, 300))
        generated += got
        rejected += rej
    return generated, rejected, time.perf_counter() - t0


def test_4_distributional_reproduction(desk_scale, report):
    generated, rejected, elapsed = desk_scale
    labels = [g.label for g in generated]
    verdicts = check_claims(compute_stats(labels))
    ok = (len(labels) == 1350 and not rejected
          and all(lb.visibility is Visibility.FULLY_VISIBLE for lb in labels)
          and all(v.passed for v in verdicts) and elapsed < 60.0)
    detail = ", ".join(f"{v.name}={v.fraction:.3f} (>= {v.threshold})" for v in verdicts)
    report(4, "distributional reproduction", ok,
           f"{len(labels)} fully visible frames, {len(rejected)} rejected, {detail}, {elapsed:.1f} s")


def test_5_cone_closure(desk_scale, tmp_path, report):
    generated, _, _ = desk_scale
    expected = np.array([g.camera.local for g in generated])
    mem = compute_stats([g.label for g in generated]).cone_points
    csv_path, _ = write_labels([g.label for g in generated], tmp_path)
    disk = compute_stats(read_labels(csv_path, crop_top=300, crop_bottom=300)).cone_points
    err_mem = float(np.abs(mem - expected).max())
    err_disk = float(np.abs(disk - expected).max())
    along = expected[:, 0]
    report(5, "cone closure", err_mem < 1e-6 and err_disk < 1e-6,
           f"max error {err_mem:.1e} m in memory, {err_disk:.1e} m from labels.csv; "
           f"along-track span {along.min():.0f}-{along.max():.0f} m")


def test_6_aiming_point_contract(sample_runways, frames, report):
    errs = []
    for r, frame in zip(sample_runways, frames):
        thr = frame.enu.geodetic_to_enu(r.threshold_midpoint().as_array())
        errs.append(abs(float(np.linalg.norm(thr)) - 300.0))
    report(6, "aiming point 300 m", max(errs) < 1e-6,
           f"max | |aim - threshold| - 300 | = {max(errs):.2e} m over {len(errs)} runways")


def test_7_pipeline_determinism(tmp_path, report, capsys):
    (tmp_path / "runways.csv").write_text(sample_db_text())
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"runway_db_path": "runways.csv", "seed": 42}))
    codes = [cli.main(["pipeline", "--config", str(cfg), "--out", str(tmp_path / d)]) for d in "ab"]
    files = ["labels.csv", "labels.jsonl"] + [
        f"scenarios/{n}.json" for n in ("LFBO_32L", "KJFK_04L", "LFMN_04R")]
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    report(7, "pipeline determinism", codes == [0, 0] and same,
           f"exit codes {codes}, {len(files)} artifacts byte-identical: {same}")


def test_8_format_round_trips(sample_runways, frames, desk_scale, tmp_path, report):
    intr = intrinsic_from_fov(2448, 2648, 60.0)
    pos_err = ang_err = 0.0
    for k in range(3):
        poses = [pose_to_camera(sample_pose(PARAMS, 808, i), frames[k]) for i in range(334)]
        parsed = parse_metadata(dumps_scenario(emit_scenario(poses, intr, frames[k])), frames[k])
        for a, b in zip(poses, parsed):
            pos_err = max(pos_err, float(np.linalg.norm(a.enu - b.enu)))
            ang_err = max(ang_err, abs((a.heading_deg - b.heading_deg + 180) % 360 - 180),
                          abs(a.pitch_deg - b.pitch_deg), abs(a.roll_deg - b.roll_deg))
    labels = [g.label for g in desk_scale[0]]
    first, _ = write_labels(labels, tmp_path / "a")
    second, _ = write_labels(read_labels(first), tmp_path / "b")
    identical = first.read_bytes() == second.read_bytes()
    report(8, "format round trips", pos_err < 1e-6 and ang_err < 1e-9 and identical,
           f"scenario position {pos_err:.1e} m, angle {ang_err:.1e} deg over 1002 poses; "
           f"labels write-read-write identical: {identical}")
