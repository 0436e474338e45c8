"""Desk-scale dataset-quality run, plus a runway-slenderness sweep.

Generates N fully visible frames per sample runway with the default cone,
prints the claim fractions, and then repeats the aspect-ratio measurement
on flat synthetic runways of varying width/length to show how strongly
that claim depends on runway geometry.

    python scripts/desk_scale_experiment.py [--frames 450] [--seed 42] [--out DIR]
"""
import argparse
import time
from importlib import resources

from lard_forge.approach_cone import ConeParams
from lard_forge.camera import intrinsic_from_fov
from lard_forge.generate import generate_runway
from lard_forge.geodesy import GeodeticPoint
from lard_forge.qa_stats import check_claims, compute_stats, write_report
from lard_forge.runway_db import load_runway_db, rectangular_runway, runway_frame

SWEEP = [(30, 1800), (45, 2500), (45, 3000), (45, 3500), (45, 4000), (60, 3000), (60, 4000)]


def labels_for(runways, params, intr, seed, n):
    labels = []
    for r in runways:
        frames, rejected = generate_runway(r, runway_frame(r), params, intr, seed, n)
        if rejected:
            print(f"  {r.key}: {len(rejected)} slots rejected")
        labels += [g.label for g in frames]
    return labels


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--frames", type=int, default=450)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--fov", type=float, default=60.0)
    ap.add_argument("--out", default=None, help="write the QA report here")
    args = ap.parse_args()

    params = ConeParams()
    intr = intrinsic_from_fov(2448, 2648, args.fov)
    text = resources.files("lard_forge").joinpath("data/sample_runways.csv").read_text(encoding="utf-8")
    runways = load_runway_db(text)

    t0 = time.perf_counter()
    report = compute_stats(labels_for(runways, params, intr, args.seed, args.frames))
    print(f"sample database: {report.n_usable} frames in {time.perf_counter() - t0:.1f} s")
    for v in check_claims(report):
        print(f"  {'PASS' if v.passed else 'FAIL'} {v.name}: {v.fraction:.3f} (threshold {v.threshold})")
    if args.out:
        write_report(report, args.out)

    print("\naspect ratio in [0.5, 1.5] vs runway size (single runway, 3 seeds):")
    for width, length in SWEEP:
        r = rectangular_runway("SWEE", "01", GeodeticPoint(45.0, 5.0, 100.0), 30.0, width, length)
        labels = []
        for seed in range(3):
            labels += labels_for([r], params, intr, seed, args.frames)
        aspect, fill, _ = check_claims(compute_stats(labels))
        print(f"  {width:3d} m x {length:4d} m  (L/W {length / width:5.1f}): "
              f"aspect {aspect.fraction:.3f}  fill {fill.fraction:.3f}")


if __name__ == "__main__":
    main()
