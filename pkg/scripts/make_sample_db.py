"""Write the three-runway sample database used by the tests and demo config.

Geometry is rectangular and flat, built from an approximate threshold
position, true heading and nominal dimensions; it is not surveyed data.
"""
import argparse
from pathlib import Path

from lard_forge.geodesy import GeodeticPoint
from lard_forge.runway_db import dump_runway_db, load_runway_db, rectangular_runway

SAMPLE = [
    # icao, runway, threshold (lat, lon, alt), true heading, width, length
    ("LFBO", "32L", (43.6117, 1.3784, 150.0), 323.0, 45.0, 3000.0),
    ("KJFK", "04L", (40.6228, -73.7858, 4.0), 31.0, 61.0, 3682.0),
    ("LFMN", "04R", (43.6545, 7.2035, 4.0), 44.0, 45.0, 2960.0),
]


def sample_runways():
    return [
        rectangular_runway(icao, rwy, GeodeticPoint(*thr), hdg, w, length)
        for icao, rwy, thr, hdg, w, length in SAMPLE
    ]


def main():
    default = Path(__file__).resolve().parents[1] / "src" / "lard_forge" / "data" / "sample_runways.csv"
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=default)
    args = ap.parse_args()
    text = dump_runway_db(sample_runways())
    load_runway_db(text)  # refuse to write an invalid database
    args.out.write_text(text, encoding="utf-8")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
