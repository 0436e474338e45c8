from importlib import resources

import pytest

from lard_forge.camera import intrinsic_from_fov
from lard_forge.geodesy import GeodeticPoint
from lard_forge.runway_db import load_runway_db, rectangular_runway, runway_frame


def sample_db_text():
    return resources.files("lard_forge").joinpath("data/sample_runways.csv").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def sample_runways():
    return load_runway_db(sample_db_text())


@pytest.fixture(scope="session")
def north_runway():
    """45 m x 3000 m runway landing due north at 43N 0E."""
    return rectangular_runway("TEST", "36", GeodeticPoint(43.0, 0.0, 0.0), 0.0, 45.0, 3000.0)


@pytest.fixture(scope="session")
def north_frame(north_runway):
    return runway_frame(north_runway)


@pytest.fixture(scope="session")
def intr():
    return intrinsic_from_fov(2448, 2648, 60.0)
