import datetime as dt

import pytest

from debias.core_model import Kind
from debias.synthgen import DeviceSpec, GroupSpec, SceneSpec, generate_scene


def two_zone_spec(sigma: float = 0.0, seed: int = 42, n_days: int = 30,
                  hours: tuple[int, ...] = tuple(range(24)),
                  coarse_factor: int = 1) -> SceneSpec:
    """Two bias zones split at x=0, 3 stations + 4 sensors on the x-axis.

    All devices are collinear so both the stations-only and the all-devices
    Voronoi partitions are vertical strips that respect the x=0 split; every
    fitted zone then lies inside a single truth zone, making zero-noise
    scenes exactly recoverable.
    """
    return SceneSpec(
        ncols=60, nrows=30, xllcorner=-60.0, yllcorner=-30.0, cellsize=2.0,
        devices=[
            DeviceSpec("S1", Kind.STATION, -30.0, 0.5, "left"),
            DeviceSpec("S2", Kind.STATION, 30.0, 0.5, "right"),
            DeviceSpec("S3", Kind.STATION, 50.0, 0.5, "right"),
            DeviceSpec("M1", Kind.SENSOR, -20.0, 0.5, "left", alpha=1.2, beta=5.0),
            DeviceSpec("M2", Kind.SENSOR, -10.0, 0.5, "left", alpha=0.8, beta=-2.0),
            DeviceSpec("M3", Kind.SENSOR, 10.0, 0.5, "right", alpha=1.5, beta=3.0),
            DeviceSpec("M4", Kind.SENSOR, 20.0, 0.5, "right", alpha=0.9, beta=0.0),
        ],
        groups={"left": GroupSpec(C=5.0, rho=0.4),
                "right": GroupSpec(C=-3.0, rho=-0.25)},
        start_date=dt.date(2017, 1, 1), n_days=n_days, hours=hours,
        sigma=sigma, seed=seed, coarse_factor=coarse_factor,
    )


@pytest.fixture(scope="session")
def exact_scene():
    """Zero-noise two-zone scene, shared across tests (read-only)."""
    return generate_scene(two_zone_spec())
