"""Scenario geometry: node placement, path loss and line-of-sight azimuths."""

import json
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig


def wrap_angle_deg(angle):
    """Wrap angles (degrees) onto (-180, 180]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + 180.0, 360.0) - 180.0
    wrapped = np.where(wrapped == -180.0, 180.0, wrapped)
    if np.isscalar(angle):
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class Scenario:
    """One deployment: AP positions, the RP grid and the test points."""

    ap_positions: np.ndarray   # (L, 3)
    rp_positions: np.ndarray   # (K, 2)
    test_points: np.ndarray    # (T, 2)
    config: ScenarioConfig

    def __post_init__(self):
        self.ap_positions.setflags(write=False)
        self.rp_positions.setflags(write=False)
        self.test_points.setflags(write=False)

    @property
    def num_aps(self) -> int:
        return self.ap_positions.shape[0]

    @property
    def num_rps(self) -> int:
        return self.rp_positions.shape[0]

    def to_json(self) -> str:
        payload = {
            "config": self.config.to_dict(),
            "ap_positions": self.ap_positions.tolist(),
            "rp_positions": self.rp_positions.tolist(),
            "test_points": self.test_points.tolist(),
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def rp_grid(area_side_m: float, num_rps: int) -> np.ndarray:
    """Cell centres of the uniform sqrt(K) x sqrt(K) partition of the area."""
    side = int(round(num_rps**0.5))
    step = area_side_m / side
    coords = (np.arange(side) + 0.5) * step
    xx, yy = np.meshgrid(coords, coords, indexing="xy")
    return np.column_stack([xx.ravel(), yy.ravel()])


def generate_scenario(config: ScenarioConfig, num_test_points: int = 100) -> Scenario:
    """Draw a deployment: APs and test points uniform in the area, RPs on the grid.

    Deterministic for a given (config, num_test_points): the draw order is APs
    first, then test points, from a generator seeded with ``config.seed``.
    """
    config.validate()
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    side = config.area_side_m
    ap_xy = rng.uniform(0.0, side, size=(config.num_aps, 2))
    ap_positions = np.column_stack([ap_xy, np.full(config.num_aps, config.ap_height_m)])
    test_points = rng.uniform(0.0, side, size=(num_test_points, 2))
    return Scenario(
        ap_positions=ap_positions,
        rp_positions=rp_grid(side, config.num_rps),
        test_points=test_points,
        config=config,
    )


def distance_3d(ap_position, location_xy, ue_height_m: float) -> float:
    """3-D distance from an AP (x, y, z) to a UE at ground location (x, y)."""
    ap = np.asarray(ap_position, dtype=float)
    loc = np.asarray(location_xy, dtype=float)
    dz = ap[2] - ue_height_m
    return float(np.hypot(np.hypot(loc[0] - ap[0], loc[1] - ap[1]), dz))


def pathloss_db(ap_position, location_xy, config: ScenarioConfig) -> float:
    """Log-distance path loss in dB at the 3-D AP-to-UE distance (no shadowing)."""
    d = distance_3d(ap_position, location_xy, config.ue_height_m)
    if d <= 0.0:
        raise ValueError("AP and UE positions coincide; path loss undefined")
    return config.pathloss_ref_db - 10.0 * config.pathloss_exp * np.log10(d)


def nominal_aoa_deg(ap_xy, location_xy) -> float:
    """Azimuth of the AP-to-UE line-of-sight path, degrees in (-180, 180]."""
    dx = location_xy[0] - ap_xy[0]
    dy = location_xy[1] - ap_xy[1]
    if dx == 0.0 and dy == 0.0:
        raise ValueError("UE location coincides with the AP in the plane")
    return wrap_angle_deg(np.degrees(np.arctan2(dy, dx)))
