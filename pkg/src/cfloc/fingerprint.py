"""Fingerprint extraction: averaged RSS, surveyed azimuths, and MUSIC.

Offline, each AP pairs an averaged received-signal-strength value with a
geometrically surveyed azimuth for every RP. Online, RSS is extracted the
same way while the azimuth comes from a MUSIC scan of the pilot blocks'
sample covariance.
"""

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import wrap_angle_deg

MUSIC_GRID_STEP_DEG = 0.05


@dataclass(frozen=True)
class FingerprintDB:
    """Offline database of one AP: per-RP (RSS dB, azimuth deg) features."""

    ap_index: int
    rss_db: np.ndarray      # (K,)
    aoa_deg: np.ndarray     # (K,)
    rp_positions: np.ndarray  # (K, 2)

    @property
    def hybrid(self) -> np.ndarray:
        """K x 2 feature matrix [rss_db, aoa_deg]."""
        return np.column_stack([self.rss_db, self.aoa_deg])

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rp_index", "x", "y", "rss_db", "aoa_deg"])
            for k in range(len(self.rss_db)):
                writer.writerow([
                    k,
                    f"{self.rp_positions[k, 0]:.10g}",
                    f"{self.rp_positions[k, 1]:.10g}",
                    f"{self.rss_db[k]:.10g}",
                    f"{self.aoa_deg[k]:.10g}",
                ])

    @classmethod
    def from_csv(cls, path, ap_index: int = 0) -> "FingerprintDB":
        rows = []
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                rows.append((float(row["x"]), float(row["y"]),
                             float(row["rss_db"]), float(row["aoa_deg"])))
        arr = np.asarray(rows, dtype=float)
        return cls(ap_index=ap_index, rss_db=arr[:, 2], aoa_deg=arr[:, 3],
                   rp_positions=arr[:, :2])


class TestObservation(NamedTuple):
    """Online features seen by one AP for the point under localization."""

    ap_index: int
    rss_db: float
    aoa_deg: float

    __test__ = False  # not a pytest class, despite the Test* name


def estimate_rss_db(blocks: np.ndarray, tx_power_mw: float) -> float:
    """Averaged signal strength over pilot blocks, in dB relative to tx power.

    ``blocks`` has shape (S, N, z); the estimate is mean_s ||Y_s||_F^2
    normalised by the transmit power.
    """
    power = float(np.mean(np.sum(np.abs(blocks) ** 2, axis=(1, 2))))
    if power <= 0.0:
        raise ValueError("received power is zero; RSS undefined in dB")
    return 10.0 * np.log10(power / tx_power_mw)


def offline_aoa_deg(ap_xy, rp_xy, noise_std_deg: float, rng) -> float:
    """Surveyed azimuth: the true LOS angle plus Gaussian measurement noise."""
    from .geometry import nominal_aoa_deg

    nominal = nominal_aoa_deg(ap_xy, rp_xy)
    return wrap_angle_deg(nominal + noise_std_deg * rng.standard_normal())


class MusicResult(NamedTuple):
    angle_deg: float
    degenerate: bool


def music_search_grid(step_deg: float = MUSIC_GRID_STEP_DEG) -> np.ndarray:
    """Scan angles strictly inside (0, 180) degrees, the ULA's unambiguous cone."""
    count = int(round(180.0 / step_deg))
    return (np.arange(count) + 0.5) * step_deg


class MusicAoaEstimator:
    """MUSIC azimuth scan for a single pilot source on a ULA.

    The steering responses over the search grid are precomputed once, so one
    instance can be reused across many covariance estimates (one per AP and
    test point in a simulation run).
    """

    def __init__(self, num_antennas: int, d_over_lambda: float,
                 grid_step_deg: float = MUSIC_GRID_STEP_DEG):
        if num_antennas < 2:
            raise ValueError("MUSIC needs at least 2 antennas")
        self.num_antennas = num_antennas
        self.grid_deg = music_search_grid(grid_step_deg)
        n = np.arange(num_antennas)
        self._steer = np.exp(
            -2j * np.pi * d_over_lambda
            * np.outer(np.cos(np.deg2rad(self.grid_deg)), n)
        )  # (grid, N)

    def sample_covariance(self, blocks: np.ndarray) -> np.ndarray:
        s = blocks.shape[0]
        flat = blocks.reshape(s, self.num_antennas, -1)
        return np.einsum("snz,smz->nm", flat, flat.conj()) / s

    def estimate(self, blocks: np.ndarray) -> MusicResult:
        cov = self.sample_covariance(blocks)
        eigvals, eigvecs = np.linalg.eigh(cov)
        spread = eigvals[-1] - eigvals[0]
        degenerate = bool(spread <= 1e-12 * max(abs(eigvals[-1]), 1e-300))
        noise_basis = eigvecs[:, :-1]  # all but the dominant eigenvector
        proj = self._steer.conj() @ noise_basis
        denom = np.sum(np.abs(proj) ** 2, axis=1)
        idx = int(np.argmin(denom))  # max pseudospectrum = min denominator
        return MusicResult(float(self.grid_deg[idx]), degenerate)


def music_aoa_deg(blocks: np.ndarray, num_antennas: int, d_over_lambda: float,
                  grid_step_deg: float = MUSIC_GRID_STEP_DEG) -> float:
    """One-shot MUSIC estimate in degrees, restricted to (0, 180)."""
    return MusicAoaEstimator(num_antennas, d_over_lambda, grid_step_deg).estimate(blocks).angle_deg


def fold_to_ula_cone_deg(angle_deg):
    """Map an azimuth onto the ULA's cone of ambiguity [0, 180]."""
    return np.abs(wrap_angle_deg(angle_deg))
