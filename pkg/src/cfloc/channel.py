"""Narrowband uplink channel: ULA steering, disk-scatter statistics, synthesis.

Scatterers around the UE are modelled as a disk seen under a single-sided
angular spread. Projecting a uniformly filled disk onto the array axis gives
a semicircle density for the per-path angle perturbation; its characteristic
function is what produces the Bessel-weighted covariance used throughout.
"""

from dataclasses import dataclass

import numpy as np

from .bessel import bessel_j
from .config import ScenarioConfig


def steering_vector(theta_deg, num_antennas: int, d_over_lambda: float) -> np.ndarray:
    """ULA steering vector a(theta); element n is exp(-j*2*pi*(d/lambda)*n*cos(theta))."""
    n = np.arange(num_antennas)
    phase = -2j * np.pi * d_over_lambda * n * np.cos(np.deg2rad(theta_deg))
    return np.exp(phase)


def _steering_matrix(theta_deg, num_antennas, d_over_lambda):
    # rows: angles, columns: antennas
    theta = np.atleast_1d(np.asarray(theta_deg, dtype=float))
    n = np.arange(num_antennas)
    return np.exp(-2j * np.pi * d_over_lambda * np.outer(np.cos(np.deg2rad(theta)), n))


@dataclass(frozen=True)
class ChannelStats:
    """Large-scale state of one AP/UE link.

    ``disk_cov`` is the closed-form received-signal covariance; callers that
    only synthesize signals may leave it as None.
    """

    beta_linear: float
    nominal_aoa_deg: float
    disk_cov: np.ndarray | None = None


def scaling_matrix(num_antennas: int, zeta: float) -> np.ndarray:
    """Entrywise correlation loss G with [G]_mn = J0((m-n) zeta) + J2((m-n) zeta)."""
    mn = np.subtract.outer(np.arange(num_antennas), np.arange(num_antennas)).astype(float)
    x = mn * zeta
    return bessel_j(0, x) + bessel_j(2, x)


def disk_covariance(beta_linear: float, theta_deg: float, config: ScenarioConfig) -> np.ndarray:
    """Received-signal covariance rho*beta*G(zeta) ⊙ a a^H + sigma_n^2 I (z = 1)."""
    return _disk_covariance_raw(
        beta_linear,
        theta_deg,
        config.num_antennas,
        config.antenna_spacing_wavelengths,
        config.angular_spread_deg,
        config.tx_power_mw,
        config.noise_power_mw,
    )


def _disk_covariance_raw(beta, theta_deg, num_antennas, d_over_lambda,
                         angular_spread_deg, tx_power_mw, noise_power_mw):
    spread = np.deg2rad(angular_spread_deg)
    zeta = 2.0 * np.pi * d_over_lambda * spread * np.sin(np.deg2rad(theta_deg))
    g = scaling_matrix(num_antennas, zeta)
    a = steering_vector(theta_deg, num_antennas, d_over_lambda)
    cov = tx_power_mw * beta * g * np.outer(a, a.conj())
    cov[np.diag_indices_from(cov)] += noise_power_mw
    return cov


def channel_stats(scenario, ap_index: int, location_xy, shadow_db: float) -> ChannelStats:
    """Assemble beta (path loss + shadowing), azimuth and disk covariance."""
    from .geometry import nominal_aoa_deg, pathloss_db  # local import avoids a cycle

    cfg = scenario.config
    ap = scenario.ap_positions[ap_index]
    beta_db = pathloss_db(ap, location_xy, cfg) + shadow_db
    beta = 10.0 ** (beta_db / 10.0)
    theta = nominal_aoa_deg(ap[:2], location_xy)
    return ChannelStats(
        beta_linear=beta,
        nominal_aoa_deg=theta,
        disk_cov=disk_covariance(beta, theta, cfg),
    )


def semicircle_angles_deg(spread_deg: float, size, rng) -> np.ndarray:
    """Per-path angle offsets: axis projection of uniform points on a disk."""
    radius = np.sqrt(rng.uniform(0.0, 1.0, size=size))
    azimuth = rng.uniform(0.0, 2.0 * np.pi, size=size)
    return spread_deg * radius * np.cos(azimuth)


def sample_received_signal(stats: ChannelStats, config: ScenarioConfig, rng,
                           num_blocks: int | None = None,
                           num_paths: int = 200) -> np.ndarray:
    """Synthesize pilot blocks Y = sqrt(rho) h psi^H + W, shape (S, N, z).

    Each block gets an independent channel draw: ``num_paths`` scattering
    paths with CN(0, 1) gains at angles (nominal + disk offset), plus AWGN
    with per-entry variance equal to the effective noise power. The pilot is
    the all-ones vector of length z (so ||psi||^2 = z).
    """
    cfg = config
    s = cfg.rss_samples if num_blocks is None else int(num_blocks)
    n = cfg.num_antennas
    z = cfg.pilot_length
    m = int(num_paths)

    gains = (rng.standard_normal((s, m)) + 1j * rng.standard_normal((s, m))) / np.sqrt(2.0)
    offsets = semicircle_angles_deg(cfg.angular_spread_deg, (s, m), rng)
    angles = stats.nominal_aoa_deg + offsets
    # element n of a(theta) is w^n with w = exp(-j*2*pi*(d/lambda)*cos(theta));
    # accumulating powers avoids an (S, M, N) complex-exp tensor
    w = np.exp(-2j * np.pi * cfg.antenna_spacing_wavelengths * np.cos(np.deg2rad(angles)))
    h = np.empty((s, n), dtype=complex)
    acc = gains.copy()
    h[:, 0] = acc.sum(axis=1)
    for antenna in range(1, n):
        acc *= w
        h[:, antenna] = acc.sum(axis=1)
    h *= np.sqrt(stats.beta_linear / m)

    noise_scale = np.sqrt(cfg.noise_power_mw / 2.0)
    w = noise_scale * (rng.standard_normal((s, n, z)) + 1j * rng.standard_normal((s, n, z)))
    pilot = np.ones(z)
    return np.sqrt(cfg.tx_power_mw) * h[:, :, None] * pilot[None, None, :] + w
