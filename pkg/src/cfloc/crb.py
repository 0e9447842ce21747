"""Cramer-Rao bound for azimuth estimation under the disk-scatter covariance.

The Fisher information for the azimuth of a Gaussian received signal with
covariance R(phi) is tr(R^-1 dR R^-1 dR); with S independent measurement
snapshots the bound on the estimator variance is 1/(S * F).

The derivative dR/dphi is the analytic derivative of the disk covariance
actually used by the simulator (verified against central finite differences
in the test suite):

  dG_mn = -(pi d/lambda) (m-n) spread cos(phi) (J1 + J3)((m-n) zeta)
  da/dphi = +j (2 pi d/lambda) sin(phi) D a,   D = diag(0..N-1)
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .bessel import bessel_j
from .channel import _disk_covariance_raw, steering_vector
from .geometry import wrap_angle_deg

RAD2_TO_DEG2 = (180.0 / np.pi) ** 2


@dataclass(frozen=True)
class CrbConfig:
    """Inputs of the bound: array, disk-spread and SNR state of one link."""

    num_antennas: int
    d_over_lambda: float
    angular_spread_deg: float
    tx_power_mw: float
    beta_linear: float
    noise_power_mw: float
    theta_deg: float
    num_measurements: int = 200

    def __post_init__(self):
        if self.num_measurements < 1:
            raise ValueError("num_measurements must be >= 1")


def disk_covariance_derivative(cfg: CrbConfig) -> np.ndarray:
    """dR/dphi (per radian) of the disk covariance at cfg.theta_deg."""
    n = cfg.num_antennas
    dol = cfg.d_over_lambda
    spread = np.deg2rad(cfg.angular_spread_deg)
    phi = np.deg2rad(cfg.theta_deg)
    zeta = 2.0 * np.pi * dol * spread * np.sin(phi)

    mn = np.subtract.outer(np.arange(n), np.arange(n)).astype(float)
    x = mn * zeta
    g = bessel_j(0, x) + bessel_j(2, x)
    g_dot = -np.pi * dol * mn * spread * np.cos(phi) * (bessel_j(1, x) + bessel_j(3, x))

    a = steering_vector(cfg.theta_deg, n, dol)
    a_dot = 1j * 2.0 * np.pi * dol * np.sin(phi) * np.arange(n) * a

    outer = np.outer(a, a.conj())
    outer_dot = np.outer(a_dot, a.conj()) + np.outer(a, a_dot.conj())
    scale = cfg.tx_power_mw * cfg.beta_linear
    return scale * (g_dot * outer + g * outer_dot)


def _covariance(cfg: CrbConfig) -> np.ndarray:
    return _disk_covariance_raw(
        cfg.beta_linear, cfg.theta_deg, cfg.num_antennas, cfg.d_over_lambda,
        cfg.angular_spread_deg, cfg.tx_power_mw, cfg.noise_power_mw,
    )


def fisher_information(cfg: CrbConfig) -> float:
    """Scalar Fisher information tr(R^-1 dR R^-1 dR) via Cholesky solves."""
    cov = _covariance(cfg)
    deriv = disk_covariance_derivative(cfg)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("disk covariance is not positive definite") from exc
    half = cho_solve((chol, True), deriv)  # R^-1 dR
    return float(np.trace(half @ half).real)


def crb_aoa_variance(cfg: CrbConfig) -> float:
    """Bound on azimuth-estimate variance in rad^2: (S * F)^-1."""
    info = fisher_information(cfg)
    if not np.isfinite(info) or info <= 0.0:
        raise ValueError(
            f"Fisher information is {info!r} at theta={cfg.theta_deg} deg; the bound "
            "degenerates near array endfire or for a zero-sensitivity geometry"
        )
    return 1.0 / (cfg.num_measurements * info)


def crb_aoa_variance_deg2(cfg: CrbConfig) -> float:
    """Convenience conversion of the bound to degrees^2."""
    return crb_aoa_variance(cfg) * RAD2_TO_DEG2


def crb_noised_aoa(true_aoa_deg: float, v_crb_deg2: float, rng) -> float:
    """True azimuth plus N(0, v_crb) noise (degrees), wrapped to (-180, 180]."""
    if v_crb_deg2 <= 0:
        raise ValueError("v_crb_deg2 must be positive")
    return wrap_angle_deg(true_aoa_deg + np.sqrt(v_crb_deg2) * rng.standard_normal())
