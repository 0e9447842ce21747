"""Spatially correlated log-normal shadowing.

For one AP, the shadowing values at two network locations separated by a
distance d have covariance sigma_SF^2 * 2^(-d / d_corr); values seen from
different APs are independent. A localization exercise involves the K RPs
plus one test point, so fields are drawn jointly over those K+1 locations
(or over the RPs once, with the test point appended by conditioning).
"""

from dataclasses import dataclass

import numpy as np


def jittered_cholesky(mat: np.ndarray, base_jitter: float, max_escalations: int):
    """Lower Cholesky factor with escalating diagonal jitter.

    Returns (factor, jitter_used). Raises LinAlgError if the matrix is still
    not positive definite after ``max_escalations`` tenfold escalations.
    """
    jitter = 0.0
    eye = np.eye(mat.shape[0])
    for attempt in range(max_escalations + 2):
        try:
            return np.linalg.cholesky(mat + jitter * eye), jitter
        except np.linalg.LinAlgError:
            if attempt > max_escalations:
                raise
            jitter = base_jitter if jitter == 0.0 else jitter * 10.0
    raise np.linalg.LinAlgError("cholesky failed")  # pragma: no cover


def shadow_covariance(points: np.ndarray, sigma_db: float, decorr_dist_m: float) -> np.ndarray:
    """Same-AP shadowing covariance matrix over ground locations (dB^2)."""
    pts = np.asarray(points, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    return sigma_db**2 * np.exp2(-dist / decorr_dist_m)


@dataclass(frozen=True)
class ShadowField:
    """One realization over (K RPs + 1 test point) x L APs, in dB."""

    values_db: np.ndarray  # (K+1, L); last row is the test point

    @property
    def rp_values_db(self) -> np.ndarray:
        return self.values_db[:-1, :]

    @property
    def test_point_values_db(self) -> np.ndarray:
        return self.values_db[-1, :]


def sample_shadow_field(scenario, test_point, rng) -> ShadowField:
    """Joint draw over the RPs and one test point, independent across APs."""
    points = np.vstack([scenario.rp_positions, np.asarray(test_point, dtype=float)])
    cfg = scenario.config
    cov = shadow_covariance(points, cfg.shadow_sigma_db, cfg.decorr_dist_m)
    if cfg.shadow_sigma_db == 0.0:
        return ShadowField(np.zeros((points.shape[0], scenario.num_aps)))
    chol, _ = jittered_cholesky(cov, 1e-10 * cfg.shadow_sigma_db**2, 3)
    z = rng.standard_normal((points.shape[0], scenario.num_aps))
    return ShadowField(chol @ z)


class ShadowModel:
    """Per-setup shadowing state: RP field plus conditional test-point draws.

    The RP values are drawn once; each test point's shadowing is then drawn
    from the Gaussian conditional given the RP values, which reproduces the
    joint (RPs + test point) covariance while letting many test points share
    one offline database.
    """

    def __init__(self, scenario, rng):
        self.scenario = scenario
        cfg = scenario.config
        self._sigma2 = cfg.shadow_sigma_db**2
        self._decorr = cfg.decorr_dist_m
        k = scenario.num_rps
        if self._sigma2 == 0.0:
            self.rp_values_db = np.zeros((k, scenario.num_aps))
            return
        cov_rr = shadow_covariance(scenario.rp_positions, cfg.shadow_sigma_db, self._decorr)
        self._chol_rr, _ = jittered_cholesky(cov_rr, 1e-10 * self._sigma2, 3)
        z = rng.standard_normal((k, scenario.num_aps))
        self.rp_values_db = self._chol_rr @ z

    def test_point_shadow_db(self, test_point, rng) -> np.ndarray:
        """Length-L conditional draw of the test point's shadowing (dB)."""
        if self._sigma2 == 0.0:
            return np.zeros(self.scenario.num_aps)
        diff = self.scenario.rp_positions - np.asarray(test_point, dtype=float)
        dist = np.sqrt((diff**2).sum(axis=-1))
        cov_tr = self._sigma2 * np.exp2(-dist / self._decorr)
        # w = Sigma_RR^-1 cov_tr via the stored factor
        w = np.linalg.solve(
            self._chol_rr.T, np.linalg.solve(self._chol_rr, cov_tr)
        )
        cond_var = max(self._sigma2 - float(cov_tr @ w), 0.0)
        cond_mean = self.rp_values_db.T @ w  # (L,)
        return cond_mean + np.sqrt(cond_var) * rng.standard_normal(self.scenario.num_aps)
