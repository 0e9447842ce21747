"""Reference localizers: centralized GPR variants, KNN and linear regression.

Centralized variants pool features from every AP into one input vector
(hybrid: RSS then azimuth columns for all APs; rss/aoa: one column per AP).
KNN and LR run either centrally on the pooled vector or per AP inside the
median-fusion scheme.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_array_2d
from .fusion import FusionResult, fuse_median
from .gpr import VAR_FLOOR, CoordinateGP, PositionEstimate, TrainConfig

CENTRAL_VARIANTS = ("hybrid", "rss", "aoa")


@dataclass(frozen=True)
class CentralFingerprintDB:
    """Pooled offline database: K rows of features from all L APs."""

    inputs: np.ndarray    # (K, D): D = 2L hybrid, L rss-only / aoa-only
    targets: np.ndarray   # (K, 2) RP coordinates
    variant: str


def build_central_db(fingerprints, rp_positions, variant: str) -> CentralFingerprintDB:
    """Concatenate per-AP databases; hybrid column order is [rss_1..L, aoa_1..L]."""
    if variant not in CENTRAL_VARIANTS:
        raise ValueError(f"unknown centralized variant {variant!r}")
    rss = np.column_stack([db.rss_db for db in fingerprints])
    aoa = np.column_stack([db.aoa_deg for db in fingerprints])
    if variant == "hybrid":
        inputs = np.column_stack([rss, aoa])
    elif variant == "rss":
        inputs = rss
    else:
        inputs = aoa
    return CentralFingerprintDB(inputs=inputs, targets=np.asarray(rp_positions, float),
                                variant=variant)


def central_test_input(observations, variant: str) -> np.ndarray:
    rss = np.array([obs.rss_db for obs in observations])
    aoa = np.array([obs.aoa_deg for obs in observations])
    if variant == "hybrid":
        return np.concatenate([rss, aoa])
    if variant == "rss":
        return rss
    if variant == "aoa":
        return aoa
    raise ValueError(f"unknown centralized variant {variant!r}")


class GprLocalizer:
    """A pair of coordinate GPs sharing one input matrix."""

    def __init__(self, train_cfg: TrainConfig | None = None, **gp_kwargs):
        cfg = train_cfg or TrainConfig()
        self._kwargs = dict(
            learning_rate=cfg.learning_rate,
            grad_tol=cfg.grad_tol,
            max_iters=cfg.max_iters,
            max_backtracks=cfg.max_backtracks,
        )
        self._kwargs.update(gp_kwargs)
        self.model_x = CoordinateGP(**self._kwargs)
        self.model_y = CoordinateGP(**self._kwargs)

    def fit(self, inputs, targets_xy):
        targets = np.asarray(targets_xy, dtype=float)
        self.model_x.fit(inputs, targets[:, 0])
        self.model_y.fit(inputs, targets[:, 1])
        return self

    def predict_one(self, test_input, source="") -> PositionEstimate:
        mx, vx = self.model_x.predict_one(test_input)
        my, vy = self.model_y.predict_one(test_input)
        return PositionEstimate(mean=(mx, my), var=(vx, vy), source=source)

    def diagnostics(self) -> dict:
        return {"x": self.model_x.diagnostics(), "y": self.model_y.diagnostics()}


def fit_centralized_gpr(db: CentralFingerprintDB,
                        train_cfg: TrainConfig | None = None) -> GprLocalizer:
    return GprLocalizer(train_cfg).fit(db.inputs, db.targets)


class KnnPositionRegressor(BaseEstimator):
    """Inverse-distance-weighted k-nearest-neighbour position lookup.

    Distances are taken in z-scored input space so RSS and azimuth columns
    contribute comparably. The reported variance is the weighted sample
    variance of the neighbours' coordinates; it is bookkeeping for the
    output records, not a calibrated posterior.
    """

    def __init__(self, k=4, weighting="inverse_distance", eps=1e-12):
        if weighting not in ("inverse_distance", "uniform"):
            raise ValueError(f"unknown weighting {weighting!r}")
        self.k = k
        self.weighting = weighting
        self.eps = eps

    def fit(self, X, Y):
        x = check_array_2d(X, "X")
        if x.shape[0] < self.k:
            raise ValueError(f"need at least k={self.k} training rows")
        self.train_mean_ = x.mean(axis=0)
        std = x.std(axis=0)
        std[std == 0.0] = 1.0
        self.train_std_ = std
        self.train_inputs_ = (x - self.train_mean_) / std
        self.train_targets_ = np.asarray(Y, dtype=float)
        return self

    def predict_one(self, test_input, source="knn") -> PositionEstimate:
        t = (np.asarray(test_input, dtype=float) - self.train_mean_) / self.train_std_
        dists = np.sqrt(((self.train_inputs_ - t) ** 2).sum(axis=1))
        nearest = np.argsort(dists, kind="stable")[: self.k]
        if self.weighting == "uniform":
            weights = np.full(self.k, 1.0 / self.k)
        else:
            weights = 1.0 / (dists[nearest] + self.eps)
            weights = weights / weights.sum()
        coords = self.train_targets_[nearest]
        mean = weights @ coords
        var = weights @ (coords - mean) ** 2
        return PositionEstimate(
            mean=(float(mean[0]), float(mean[1])),
            var=(max(float(var[0]), VAR_FLOOR), max(float(var[1]), VAR_FLOOR)),
            source=source,
        )


class LinearPositionRegressor(BaseEstimator):
    """Ordinary least squares with intercept, one fit per coordinate.

    A rank-deficient design falls back to ridge with factor
    1e-8 * trace(X^T X). The variance reported with predictions is the
    residual mean square (bookkeeping, as for KNN).
    """

    def __init__(self, ridge_factor=1e-8):
        self.ridge_factor = ridge_factor

    def fit(self, X, Y):
        x = check_array_2d(X, "X")
        targets = np.asarray(Y, dtype=float)
        n, d = x.shape
        if n <= d + 1:
            raise ValueError(f"need more than D+1={d + 1} rows for least squares, got {n}")
        self.train_mean_ = x.mean(axis=0)
        std = x.std(axis=0)
        std[std == 0.0] = 1.0
        self.train_std_ = std
        design = np.column_stack([np.ones(n), (x - self.train_mean_) / std])
        coeffs, _, rank, _ = np.linalg.lstsq(design, targets, rcond=None)
        self.ridge_used_ = rank < design.shape[1]
        if self.ridge_used_:
            gram = design.T @ design
            lam = self.ridge_factor * np.trace(gram)
            coeffs = np.linalg.solve(gram + lam * np.eye(d + 1), design.T @ targets)
        self.coeffs_ = coeffs
        residuals = targets - design @ coeffs
        dof = max(n - (d + 1), 1)
        self.residual_var_ = (residuals**2).sum(axis=0) / dof
        return self

    def predict_one(self, test_input, source="lr") -> PositionEstimate:
        t = (np.asarray(test_input, dtype=float) - self.train_mean_) / self.train_std_
        row = np.concatenate([[1.0], t])
        mean = row @ self.coeffs_
        return PositionEstimate(
            mean=(float(mean[0]), float(mean[1])),
            var=(max(float(self.residual_var_[0]), VAR_FLOOR),
                 max(float(self.residual_var_[1]), VAR_FLOOR)),
            source=source,
        )


def knn_predict(db: CentralFingerprintDB, test_input, k: int = 4,
                weighting: str = "inverse_distance") -> PositionEstimate:
    """Fit-and-query convenience over a pooled database."""
    model = KnnPositionRegressor(k=k, weighting=weighting).fit(db.inputs, db.targets)
    return model.predict_one(test_input, source="cent_knn")


def lr_fit_predict(db: CentralFingerprintDB, test_input) -> PositionEstimate:
    """Least-squares convenience over a pooled database."""
    model = LinearPositionRegressor().fit(db.inputs, db.targets)
    return model.predict_one(test_input, source="cent_lr")


def distributed_median_with(regressors, observations) -> FusionResult:
    """Median fusion of per-AP KNN or LR estimates.

    ``regressors`` are fitted per-AP estimators (one per AP, on that AP's
    2-column hybrid inputs); ``observations`` the matching TestObservations.
    """
    estimates = [
        reg.predict_one(np.array([obs.rss_db, obs.aoa_deg]))
        for reg, obs in zip(regressors, observations)
    ]
    return fuse_median(estimates)
