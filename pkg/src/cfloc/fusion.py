"""UE-side fusion of per-AP Gaussian position estimates.

Four variants: median (robust selection), mean (plain averaging), Bayesian
(precision weighting, i.e. the normalized product of the Gaussians), and
z-score (outlier filtering followed by precision weighting). Coordinates are
always treated independently.
"""

from dataclasses import dataclass

import numpy as np

from .gpr import PositionEstimate


@dataclass(frozen=True)
class FusionResult:
    estimate: PositionEstimate
    method: str
    retained_aps: tuple = ()  # per-coordinate index tuples (z-score only)


def _unpack(estimates):
    means = np.array([[e.mean[0], e.mean[1]] for e in estimates], dtype=float)
    variances = np.array([[e.var[0], e.var[1]] for e in estimates], dtype=float)
    if means.shape[0] < 1:
        raise ValueError("need at least one AP estimate")
    if np.any(variances <= 0):
        raise ValueError("all AP variances must be positive")
    return means, variances


def _first_index_of(values, value):
    # "index of" a sorted value in the original list; ties go to the
    # earliest AP
    return int(np.flatnonzero(values == value)[0])


def _median_coordinate(values, variances):
    ordered = np.sort(values, kind="stable")
    count = len(values)
    if count % 2:
        idx = _first_index_of(values, ordered[(count - 1) // 2])
        return values[idx], variances[idx]
    lo = _first_index_of(values, ordered[count // 2 - 1])
    hi = _first_index_of(values, ordered[count // 2])
    mean = 0.5 * (values[lo] + values[hi])
    var = (variances[lo] + variances[hi]) / 4.0
    return mean, var


def fuse_median(estimates) -> FusionResult:
    """Per-coordinate median of the AP means.

    Odd AP counts keep the selected AP's variance for that coordinate; even
    counts average the two middle means, whose variance is the sum of the two
    contributing variances over four. Ties resolve to the earlier AP index.
    """
    means, variances = _unpack(estimates)
    mx, vx = _median_coordinate(means[:, 0], variances[:, 0])
    my, vy = _median_coordinate(means[:, 1], variances[:, 1])
    return FusionResult(
        PositionEstimate(mean=(mx, my), var=(vx, vy), source="median"),
        method="median",
    )


def fuse_mean(estimates) -> FusionResult:
    """Arithmetic mean of AP means; variance is sum(v) / L^2 per coordinate."""
    means, variances = _unpack(estimates)
    count = means.shape[0]
    mean = means.mean(axis=0)
    var = variances.sum(axis=0) / count**2
    return FusionResult(
        PositionEstimate(mean=tuple(mean), var=tuple(var), source="mean"),
        method="mean",
    )


def _precision_weighted(values, variances):
    precision = 1.0 / variances
    var = 1.0 / precision.sum()
    mean = var * float((values * precision).sum())
    return mean, var


def fuse_bayesian(estimates) -> FusionResult:
    """Product-of-Gaussians fusion: v = (sum 1/v_l)^-1, mu = v * sum(mu_l / v_l)."""
    means, variances = _unpack(estimates)
    mx, vx = _precision_weighted(means[:, 0], variances[:, 0])
    my, vy = _precision_weighted(means[:, 1], variances[:, 1])
    return FusionResult(
        PositionEstimate(mean=(mx, my), var=(vx, vy), source="bayesian"),
        method="bayesian",
    )


def _zscore_retained(values, threshold):
    std = float(values.std())  # population form over the AP set
    if std == 0.0:
        return np.arange(len(values))
    z = (values - values.mean()) / std
    retained = np.flatnonzero(np.abs(z) < threshold)
    if retained.size == 0:
        return np.arange(len(values))
    return retained


def fuse_zscore(estimates, threshold: float = 1.0) -> FusionResult:
    """Precision-weighted fusion over the APs whose mean passes a z-score test.

    Degenerate cases (zero spread of the means, or every AP filtered out)
    fall back to retaining all APs, which reduces to the Bayesian variant.
    """
    if threshold <= 0:
        raise ValueError("z-score threshold must be positive")
    means, variances = _unpack(estimates)
    keep_x = _zscore_retained(means[:, 0], threshold)
    keep_y = _zscore_retained(means[:, 1], threshold)
    mx, vx = _precision_weighted(means[keep_x, 0], variances[keep_x, 0])
    my, vy = _precision_weighted(means[keep_y, 1], variances[keep_y, 1])
    return FusionResult(
        PositionEstimate(mean=(mx, my), var=(vx, vy), source="zscore"),
        method="zscore",
        retained_aps=(tuple(int(i) for i in keep_x), tuple(int(i) for i in keep_y)),
    )


FUSERS = {
    "median": lambda est, threshold: fuse_median(est),
    "mean": lambda est, threshold: fuse_mean(est),
    "bayesian": lambda est, threshold: fuse_bayesian(est),
    "zscore": lambda est, threshold: fuse_zscore(est, threshold),
}
