"""Gaussian process regression of position coordinates from fingerprints.

One model maps a fingerprint vector to a single coordinate. Hyperparameters
(signal variance, length scale, observation-noise variance) are learned by
maximising the log marginal likelihood with plain gradient ascent in
log-parameter space, safeguarded by backtracking step halving.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_solve
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import check_array_2d, check_vector
from .shadowing import jittered_cholesky

VAR_FLOOR = 1e-9
LOG_2PI = np.log(2.0 * np.pi)


class TrainingError(RuntimeError):
    """Raised when the regularized kernel matrix cannot be factorized."""


@dataclass(frozen=True)
class Hyperparams:
    """Kernel and noise parameters; all strictly positive."""

    signal_var: float
    length_scale: float
    noise_var: float

    def __post_init__(self):
        for name in ("signal_var", "length_scale", "noise_var"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    def log_vector(self) -> np.ndarray:
        return np.log([self.signal_var, self.length_scale, self.noise_var])

    @classmethod
    def from_log_vector(cls, vec) -> "Hyperparams":
        sv, ls, nv = np.exp(np.asarray(vec, dtype=float))
        return cls(signal_var=float(sv), length_scale=float(ls), noise_var=float(nv))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    grad_tol: float = 1e-4
    max_iters: int = 2000
    max_backtracks: int = 30


@dataclass(frozen=True)
class PositionEstimate:
    """Gaussian position belief: per-coordinate mean (m) and variance (m^2)."""

    mean: tuple          # (x, y)
    var: tuple           # (v1, v2), both > 0
    source: str = ""

    def __post_init__(self):
        if self.var[0] <= 0 or self.var[1] <= 0:
            raise ValueError("position-estimate variances must be positive")


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sum(diff * diff, axis=-1)


def kernel(r, r_prime, hyper: Hyperparams) -> float:
    """Squared-exponential covariance; the length scale divides the squared
    distance directly (not its square)."""
    d2 = float(np.sum((np.asarray(r, float) - np.asarray(r_prime, float)) ** 2))
    return hyper.signal_var * np.exp(-d2 / (2.0 * hyper.length_scale))


def kernel_matrix(a: np.ndarray, b: np.ndarray, hyper: Hyperparams) -> np.ndarray:
    return hyper.signal_var * np.exp(-_sq_dists(a, b) / (2.0 * hyper.length_scale))


class _Likelihood(NamedTuple):
    lml: float
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float


def _factorize(x, y, hyper):
    k = kernel_matrix(x, x, hyper)
    k_reg = k + hyper.noise_var * np.eye(len(y))
    base = 1e-10 * np.trace(k_reg) / len(y)
    try:
        chol, jitter = jittered_cholesky(k_reg, base, 5)
    except np.linalg.LinAlgError as exc:
        raise TrainingError(
            f"kernel matrix not positive definite after jitter escalation "
            f"(K={len(y)}, hyper={hyper})"
        ) from exc
    alpha = cho_solve((chol, True), y)
    lml = (
        -0.5 * float(y @ alpha)
        - float(np.sum(np.log(np.diag(chol))))
        - 0.5 * len(y) * LOG_2PI
    )
    return _Likelihood(lml, chol, alpha, jitter), k


def log_marginal_likelihood(inputs, targets, hyper: Hyperparams) -> float:
    """-1/2 y^T Kreg^-1 y - 1/2 log det Kreg - K/2 log 2pi, via Cholesky."""
    x = check_array_2d(inputs, "inputs")
    y = check_vector(targets, "targets")
    state, _ = _factorize(x, y, hyper)
    return state.lml


def grad_log_marginal_likelihood(inputs, targets, hyper: Hyperparams) -> np.ndarray:
    """Gradient of the log marginal likelihood w.r.t. the log hyperparameters.

    Components follow 1/2 tr((alpha alpha^T - Kreg^-1) dKreg/dtheta) with
    dKreg/dlog(signal_var) = K, dKreg/dlog(length_scale) = K ⊙ D2/(2 ls),
    dKreg/dlog(noise_var) = noise_var * I.
    """
    x = check_array_2d(inputs, "inputs")
    y = check_vector(targets, "targets")
    state, k = _factorize(x, y, hyper)
    kinv = cho_solve((state.chol, True), np.eye(len(y)))
    alpha = state.alpha
    scaled = k * (_sq_dists(x, x) / (2.0 * hyper.length_scale))
    g_signal = 0.5 * (alpha @ k @ alpha - np.sum(kinv * k))
    g_length = 0.5 * (alpha @ scaled @ alpha - np.sum(kinv * scaled))
    g_noise = 0.5 * hyper.noise_var * (alpha @ alpha - np.trace(kinv))
    return np.array([g_signal, g_length, g_noise])


class CoordinateGP(BaseEstimator, RegressorMixin):
    """GP regressor for one position coordinate.

    Parameters
    ----------
    learning_rate, grad_tol, max_iters, max_backtracks:
        Gradient-ascent controls. Ascent stops when the log-space gradient
        norm drops below ``grad_tol`` or after ``max_iters`` accepted steps;
        a step that would lower the likelihood is halved up to
        ``max_backtracks`` times before the trainer gives up.
    standardize:
        Z-score the input columns. RSS (dB) and azimuth (degrees) live on
        incommensurate scales, so this is on by default.
    center_target:
        Subtract the target mean before fitting (added back at prediction),
        matching the zero-mean prior.
    optimize:
        If False, ``init_hyper`` is used as-is without ascent.
    init_hyper:
        Optional Hyperparams overriding the data-driven initialization.
    """

    def __init__(self, learning_rate=0.05, grad_tol=1e-4, max_iters=2000,
                 max_backtracks=30, standardize=True, center_target=True,
                 optimize=True, init_hyper=None, var_floor=VAR_FLOOR):
        self.learning_rate = learning_rate
        self.grad_tol = grad_tol
        self.max_iters = max_iters
        self.max_backtracks = max_backtracks
        self.standardize = standardize
        self.center_target = center_target
        self.optimize = optimize
        self.init_hyper = init_hyper
        self.var_floor = var_floor

    # -- scaling ---------------------------------------------------------

    def _fit_scaler(self, x):
        if self.standardize:
            self.input_mean_ = x.mean(axis=0)
            std = x.std(axis=0)
            std[std == 0.0] = 1.0
            self.input_std_ = std
        else:
            self.input_mean_ = np.zeros(x.shape[1])
            self.input_std_ = np.ones(x.shape[1])

    def _scale(self, x):
        return (x - self.input_mean_) / self.input_std_

    def _initial_log_hyper(self, x, y):
        if self.init_hyper is not None:
            return self.init_hyper.log_vector()
        var_y = float(np.var(y))
        if var_y <= 0.0:
            var_y = 1.0
        if self.standardize:
            length0 = float(x.shape[1])
        else:
            # without the z-scoring the input dimension says nothing about
            # scale; fall back to the median squared pairwise distance
            d2 = _sq_dists(x, x)
            med = float(np.median(d2[np.triu_indices_from(d2, k=1)])) if len(y) > 1 else 1.0
            length0 = med if med > 0 else 1.0
        return np.log([var_y, length0, 0.1 * var_y])

    # -- training --------------------------------------------------------

    def fit(self, X, y):
        x_raw = check_array_2d(X, "X")
        y_raw = check_vector(y, "y")
        if len(y_raw) != x_raw.shape[0]:
            raise ValueError("X and y disagree on the number of samples")
        if len(y_raw) < 2:
            raise ValueError("need at least 2 training points")
        self._fit_scaler(x_raw)
        x = self._scale(x_raw)
        self.target_mean_ = float(np.mean(y_raw)) if self.center_target else 0.0
        yc = y_raw - self.target_mean_

        log_hyper = self._initial_log_hyper(x, yc)
        hyper = Hyperparams.from_log_vector(log_hyper)
        state, _ = _factorize(x, yc, hyper)
        history = [state.lml]
        iters = 0
        stalled = False
        grad = grad_log_marginal_likelihood(x, yc, hyper)
        while self.optimize and iters < self.max_iters and np.linalg.norm(grad) > self.grad_tol:
            step = self.learning_rate
            accepted = None
            for _ in range(self.max_backtracks):
                candidate = log_hyper + step * grad
                try:
                    cand_hyper = Hyperparams.from_log_vector(candidate)
                    cand_state, _ = _factorize(x, yc, cand_hyper)
                except (TrainingError, OverflowError, ValueError):
                    cand_state = None
                if cand_state is not None and cand_state.lml >= state.lml:
                    accepted = (candidate, cand_hyper, cand_state)
                    break
                step *= 0.5
            if accepted is None:
                stalled = True
                break
            log_hyper, hyper, state = accepted
            history.append(state.lml)
            grad = grad_log_marginal_likelihood(x, yc, hyper)
            iters += 1

        self.hyper_ = hyper
        self.train_inputs_ = x
        self.train_targets_ = yc
        self.chol_ = state.chol
        self.alpha_ = state.alpha
        self.jitter_ = state.jitter
        self.log_marginal_likelihood_ = state.lml
        self.lml_history_ = history
        self.n_iter_ = iters
        self.converged_ = bool(np.linalg.norm(grad) <= self.grad_tol)
        self.stalled_ = stalled
        return self

    # -- prediction ------------------------------------------------------

    def predict(self, X, return_var=False):
        x = self._scale(check_array_2d(X, "X"))
        k_star = kernel_matrix(x, self.train_inputs_, self.hyper_)
        mean = k_star @ self.alpha_ + self.target_mean_
        if not return_var:
            return mean
        solved = cho_solve((self.chol_, True), k_star.T)
        var = self.hyper_.signal_var - np.sum(k_star * solved.T, axis=1)
        return mean, np.maximum(var, self.var_floor)

    def predict_one(self, x):
        mean, var = self.predict(np.atleast_2d(x), return_var=True)
        return float(mean[0]), float(var[0])

    def diagnostics(self) -> dict:
        return {
            "signal_var": self.hyper_.signal_var,
            "length_scale": self.hyper_.length_scale,
            "noise_var": self.hyper_.noise_var,
            "log_marginal_likelihood": self.log_marginal_likelihood_,
            "iterations": self.n_iter_,
            "converged": self.converged_,
            "stalled": self.stalled_,
        }


def fit(inputs, targets, train_cfg: TrainConfig | None = None, **estimator_kwargs) -> CoordinateGP:
    """Functional wrapper around CoordinateGP.fit."""
    cfg = train_cfg or TrainConfig()
    model = CoordinateGP(
        learning_rate=cfg.learning_rate,
        grad_tol=cfg.grad_tol,
        max_iters=cfg.max_iters,
        max_backtracks=cfg.max_backtracks,
        **estimator_kwargs,
    )
    return model.fit(inputs, targets)


def predict(model: CoordinateGP, test_input):
    """Posterior (mean, variance) of one coordinate for one fingerprint."""
    return model.predict_one(test_input)


def predict_exact(inputs, targets, test_input, hyper: Hyperparams):
    """Dense-inverse posterior evaluation, for cross-checking the Cholesky path."""
    x = check_array_2d(inputs)
    y = check_vector(targets)
    t = np.atleast_2d(np.asarray(test_input, dtype=float))
    k_reg = kernel_matrix(x, x, hyper) + hyper.noise_var * np.eye(len(y))
    k_inv = np.linalg.inv(k_reg)
    k_star = kernel_matrix(t, x, hyper)[0]
    mean = float(k_star @ k_inv @ y)
    var = float(hyper.signal_var - k_star @ k_inv @ k_star)
    return mean, var


__all__ = [
    "Hyperparams", "TrainConfig", "TrainingError", "PositionEstimate",
    "CoordinateGP", "kernel", "kernel_matrix", "log_marginal_likelihood",
    "grad_log_marginal_likelihood", "fit", "predict", "predict_exact",
    "VAR_FLOOR",
]
