"""Bessel functions of the first kind for integer orders.

The disk-scattering covariance and its angle derivative need J0..J3 at
moderate arguments (|x| up to a few tens for large arrays). A power series
is used for small arguments; above the series' comfortable range the
values come from Miller's downward recurrence, normalised with the
identity J0(x) + 2*sum_k J_{2k}(x) = 1.
"""

import math

import numpy as np

_SERIES_CUTOFF = 12.0
_SERIES_TERMS = 64


def _bessel_j_series(order, x):
    # sum_m (-1)^m / (m! (m+order)!) * (x/2)^(2m+order), built term by term
    half = x / 2.0
    term = half**order / float(math.factorial(order))
    total = term.copy()
    hsq = half * half
    for m in range(1, _SERIES_TERMS):
        term = term * (-hsq) / (m * (m + order))
        total += term
    return total


def _bessel_j_miller(order, x):
    # Downward recurrence J_{k-1} = (2k/x) J_k - J_{k+1} from a high start
    # order, then normalise. Scalar x > 0.
    start = int(x + 2 * np.sqrt(40.0 * x) + 20)
    if start % 2:
        start += 1
    jp = 0.0
    jc = 1e-30
    out = 0.0
    norm = 0.0
    for k in range(start, 0, -1):
        jm = (2.0 * k / x) * jc - jp
        jp = jc
        jc = jm
        if k - 1 == order:
            out = jc
        if (k - 1) % 2 == 0:
            norm += jc if k - 1 == 0 else 2.0 * jc
        # rescale to avoid overflow of the unnormalised recurrence
        if abs(jc) > 1e250:
            jc *= 1e-250
            jp *= 1e-250
            out *= 1e-250
            norm *= 1e-250
    return out / norm


def bessel_j(order: int, x):
    """J_order(x) for integer order >= 0; accepts scalars or arrays."""
    if order < 0:
        raise ValueError("order must be a non-negative integer")
    arr = np.asarray(x, dtype=float)
    ax = np.abs(arr)
    out = np.empty_like(ax)

    small = ax <= _SERIES_CUTOFF
    if np.any(small):
        out[small] = _bessel_j_series(order, ax[small])
    if np.any(~small):
        large_vals = ax[~small]
        out[~small] = [_bessel_j_miller(order, float(v)) for v in large_vals]

    if order % 2:
        out = np.where(arr < 0, -out, out)  # J_n(-x) = (-1)^n J_n(x)
    if np.isscalar(x):
        return float(out)
    return out
