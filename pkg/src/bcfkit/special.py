"""Exponential integral Ei(x) on the positive real axis."""

import numpy as np

EULER_GAMMA = 0.57721566490153286061

# switch from the power series to the asymptotic expansion
_SERIES_LIMIT = 40.0


def _series_sum(x):
    # sum_{k>=1} x^k / (k k!), all terms positive for x > 0
    term = x.copy()
    total = x.copy()
    k = 1
    active = np.ones(x.shape, dtype=bool)
    while active.any():
        term = term * x * k / (k + 1) ** 2
        total = total + np.where(active, term, 0.0)
        active &= term > 1e-17 * total
        k += 1
        if k > 400:
            break
    return total


def _asymptotic_sum(x):
    # sum_{k>=0} k! / x^k, truncated at the smallest term
    term = np.ones_like(x)
    total = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    k = 1
    while active.any():
        nxt = term * k / x
        grows = nxt >= term
        active &= ~grows
        total = total + np.where(active, nxt, 0.0)
        term = np.where(active, nxt, term)
        active &= term > 1e-17 * total
        k += 1
        if k > 200:
            break
    return total


def _check_positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("Ei is only implemented for positive real arguments")
    return x


def expi(x):
    """Exponential integral ``Ei(x) = -PV int_{-x}^inf e^{-t}/t dt`` for x > 0.

    Power series below x = 40, asymptotic expansion above; relative accuracy
    is about 1e-14 over the whole positive axis.
    """
    x = _check_positive(x)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = x <= _SERIES_LIMIT
    if small.any():
        xs = x[small]
        out[small] = EULER_GAMMA + np.log(xs) + _series_sum(xs)
    if (~small).any():
        xl = x[~small]
        out[~small] = np.exp(xl) / xl * _asymptotic_sum(xl)
    return out[0] if scalar else out


def expi_scaled(x):
    """``exp(-x) * Ei(x)`` for x > 0, without overflow at large x."""
    x = _check_positive(x)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = x <= _SERIES_LIMIT
    if small.any():
        xs = x[small]
        out[small] = np.exp(-xs) * (EULER_GAMMA + np.log(xs) + _series_sum(xs))
    if (~small).any():
        xl = x[~small]
        out[~small] = _asymptotic_sum(xl) / xl
    return out[0] if scalar else out
