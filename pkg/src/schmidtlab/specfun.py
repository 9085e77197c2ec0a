"""Real error-function family: ``erf``, ``erfc`` and the scaled ``erfcx``.

The Schmidt number of the scattering model contains ``exp(-x**2) / erfc(x)``
with ``x = 2/eta``. For small ``eta`` both factors underflow long before their
ratio becomes large, so the model is evaluated through
``erfcx(x) = exp(x**2) * erfc(x)`` instead, which stays O(1/x).

Two evaluation regimes are used:

* ``0 <= x < 1.5``: Maclaurin series ``erf(x) = 2x/sqrt(pi) exp(-x^2)
  sum (2x^2)^n / (2n+1)!!``. All terms are positive so ``erf`` itself is
  cancellation free, and ``erfcx = exp(x^2) - 2x/sqrt(pi) * sum(...)`` loses
  at most a factor ~30 in relative accuracy at the top of the range.
* ``x >= 1.5``: Laplace continued fraction
  ``erfcx(x) = 1/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))``,
  evaluated bottom-up at a fixed depth.

All functions accept scalars or arrays and return the same kind.
"""

from __future__ import annotations

import numpy as np

__all__ = ["erf", "erfc", "erfcx"]

_SQRT_PI = 1.7724538509055160273
_TWO_OVER_SQRT_PI = 1.1283791670955125739

_SERIES_CUTOFF = 1.5
# 2x^2 <= 4.5 below the cutoff; term 60 is < 1e-30 of the sum there.
_SERIES_TERMS = 60
# Depth measured against a 40-digit oracle: <= 1 ulp for x >= 1.5.
_CF_DEPTH = 120


def _as_float_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _wrap(result, scalar):
    return float(result) if scalar else result


def _positive_series(x):
    """Sum of (2x^2)^n / (2n+1)!! for n >= 0, accumulated with Horner-like
    nesting so that the largest terms are added last."""
    two_x2 = 2.0 * x * x
    acc = np.ones_like(x)
    for n in range(_SERIES_TERMS, 0, -1):
        acc = 1.0 + acc * two_x2 / (2 * n + 1)
    return acc


def _continued_fraction(x):
    t = np.array(x, dtype=float, copy=True)
    for k in range(_CF_DEPTH, 0, -1):
        t = x + (0.5 * k) / t
    return 1.0 / (_SQRT_PI * t)


def _exp_minus_square(x):
    """exp(-x*x) without the rounding error of forming x*x directly.

    x is split as m + f with m a multiple of 1/128, so m*m is exact and the
    remaining exponent 2*m*f + f*f is small.
    """
    m = np.floor(128.0 * x + 0.5) / 128.0
    f = x - m
    return np.exp(-m * m) * np.exp(-(2.0 * m * f + f * f))


def _erfcx_nonneg(x):
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        out[small] = np.exp(xs * xs) - _TWO_OVER_SQRT_PI * xs * _positive_series(xs)
    large = ~small
    if np.any(large):
        out[large] = _continued_fraction(x[large])
    return out


def erfcx(x):
    """Scaled complementary error function ``exp(x**2) * erfc(x)``.

    Parameters
    ----------
    x : float or array_like
        Nonnegative argument(s). NaN propagates.

    Returns
    -------
    float or ndarray

    Raises
    ------
    ValueError
        If any argument is negative. Only ``x >= 0`` is supported because
        ``erfcx`` grows like ``2 exp(x**2)`` for negative ``x``.
    """
    arr, scalar = _as_float_array(x)
    flat = np.atleast_1d(arr).ravel()
    if np.any(flat < 0):
        raise ValueError("erfcx is only defined here for x >= 0")
    out = np.full_like(flat, np.nan)
    finite = np.isfinite(flat)
    out[finite] = _erfcx_nonneg(flat[finite])
    out[flat == np.inf] = 0.0
    return _wrap(out.reshape(arr.shape), scalar)


def _erfc_nonneg(x):
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        out[small] = 1.0 - _TWO_OVER_SQRT_PI * xs * _exp_minus_square(xs) * _positive_series(xs)
    large = ~small
    if np.any(large):
        xl = x[large]
        out[large] = _exp_minus_square(xl) * _continued_fraction(xl)
    return out


def erfc(x):
    """Complementary error function ``1 - erf(x)``, accurate in the far tail.

    Negative arguments use ``erfc(-x) = 2 - erfc(x)``.
    """
    arr, scalar = _as_float_array(x)
    flat = np.atleast_1d(arr).ravel()
    out = np.full_like(flat, np.nan)
    a = np.abs(flat)
    finite = np.isfinite(a)
    out[finite] = _erfc_nonneg(a[finite])
    out[a == np.inf] = 0.0
    neg = flat < 0
    out[neg] = 2.0 - out[neg]
    return _wrap(out.reshape(arr.shape), scalar)


def erf(x):
    """Error function. Odd in ``x``; NaN propagates."""
    arr, scalar = _as_float_array(x)
    flat = np.atleast_1d(arr).ravel()
    out = np.full_like(flat, np.nan)
    a = np.abs(flat)
    small = a < _SERIES_CUTOFF
    if np.any(small):
        xs = a[small]
        out[small] = _TWO_OVER_SQRT_PI * xs * _exp_minus_square(xs) * _positive_series(xs)
    large = (a >= _SERIES_CUTOFF) & np.isfinite(a)
    if np.any(large):
        out[large] = 1.0 - _erfc_nonneg(a[large])
    out[a == np.inf] = 1.0
    out = np.copysign(out, flat)
    return _wrap(out.reshape(arr.shape), scalar)
