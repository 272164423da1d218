"""Exponential integral Ei on the negative real axis.

Only x < 0 is needed: every closed-form distance term has the shape
``Ei(-z / (4 b_max**2))`` with a squared norm ``z > 0``.

Two regimes, split at x = -2:

* ``-2 <= x < 0``: the convergent series
  ``Ei(x) = gamma + ln|x| + sum_{n>=1} x**n / (n * n!)``, evaluated by Horner.
* ``x < -2``: the continued fraction for ``E1(-x)``, evaluated backwards at a
  fixed depth, using ``Ei(x) = -E1(-x)``.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061
SERIES_THRESHOLD = -2.0

_MAX_TERMS = 40
# 1 / (n * n!) for n = 1.._MAX_TERMS
_SERIES_COEFFS = np.array(
    [1.0 / (n * math.factorial(n)) for n in range(1, _MAX_TERMS + 1)]
)
_CF_DEPTH = 60


def _series_terms(max_abs: float) -> int:
    # smallest n with max_abs**n / (n * n!) below 1e-18
    if max_abs == 0.0:
        return 1
    log_abs = math.log(max_abs)
    for n in range(1, _MAX_TERMS + 1):
        if n * log_abs - math.log(n) - math.lgamma(n + 1) < -41.5:
            return n
    return _MAX_TERMS


def _ei_series(x: np.ndarray) -> np.ndarray:
    k = _series_terms(float(np.max(np.abs(x))))
    acc = np.full_like(x, _SERIES_COEFFS[k - 1])
    for c in _SERIES_COEFFS[k - 2::-1] if k > 1 else ():
        acc = c + x * acc
    return EULER_GAMMA + np.log(-x) + x * acc


def _ei_cfrac(x: np.ndarray) -> np.ndarray:
    z = -x
    t = z + (2 * _CF_DEPTH + 1)
    for n in range(_CF_DEPTH, 0, -1):
        t = z + (2 * n - 1) - (n * n) / t
    with np.errstate(under="ignore"):
        return -np.exp(-z) / t


def ei_neg(x) -> np.ndarray:
    """Vectorized Ei for strictly negative finite arguments.

    No domain checking beyond ``x < 0``; callers that may hit ``x == 0``
    must mask those entries first (see :func:`ei`).
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    near = x >= SERIES_THRESHOLD
    if np.any(near):
        out[near] = _ei_series(x[near])
    far = ~near
    if np.any(far):
        out[far] = _ei_cfrac(x[far])
    return out


def ei(x):
    """Exponential integral ``Ei(x) = int_{-inf}^{x} e^t / t dt`` for ``x < 0``.

    Accepts a scalar or an array. Raises :class:`DomainError` for any
    argument that is non-negative or not finite; ``x == 0`` is reported as
    the logarithmic divergence it is.
    """
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr == 0.0):
        raise DomainError("Ei diverges to -inf at x = 0")
    if not np.all(np.isfinite(arr)) or np.any(arr > 0.0):
        raise DomainError("Ei is only implemented for finite x < 0")
    out = ei_neg(arr)
    if out.ndim == 0:
        return float(out)
    return out
