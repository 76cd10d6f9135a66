"""The exponential-integrator functions phi_k and a stable divided difference of phi_1.

``phi_0(z) = exp(z)`` and ``phi_k(z) = (phi_{k-1}(z) - 1/(k-1)!) / z``, so that
``phi_k(z) = 1/k! + z * phi_{k+1}(z)``. All functions accept scalars or arrays
(real or complex) and are evaluated elementwise.
"""

from __future__ import annotations

from math import factorial

import numpy as np

__all__ = ["phi", "phi_k", "phi1_divided_difference"]

# |z| below which phi_1 falls back to its Taylor polynomial
_PHI1_TAYLOR_RADIUS = 1e-5
_TAYLOR_TERMS = 30


def _taylor(k, z):
    # sum_{j<J} z^j / (j+k)!  (Horner); J=30 is exact to rounding for |z| <= max(1, k)
    acc = np.zeros_like(z)
    for j in range(_TAYLOR_TERMS - 1, -1, -1):
        acc = acc * z + 1.0 / factorial(j + k)
    return acc


def phi(k: int, z):
    """Evaluate ``phi_k(z)`` for integer ``k >= 0``.

    ``phi_1`` uses ``expm1(z)/z`` away from the origin and a six-term Taylor
    polynomial for ``|z| < 1e-5``. Higher orders use the downward recursion
    from ``phi_1`` for ``|z| >= max(1, k)`` and a truncated Taylor series
    inside that disc, where the recursion would cancel.
    """
    if k < 0 or int(k) != k:
        raise ValueError(f"phi_k needs a non-negative integer k, got {k}")
    scalar = np.ndim(z) == 0
    z = np.asarray(z)
    z = z.astype(np.result_type(z.dtype, np.float64), copy=False)
    if k == 0:
        out = np.exp(z)
        return out[()] if scalar else out

    az = np.abs(z)
    out = np.empty_like(z)
    if k == 1:
        small = az < _PHI1_TAYLOR_RADIUS
        zs = z[small]
        out[small] = 1 + zs * (1 / 2 + zs * (1 / 6 + zs * (1 / 24 + zs * (1 / 120 + zs / 720))))
        zl = z[~small]
        out[~small] = np.expm1(zl) / zl
        return out[()] if scalar else out

    small = az < max(1.0, float(k))
    out[small] = _taylor(k, z[small])
    zl = z[~small]
    val = np.expm1(zl) / zl
    for j in range(2, k + 1):
        val = (val - 1.0 / factorial(j - 1)) / zl
    out[~small] = val
    return out[()] if scalar else out


phi_k = phi


# |x - y| below which the divided difference switches to a midpoint expansion
_DD_SWITCH = 2e-3


def phi1_divided_difference(x, y):
    """First divided difference ``(phi_1(x) - phi_1(y)) / (x - y)``.

    For nearly coincident arguments the quotient cancels; there the value is
    expanded about the midpoint ``m`` with half-gap ``h``:
    ``phi_1'(m) + h**2/6 * phi_1'''(m)``, using
    ``phi_1' = phi_1 - phi_2`` and
    ``phi_1''' = phi_1 - 3 phi_2 + 6 phi_3 - 6 phi_4``.
    The truncation error is below ``h**4/120`` relative.
    """
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    x, y = np.broadcast_arrays(np.asarray(x), np.asarray(y))
    dtype = np.result_type(x.dtype, y.dtype, np.float64)
    x = x.astype(dtype)
    y = y.astype(dtype)
    diff = x - y
    close = np.abs(diff) < _DD_SWITCH
    out = np.empty_like(x)

    far = ~close
    if far.any():
        out[far] = (phi(1, x[far]) - phi(1, y[far])) / diff[far]
    if close.any():
        m = 0.5 * (x[close] + y[close])
        h = 0.5 * diff[close]
        p1, p2, p3, p4 = (phi(j, m) for j in (1, 2, 3, 4))
        out[close] = (p1 - p2) + h * h / 6 * (p1 - 3 * p2 + 6 * p3 - 6 * p4)
    return out[()] if scalar else out
