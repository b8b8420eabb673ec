"""Special functions not covered by scipy for complex arguments.

``expint_scaled`` evaluates ``exp(z) * E_nu(z)`` for real order ``nu > 0`` and
complex ``z`` with ``Re z >= 0``.  ``mittag_leffler_scaled`` evaluates the
two-parameter Mittag-Leffler function for real nonnegative arguments, scaled by
``exp(-shift)`` so that very large arguments stay representable.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

_EPS = 1e-16
_TINY = 1e-300


def _expint_cf(nu: float, z: np.ndarray, max_iter: int = 2000) -> np.ndarray:
    # Modified Lentz evaluation of the continued fraction for exp(z) E_nu(z);
    # converged entries are dropped from the working set.
    out = np.empty_like(z)
    idx = np.arange(z.size)
    b = z + nu
    c = np.full_like(z, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, max_iter + 1):
        an = -i * (nu - 1.0 + i)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = c * d
        h = h * delta
        # a few ulps: delta can settle one rounding step away from 1
        done = np.abs(delta - 1.0) <= 4.0 * _EPS
        if done.any():
            out[idx[done]] = h[done]
            keep = ~done
            idx, b, c, d, h = idx[keep], b[keep], c[keep], d[keep], h[keep]
            if idx.size == 0:
                return out
    raise ArithmeticError("continued fraction for E_nu did not converge")


def _expint_series(nu: float, z: np.ndarray) -> np.ndarray:
    # Power series around the origin, used for |z| < 2.
    n_int = round(nu)
    is_int = abs(nu - n_int) < 1e-12
    total = np.zeros_like(z)
    term = np.ones_like(z)  # (-z)^k / k!
    for k in range(70):
        if not (is_int and k == n_int - 1):
            total = total + term / (k + 1.0 - nu)
        term = term * (-z) / (k + 1.0)
    if is_int:
        n = int(n_int)
        lead = (-z) ** (n - 1) / math.factorial(n - 1) * (-np.log(z) + special.digamma(n))
        value = lead - total
    else:
        value = special.gamma(1.0 - nu) * z ** (nu - 1.0) - total
    return np.exp(z) * value


def expint_scaled(nu: float, z) -> np.ndarray:
    """Return ``exp(z) * E_nu(z)`` elementwise.

    ``z = 0`` gives ``1 / (nu - 1)`` which requires ``nu > 1``.
    """
    if nu <= 0:
        raise ValueError(f"order must be positive, got {nu}")
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.empty_like(flat)
    zero = flat == 0
    big = (np.abs(flat) >= 2.0) & ~zero
    small = ~big & ~zero
    if zero.any():
        if nu <= 1:
            raise ValueError("E_nu(0) diverges for nu <= 1")
        out[zero] = 1.0 / (nu - 1.0)
    if big.any():
        out[big] = _expint_cf(nu, flat[big])
    if small.any():
        out[small] = _expint_series(nu, flat[small])
    return out.reshape(z.shape)


def _ml_series_scaled(alpha: float, beta: float, z: np.ndarray, shift: np.ndarray) -> np.ndarray:
    zmax = float(z.max()) if z.size else 0.0
    n_terms = int(2.0 * max(zmax, 1.0) ** (1.0 / alpha) / alpha) + 60
    k = np.arange(n_terms, dtype=float)
    args = alpha * k + beta
    sign = special.gammasgn(args)
    lg = special.gammaln(args)
    with np.errstate(divide="ignore", invalid="ignore"):
        logz = np.log(z)
        # log|term| = k log z - log|Gamma(alpha k + beta)| - shift
        expo = k[None, :] * logz[:, None] - lg[None, :] - shift[:, None]
    # compensate for k = 0 when z = 0 (0 * -inf)
    expo[:, 0] = -lg[0] - shift
    terms = sign[None, :] * np.exp(expo)
    # 1/Gamma vanishes at nonpositive integers
    pole = (args <= 0) & (np.abs(args - np.round(args)) < 1e-14)
    terms[:, pole] = 0.0
    return terms.sum(axis=1)


def _ml_asymptotic_scaled(alpha: float, beta: float, z: np.ndarray, shift: np.ndarray) -> np.ndarray:
    root = z ** (1.0 / alpha)
    lead = z ** ((1.0 - beta) / alpha) / alpha * np.exp(root - shift)
    tail = np.zeros_like(z)
    for k in range(1, 16):
        tail = tail + z ** (-k) * special.rgamma(beta - alpha * k)
    return lead - tail * np.exp(-shift)


def mittag_leffler_scaled(alpha: float, beta: float, z, shift=0.0, switch: float = 500.0) -> np.ndarray:
    """Return ``exp(-shift) * E_{alpha,beta}(z)`` for ``z >= 0``.

    The series is summed in log space; beyond ``switch`` the algebraic
    asymptotic expansion takes over.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    shift = np.broadcast_to(np.asarray(shift, dtype=float), z.shape).copy()
    if np.any(z < 0):
        raise ValueError("only nonnegative arguments are supported")
    out = np.empty_like(z)
    low = z <= switch
    if low.any():
        out[low] = _ml_series_scaled(alpha, beta, z[low], shift[low])
    if (~low).any():
        out[~low] = _ml_asymptotic_scaled(alpha, beta, z[~low], shift[~low])
    return out
