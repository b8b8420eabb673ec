"""Numerical Laplace-transform inversion by Euler summation (Abate and Whitt).

The Bromwich integral is discretized by the trapezoidal rule along the
vertical line ``Re s = A / (2 t)``; the resulting alternating series is
accelerated by binomial averaging of its partial sums.  The two stages are
exposed separately so that several transforms sharing expensive ingredients
can be inverted on one contour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb


@dataclass(frozen=True)
class InversionParams:
    """Series length, Euler averaging depth and discretization target."""

    n_terms: int = 20
    euler_terms: int = 12
    precision: float = 1e-10

    def __post_init__(self):
        if self.n_terms < 1 or self.euler_terms < 1:
            raise ValueError("inversion needs at least one series and one Euler term")
        if not (0 < self.precision < 1):
            raise ValueError("precision target must lie in (0, 1)")

    @property
    def abscissa(self) -> float:
        return math.log(1.0 / self.precision)


def contour(t, params: InversionParams = InversionParams(), avoid=None):
    """Return the contour nodes ``s`` (shape ``(len(t), K)``) and per-row ``A``.

    ``avoid`` names a real point where the transform has a removable
    singularity; when the real node lands too close to it, ``A`` is moved
    for that abscissa.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise ValueError("inversion abscissae must be positive")
    a = np.full(t.shape, params.abscissa)
    if avoid is not None:
        # only the k = 0 node is real, so it is the only one that can hit it
        close = np.abs(a / (2.0 * t) - avoid) < 1e-3 * max(abs(avoid), 1e-12)
        a = np.where(close, a + 0.5, a)
    k = np.arange(params.n_terms + params.euler_terms + 1)
    s = (a[:, None] + 2j * math.pi * k[None, :]) / (2.0 * t[:, None])
    return s, a


def euler_sum(values, t, a, params: InversionParams = InversionParams()):
    """Combine transform values on the contour from :func:`contour`."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    k = np.arange(values.shape[1])
    terms = np.where(k % 2 == 0, 1.0, -1.0)[None, :] * np.real(values)
    terms[:, 0] *= 0.5
    partial = np.cumsum(terms, axis=1)[:, params.n_terms:]
    m = params.euler_terms
    weights = comb(m, np.arange(m + 1)) / 2.0**m
    return np.exp(a / 2.0) / t * (partial @ weights)


def euler_inversion(transform, t, params: InversionParams = InversionParams(), avoid=None):
    """Invert ``transform`` at the positive abscissae ``t``."""
    s, a = contour(t, params, avoid)
    return euler_sum(transform(s), t, a, params)
