"""Single band strategies under a fixed transaction cost.

When reserves reach ``b+`` a lump ``b+ - b-`` is paid, of which ``beta`` is
lost to the cost.  For ``x <= b+`` the Lagrangian value is
``W(x) G_L(b-, b+) - L Z(x) + L K`` with

    G_L(b-, b+) = (b+ - b- - beta + L (Z(b+) - Z(b-))) / (W(b+) - W(b-)).

The integral of ``W`` that appears in ``G`` is evaluated as a difference of
``Z`` values, which is exact.  All formulas are evaluated on scale functions
scaled by ``exp(-Phi b+)`` so that large bands do not overflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import definetti
from .definetti import BarrierPolicy, golden_max, psi_barrier, zeta
from .errors import DomainError, InfeasibleError, NumericalError
from .scale import ScaleEvaluator

BAND_CAP = 1e4


class SolverFallbackWarning(UserWarning):
    """A monotonicity assumption failed and a slower fallback search was used."""


@dataclass(frozen=True)
class BandPolicy:
    """Pay ``upper - lower`` (less ``cost``) whenever reserves reach ``upper``."""

    lower: float
    upper: float
    cost: float

    def __post_init__(self):
        lo, hi, beta = float(self.lower), float(self.upper), float(self.cost)
        if not (0 <= lo < hi and math.isfinite(hi)):
            raise DomainError(f"a band needs 0 <= lower < upper, got ({self.lower}, {self.upper})")
        if not beta > 0:
            raise DomainError(f"the transaction cost must be positive, got {self.cost}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "cost", beta)


def _band_levels(lo, hi):
    lo, hi = float(lo), float(hi)
    if not (0 <= lo < hi):
        raise DomainError(f"a band needs 0 <= lower < upper, got ({lo}, {hi})")
    return lo, hi


def _w_gap_scaled(ev, lo, hi):
    """``exp(-Phi hi) (W(hi) - W(lo))``."""
    gap = ev.w_scaled(hi, 0) - ev.w_scaled(lo, 0) * math.exp(-ev.phi * (hi - lo))
    if not gap > 0:
        raise NumericalError(f"degenerate band: W({hi}) = W({lo})")
    return gap


def g_lambda(ev: ScaleEvaluator, lam: float, lo: float, hi: float, beta: float) -> float:
    """Band payoff ratio ``G_lam(lo, hi)`` for transaction cost ``beta``."""
    lo, hi = _band_levels(lo, hi)
    lam = float(lam)
    if lam < 0:
        raise DomainError("the multiplier must be nonnegative")
    shift = math.exp(-ev.phi * (hi - lo))
    num = (hi - lo - beta) * math.exp(-ev.phi * hi)
    if lam:
        num += lam * (ev.z_scaled(hi) - ev.z_scaled(lo) * shift)
    return num / _w_gap_scaled(ev, lo, hi)


def _psi_band_scalar(ev, x, lo, hi):
    if x > hi:
        x = lo
    g0x = ev.w_scaled(x, 0)
    k_lo, k_hi = ev.k_bar(lo), ev.k_bar(hi)
    if g0x == 0:
        return ev.k_bar(x)
    return ev.k_bar(x) + g0x * math.exp(-ev.phi * (hi - x)) * (k_lo - k_hi) / _w_gap_scaled(ev, lo, hi)


def psi_band(ev: ScaleEvaluator, x: float, lo: float, hi: float) -> float:
    """``E_x[exp(-q tau)]`` under the band ``(lo, hi)``."""
    x = float(x)
    if x < 0:
        raise DomainError("initial reserve must be nonnegative")
    lo, hi = _band_levels(lo, hi)
    return definetti._check_unit(_psi_band_scalar(ev, x, lo, hi), "Psi")


def value_band(ev: ScaleEvaluator, x: float, band: BandPolicy) -> float:
    """Expected discounted dividends net of costs under ``band``."""
    x = float(x)
    if x < 0:
        raise DomainError("initial reserve must be nonnegative")
    lo, hi, beta = band.lower, band.upper, band.cost
    extra = 0.0
    if x > hi:
        extra, x = x - lo - beta, lo
    ratio = (hi - lo - beta) * math.exp(-ev.phi * (hi - x)) / _w_gap_scaled(ev, lo, hi)
    return extra + ev.w_scaled(x, 0) * ratio


def value_band_lagrangian(ev: ScaleEvaluator, x: float, band: BandPolicy, lam: float, K: float) -> float:
    """Lagrangian value ``V(x; band) + lam (K - Psi_x(band))``."""
    lam = float(lam)
    if lam < 0:
        raise DomainError("the multiplier must be nonnegative")
    value = value_band(ev, x, band)
    if lam == 0:
        return value
    return value + lam * (float(K) - psi_band(ev, x, band.lower, band.upper))


def _upper_root(f, a, cap):
    """First sign change of ``f`` to the right of ``a`` (where ``f < 0``) on an expanding grid."""
    prev, step = a, 1e-3 * (1.0 + a)
    while True:
        b = a + step
        if b > cap:
            return None
        if f(b) > 0:
            return optimize.brentq(f, prev, b, xtol=1e-14, rtol=1e-14)
        prev, step = b, 2.0 * step


def _stationary_band(ev, lam, beta, b_lam, cap):
    """Interior solution of ``zeta(b-) = G = zeta(b+)`` parametrized by ``b+``."""
    zeta0 = zeta(ev, lam, 0.0)

    def lower(hi):
        g = zeta(ev, lam, hi)
        if zeta0 >= g or b_lam == 0:
            return 0.0
        return optimize.brentq(lambda s: zeta(ev, lam, s) - g, 0.0, b_lam, xtol=1e-14, rtol=1e-14)

    def residual(hi):
        lo = lower(hi)
        if hi - lo <= beta:
            return -1.0
        return g_lambda(ev, lam, lo, hi, beta) - zeta(ev, lam, hi)

    hi = _upper_root(residual, b_lam, cap)
    if hi is None:
        return None
    return lower(hi), hi


def _boundary_band(ev, lam, beta, cap):
    """Best band with ``b- = 0``: ``zeta(b+) = G(0, b+)``."""

    def residual(hi):
        if hi <= beta:
            return -1.0
        return g_lambda(ev, lam, 0.0, hi, beta) - zeta(ev, lam, hi)

    hi = _upper_root(residual, beta, cap)
    return None if hi is None else (0.0, hi)


def maximize_band_nested(ev, lam, beta, tol=1e-8, cap=BAND_CAP):
    """Maximize ``G`` by golden sections over width ``d`` (outer) and lower level ``eta`` (inner)."""
    b_lam = definetti.optimal_barrier(ev, lam).level

    def inner(d):
        if b_lam == 0:
            return 0.0, g_lambda(ev, lam, 0.0, d, beta)
        return golden_max(lambda eta: g_lambda(ev, lam, eta, eta + d, beta), 0.0, b_lam, tol=tol)

    def outer(d):
        return inner(d)[1]

    d_hi = max(2.0 * beta, 1.0)
    while True:
        grid = np.linspace(beta, d_hi, 33)[1:]
        vals = [outer(d) for d in grid]
        i = int(np.argmax(vals))
        if i < len(grid) - 1:
            break
        d_hi *= 2.0
        if d_hi > cap:
            raise NumericalError("band width search reached its cap")
    lo_d = grid[i - 1] if i > 0 else beta
    d, _ = golden_max(outer, lo_d, grid[i + 1], tol=tol)
    eta, _ = inner(d)
    return BandPolicy(eta, eta + d, beta)


def optimal_band(ev: ScaleEvaluator, lam: float, beta: float, method: str = "stationary", cap: float = BAND_CAP) -> BandPolicy:
    """Band maximizing ``G_lam``.

    ``method="stationary"`` solves the first-order conditions directly;
    ``"nested"`` runs the two-level golden-section search.
    """
    lam, beta = float(lam), float(beta)
    if lam < 0:
        raise DomainError("the multiplier must be nonnegative")
    if not beta > 0:
        raise DomainError("the transaction cost must be positive")
    if method == "nested":
        return maximize_band_nested(ev, lam, beta, cap=cap)
    if method != "stationary":
        raise ValueError(f"unknown band method {method!r}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", definetti.HeuristicWarning)
        b_lam = definetti.optimal_barrier(ev, lam).level
    definetti.warn_if_heuristic(ev)
    candidates = []
    interior = _stationary_band(ev, lam, beta, b_lam, cap)
    if interior is not None:
        candidates.append(interior)
    if interior is None or interior[0] > 0:
        boundary = _boundary_band(ev, lam, beta, cap)
        if boundary is not None:
            candidates.append(boundary)
    if not candidates:
        raise NumericalError(f"no stationary band found below the cap {cap} (lam={lam}, beta={beta})")
    scored = [(g_lambda(ev, lam, lo, hi, beta), hi, lo) for lo, hi in candidates]
    best = max(scored)
    return BandPolicy(best[2], best[1], beta)


def _solve_upper(ev, x, lo, K, b_max):
    """``b+`` with ``Psi_x(lo, b+) = K`` given ``Psi_x(lo, lo+) >= K >= Psi_x(lo, b_max)``."""
    f = lambda hi: _psi_band_scalar(ev, x, lo, hi) - K
    a = lo + 1e-12 * (1.0 + lo)
    if f(a) <= 0:
        return a
    if f(b_max) >= 0:
        return b_max
    return optimize.brentq(f, a, b_max, xtol=1e-14, rtol=1e-14)


def _barrier_level_for(ev, x, K, which, cap=BAND_CAP):
    """Smallest (``which="min"``) or largest root ``b`` of ``f(b) = K`` on ``[0, cap]``.

    ``f`` is the barrier constraint for ``"min"`` and ``Psi_x(0, b)`` for ``"max"``,
    both nonincreasing.
    """
    if which == "min":
        f = lambda b: psi_barrier(ev, x, b) - K
        start = 0.0
    else:
        f = lambda b: _psi_band_scalar(ev, x, 0.0, b) - K
        start = 1e-12
    if f(start) <= 0:
        return start
    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > cap:
            raise NumericalError("the level lies too close to the do-nothing floor")
    lo = start
    if which == "max":
        # the largest root: move past any flat stretch at level K
        while f(hi) == 0 and hi < cap:
            hi *= 2.0
    return optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-14)


def level_curve(ev: ScaleEvaluator, x: float, K: float, n: int = 50):
    """``n`` points of ``{(b-, b+): Psi_x(b-, b+) = K}`` from ``(0, b_top)`` to ``(b_low, b_low)``."""
    x, K = float(x), float(K)
    if n < 2:
        raise DomainError("a level curve needs at least two points")
    floor = ev.k_bar(x)
    top = psi_barrier(ev, x, 0.0)
    if not floor < K < top:
        raise InfeasibleError(f"K = {K} lies outside ({floor}, {top})")
    b_low = _barrier_level_for(ev, x, K, "min")
    b_top = _barrier_level_for(ev, x, K, "max")
    points = []
    for lo in np.linspace(0.0, b_low, n):
        if lo >= b_low:
            points.append((b_low, b_low))
            continue
        points.append((float(lo), _solve_upper(ev, x, lo, K, max(b_top, lo) * (1 + 1e-12) + 1e-12)))
    return points


def solve_multiplier_star(ev: ScaleEvaluator, x: float, K: float, beta: float, lam_cap: float = 1e8, method: str = "stationary"):
    """Smallest ``lam >= 0`` whose optimal band meets ``Psi_x = K``; returns ``(lam, band)``."""
    x, K, beta = float(x), float(K), float(beta)
    if x < 0:
        raise DomainError("initial reserve must be nonnegative")
    floor = ev.k_bar(x)
    if not K > floor:
        raise InfeasibleError(f"K = {K} does not exceed the do-nothing floor {floor}")
    cache = {}

    def band(lam):
        if lam not in cache:
            cache[lam] = optimal_band(ev, lam, beta, method=method)
        return cache[lam]

    def h(lam):
        b = band(lam)
        return _psi_band_scalar(ev, x, b.lower, b.upper) - K

    if h(0.0) <= 0:
        return 0.0, band(0.0)
    lams, vals = [0.0], [h(0.0)]
    lam = 1.0
    while True:
        lams.append(lam)
        vals.append(h(lam))
        if vals[-1] <= 0:
            break
        lam *= 2.0
        if lam > lam_cap:
            raise NumericalError(f"the constraint is still violated at the multiplier cap {lam_cap}")
    lo, hi = lams[-2], lams[-1]
    if any(b > a for a, b in zip(vals, vals[1:])):
        warnings.warn("h(lam) is not monotone on the doubling sequence; scanning", SolverFallbackWarning, stacklevel=2)
        scan = np.linspace(0.0, hi, 65)
        hs = [h(s) for s in scan]
        j = next(j for j in range(1, len(scan)) if hs[j] <= 0)
        lo, hi = scan[j - 1], scan[j]
    lam_star = optimize.brentq(h, lo, hi, xtol=1e-14, rtol=1e-14)
    if abs(h(lam_star)) > 1e-8:
        # h can only jump where the optimal band switches branch; take the feasible side
        if h(hi) <= 0 and abs(h(hi)) < abs(h(lam_star)):
            lam_star = hi
    return lam_star, band(lam_star)


def band_curve(ev: ScaleEvaluator, lams, beta: float, method: str = "stationary"):
    """Optimal bands along a multiplier grid."""
    return [optimal_band(ev, lam, beta, method=method) for lam in lams]


__all__ = [
    "BandPolicy",
    "BarrierPolicy",
    "SolverFallbackWarning",
    "band_curve",
    "g_lambda",
    "level_curve",
    "maximize_band_nested",
    "optimal_band",
    "psi_band",
    "solve_multiplier_star",
    "value_band",
    "value_band_lagrangian",
]
