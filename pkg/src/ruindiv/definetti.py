"""Barrier strategies for the spectrally negative model without transaction costs.

With ``zeta_L(s) = (1 + q L W(s)) / W'(s)`` the Lagrangian value of the
barrier at ``b`` is

    V_L(x; b) = W(x) zeta_L(b) - L Z(x) + L K        (x <= b)

which rearranges to ``W(x)/W'(b) + L (K - Psi_x(b))``.  The second form is
what the code evaluates: it is free of overflow and makes complementary
slackness explicit.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError, NumericalError
from .scale import ScaleEvaluator

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
RANGE_TOL = 1e-8
BARRIER_CAP = 1e4


class HeuristicWarning(UserWarning):
    """Optimality of the returned policy is not guaranteed for this model."""


@dataclass(frozen=True)
class BarrierPolicy:
    """Pay out everything above ``level``."""

    level: float

    def __post_init__(self):
        level = float(self.level)
        if not (level >= 0 and math.isfinite(level)):
            raise DomainError(f"barrier level must be finite and nonnegative, got {self.level}")
        object.__setattr__(self, "level", level)


def _level(b) -> float:
    level = float(getattr(b, "level", b))
    if not level >= 0:
        raise DomainError(f"barrier level must be nonnegative, got {level}")
    return level


def _check_unit(value, what):
    arr = np.asarray(value)
    if np.any(arr < -RANGE_TOL) or np.any(arr > 1.0 + RANGE_TOL) or np.any(np.isnan(arr)):
        raise NumericalError(f"{what} left [0, 1]: {value}")
    return value


def warn_if_heuristic(ev: ScaleEvaluator) -> bool:
    """Warn and return True when the optimality theory does not cover ``ev``."""
    if ev.model.completely_monotone:
        return False
    warnings.warn(
        "the Lévy measure has no completely monotone density; barrier optimality is not guaranteed",
        HeuristicWarning,
        stacklevel=3,
    )
    return True


def zeta(ev: ScaleEvaluator, lam: float, s):
    """``(1 + q lam W(s)) / W'(s)``; at ``s = 0`` the right limit."""
    lam = float(lam)
    if lam < 0:
        raise DomainError("the multiplier must be nonnegative")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise DomainError("zeta is defined for nonnegative arguments")
    g0 = ev.w_scaled(s_arr, 0)
    g1 = ev.w_scaled(s_arr, 1)
    if np.any(np.asarray(g1) <= 0):
        raise NumericalError("W' is not positive; the scale function must be increasing")
    with np.errstate(invalid="ignore"):
        out = (np.exp(-ev.phi * s_arr) + ev.q * lam * g0) / g1
    # at zero with W'(0+) = inf the limit is zero
    out = np.where(np.isinf(g1), 0.0, out)
    return float(out) if np.ndim(out) == 0 else out


def stationarity(ev: ScaleEvaluator, lam: float, b: float) -> float:
    """``exp(-Phi b) [W'' + q lam (W W'' - W'^2)](b)``; ``zeta'`` has the opposite sign."""
    g0, g1, g2 = (ev.w_scaled(b, n) for n in range(3))
    if b == 0:
        return g2 + ev.q * lam * (g0 * g2 - g1 * g1)
    return g2 + ev.q * lam * math.exp(ev.phi * b) * (g0 * g2 - g1 * g1)


def golden_max(f, lo, hi, tol=1e-8, max_iter=200):
    """Golden-section search for the maximizer of a unimodal ``f`` on ``[lo, hi]``."""
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def polish_root(f, x0, lo, hi, expand=1e-6):
    """Refine ``x0`` to a sign change of ``f`` within ``[lo, hi]``, if one is found."""
    width = expand * (1.0 + abs(x0))
    f0 = f(x0)
    if f0 == 0:
        return x0
    while True:
        a, b = max(lo, x0 - width), min(hi, x0 + width)
        fa, fb = f(a), f(b)
        if fa * f0 <= 0:
            return optimize.brentq(f, a, x0, xtol=1e-14, rtol=1e-14)
        if fb * f0 <= 0:
            return optimize.brentq(f, x0, b, xtol=1e-14, rtol=1e-14)
        if a <= lo and b >= hi:
            return x0
        width *= 4.0


def optimal_barrier(ev: ScaleEvaluator, lam: float = 0.0, search_bound: float = 10.0, cap: float = BARRIER_CAP) -> BarrierPolicy:
    """Maximizer of ``zeta_lam`` over ``[0, inf)`` (largest one on ties)."""
    warn_if_heuristic(ev)
    lam = float(lam)
    if lam < 0:
        raise DomainError("the multiplier must be nonnegative")
    bound = float(search_bound)
    while True:
        grid = np.linspace(0.0, bound, 129)
        vals = zeta(ev, lam, grid)
        i = int(np.flatnonzero(vals >= vals.max())[-1])
        if i < grid.size - 1:
            break
        bound *= 2.0
        if bound > cap:
            raise NumericalError(f"zeta keeps increasing up to the search cap {cap}")
    if i == 0:
        # bounded variation: the boundary is optimal when zeta starts decreasing
        s0 = stationarity(ev, lam, 0.0)
        if s0 >= 0:
            return BarrierPolicy(0.0)
        lo, hi = 0.0, grid[1]
    else:
        lo, hi = grid[i - 1], grid[i + 1]
    b, _ = golden_max(lambda s: zeta(ev, lam, s), lo, hi)
    if b > 0:
        b = polish_root(lambda s: stationarity(ev, lam, s), b, max(lo, 1e-300), hi)
    return BarrierPolicy(b)


@functools.lru_cache(maxsize=32)
def unconstrained_barrier(ev: ScaleEvaluator) -> float:
    """``b_0``: the optimal barrier of the unconstrained problem."""
    return optimal_barrier(ev, 0.0).level


def lambda_of_b(ev: ScaleEvaluator, b: float, b0: float | None = None) -> float:
    """Multiplier whose optimal barrier is ``b``; zero at ``b = b_0``."""
    b = _level(b)
    b0 = unconstrained_barrier(ev) if b0 is None else float(b0)
    tol = 1e-9 * (1.0 + b0)
    if b < b0 - tol:
        raise DomainError(f"the map is defined for b >= b0 = {b0}")
    if abs(b - b0) <= tol:
        return 0.0
    g0, g1, g2 = (ev.w_scaled(b, n) for n in range(3))
    den = g0 * g2 - g1 * g1
    if not den < 0:
        raise NumericalError(f"W is not strictly log-concave at b = {b} (precision loss)")
    return -g2 / (ev.q * math.exp(ev.phi * b) * den)


def lambda_bar(ev: ScaleEvaluator, tol: float = 1e-10) -> float:
    """Largest multiplier whose optimal barrier is still zero (0 when ``b_0 > 0``)."""
    if unconstrained_barrier(ev) > 0:
        return 0.0

    def positive(lam):
        return optimal_barrier(ev, lam).level > 0

    hi = 1.0
    while not positive(hi):
        hi *= 2.0
        if hi > 1e12:
            raise NumericalError("the barrier stays at zero for every multiplier tried")
    lo = 0.0
    while hi - lo > tol * (1.0 + hi):
        mid = 0.5 * (lo + hi)
        if positive(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _psi_scalar(ev, x, b):
    if x > b:
        x = b
    g0x = ev.w_scaled(x, 0)
    term = 0.0
    if g0x > 0:
        g1b = ev.w_scaled(b, 1)
        term = ev.q * g0x * math.exp(-ev.phi * (b - x)) * ev.growth_defect(b) / (ev.phi * g1b)
    return ev.k_bar(x) + term


def psi_barrier(ev: ScaleEvaluator, x: float, b) -> float:
    """``E_x[exp(-q tau)]`` under the barrier at ``b``."""
    x = float(x)
    if x < 0:
        raise DomainError("initial reserve must be nonnegative")
    return _check_unit(_psi_scalar(ev, x, _level(b)), "Psi")


def k_bar(ev: ScaleEvaluator, x) -> float:
    """Do-nothing floor ``Z(x) - q W(x) / Phi``."""
    if np.any(np.asarray(x) < 0):
        raise DomainError("initial reserve must be nonnegative")
    return _check_unit(ev.k_bar(x), "K_bar")


def value_barrier(ev: ScaleEvaluator, x: float, b) -> float:
    """Expected discounted dividends of the barrier at ``b``."""
    x, b = float(x), _level(b)
    if x < 0:
        raise DomainError("initial reserve must be nonnegative")
    extra = 0.0
    if x > b:
        extra, x = x - b, b
    return extra + ev.w_scaled(x, 0) * math.exp(-ev.phi * (b - x)) / ev.w_scaled(b, 1)


def value_barrier_lagrangian(ev: ScaleEvaluator, x: float, b, lam: float, K: float) -> float:
    """Lagrangian value ``V(x; b) + lam (K - Psi_x(b))``."""
    lam = float(lam)
    value = value_barrier(ev, x, b)
    if lam == 0:
        return value
    return value + lam * (float(K) - psi_barrier(ev, x, b))
