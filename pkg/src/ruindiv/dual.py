"""Barrier strategies for spectrally positive reserves (the dual model).

The evaluator is built on the spectrally negative process ``-X``.  With

    k(s) = Zbar(s) - Z(s) / Phi + psi'(0+) / q

a barrier at ``b`` is worth ``-k(b - x) + Psi_x(b) k(b)`` for ``x <= b``, where
``Psi_x(b) = Z(b - x) / Z(b)``.  No assumption on the jump measure is needed.
"""

from __future__ import annotations

import math

from scipy import optimize

from .definetti import BarrierPolicy, _check_unit, _level
from .errors import DomainError, NumericalError
from .scale import ScaleEvaluator


def _threshold(ev: ScaleEvaluator) -> float:
    return ev.psi_prime_zero / ev.q


def k_small(ev: ScaleEvaluator, s) -> float:
    """``Zbar(s) - Z(s)/Phi + psi'(0+)/q``; bounded and increasing in ``s``."""
    if s < 0:
        raise DomainError("k is defined for nonnegative arguments")
    return ev.zbar_defect(s) + _threshold(ev)


def zbar_inverse(ev: ScaleEvaluator, level: float, tol: float = 1e-10) -> float:
    """Solve ``Zbar(b) = level`` for ``b >= 0`` (``level >= 0``)."""
    level = float(level)
    if level < 0:
        raise DomainError("Zbar takes only nonnegative values on [0, inf)")
    if level == 0:
        return 0.0
    hi = 1.0
    while ev.z_bar(hi) < level:
        hi *= 2.0
        if hi > 1e4:
            raise NumericalError(f"Zbar stays below {level} on [0, 1e4]")
    b = optimize.brentq(lambda s: ev.z_bar(s) - level, 0.0, hi, xtol=1e-15, rtol=1e-15)
    if abs(ev.z_bar(b) - level) > tol * (1.0 + level):
        raise NumericalError("Zbar inversion missed its tolerance")
    return b


def optimal_barrier_dual(ev: ScaleEvaluator, lam: float = 0.0) -> BarrierPolicy:
    """Smooth-fit barrier ``Zbar^{-1}(lam - psi'(0+)/q)``, or zero below the threshold."""
    lam = float(lam)
    if lam < 0:
        raise DomainError("the multiplier must be nonnegative")
    target = lam - _threshold(ev)
    return BarrierPolicy(zbar_inverse(ev, target) if target > 0 else 0.0)


def unconstrained_barrier_dual(ev: ScaleEvaluator) -> float:
    return optimal_barrier_dual(ev, 0.0).level


def lambda_bar_dual(ev: ScaleEvaluator) -> float:
    """Largest multiplier with barrier zero: ``max(psi'(0+)/q, 0)``."""
    return max(_threshold(ev), 0.0)


def lambda_of_b_dual(ev: ScaleEvaluator, b: float) -> float:
    """``Zbar(b) + psi'(0+)/q`` for ``b > b_0``; zero at ``b_0``."""
    b = _level(b)
    b0 = unconstrained_barrier_dual(ev)
    tol = 1e-9 * (1.0 + b0)
    if b < b0 - tol:
        raise DomainError(f"the map is defined for b >= b0 = {b0}")
    if abs(b - b0) <= tol:
        return 0.0
    return ev.z_bar(b) + _threshold(ev)


def smooth_fit_residual(ev: ScaleEvaluator, lam: float, b: float) -> float:
    """``1/Phi + (k(b) - lam)/Z(b)``; zero at the smooth-fit barrier when ``b > 0``."""
    return 1.0 / ev.phi + (k_small(ev, b) - lam) / ev.z(b)


def psi_dual(ev: ScaleEvaluator, x: float, b) -> float:
    """``E_x[exp(-q tau)]`` under the barrier at ``b``: ``Z(b - x) / Z(b)``."""
    x, b = float(x), _level(b)
    if x < 0:
        raise DomainError("initial reserve must be nonnegative")
    if x > b:
        return _check_unit(math.exp(-ev.phi * b) / ev.z_scaled(b), "Psi")
    return _check_unit(ev.z_scaled(b - x) * math.exp(-ev.phi * x) / ev.z_scaled(b), "Psi")


def k_bar_dual(ev: ScaleEvaluator, x: float) -> float:
    """Do-nothing floor ``exp(-Phi x)``."""
    x = float(x)
    if x < 0:
        raise DomainError("initial reserve must be nonnegative")
    return math.exp(-ev.phi * x)


def value_barrier_dual(ev: ScaleEvaluator, x: float, b) -> float:
    """Expected discounted dividends of the barrier at ``b``."""
    x, b = float(x), _level(b)
    if x < 0:
        raise DomainError("initial reserve must be nonnegative")
    extra = 0.0
    if x > b:
        extra, x = x - b, b
    return extra - k_small(ev, b - x) + psi_dual(ev, x, b) * k_small(ev, b)


def value_barrier_dual_lagrangian(ev: ScaleEvaluator, x: float, b, lam: float, K: float) -> float:
    """Lagrangian value ``V(x; b) + lam (K - Psi_x(b))``."""
    lam = float(lam)
    if lam < 0:
        raise DomainError("the multiplier must be nonnegative")
    value = value_barrier_dual(ev, x, b)
    if lam == 0:
        return value
    return value + lam * (float(K) - psi_dual(ev, x, b))
