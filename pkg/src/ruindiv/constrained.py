"""Ruin-constrained dividend problems solved through their Lagrangian dual.

The constraint ``E_x[exp(-q tau)] <= K`` is attached with a multiplier.  For
each regime the optimal Lagrangian policy is a barrier or a band, the
constraint map ``Psi`` is monotone along those policies, and the primal
optimum is the policy where ``Psi`` meets ``K``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import definetti, dual, transaction
from .definetti import BarrierPolicy
from .errors import DomainError, NumericalError
from .scale import ScaleEvaluator
from .transaction import BandPolicy

CONSTRAINT_TOL = 1e-8
CLASSIFY_TOL = 1e-6
GAP_TOL = 1e-3
BARRIER_CAP = 1e4


class Status(str, enum.Enum):
    INACTIVE = "Inactive"
    BINDING = "Binding"
    DO_NOTHING_BOUNDARY = "DoNothingBoundary"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class NoCost:
    """Spectrally negative reserves, barrier strategies."""

    name = "no-cost"


@dataclass(frozen=True)
class TransactionCost:
    """Spectrally negative reserves, single band strategies with cost ``beta``."""

    beta: float
    name = "cost"

    def __post_init__(self):
        if not float(self.beta) > 0:
            raise DomainError("the transaction cost must be positive")


@dataclass(frozen=True)
class Dual:
    """Spectrally positive reserves, barrier strategies."""

    name = "dual"


Regime = NoCost | TransactionCost | Dual


@dataclass(frozen=True)
class ConstrainedSolution:
    status: Status
    policy: BarrierPolicy | BandPolicy | None
    multiplier: float
    value: float
    constraint_value: float
    k_bar: float
    K: float
    heuristic: bool = False

    @property
    def slackness(self) -> float:
        if not math.isfinite(self.multiplier) or math.isnan(self.constraint_value):
            return 0.0
        return self.multiplier * (self.K - self.constraint_value)


class _Ops:
    """Regime-specific formulas behind one interface."""

    def __init__(self, ev: ScaleEvaluator, regime: Regime):
        self.ev = ev
        self.regime = regime
        self.is_band = isinstance(regime, TransactionCost)

    def k_bar(self, x):
        if isinstance(self.regime, Dual):
            return dual.k_bar_dual(self.ev, x)
        return definetti.k_bar(self.ev, x)

    def policy(self, lam):
        if isinstance(self.regime, Dual):
            return dual.optimal_barrier_dual(self.ev, lam)
        if self.is_band:
            return transaction.optimal_band(self.ev, lam, self.regime.beta)
        return definetti.optimal_barrier(self.ev, lam)

    def psi(self, x, policy):
        if isinstance(self.regime, Dual):
            return dual.psi_dual(self.ev, x, policy)
        if self.is_band:
            return transaction.psi_band(self.ev, x, policy.lower, policy.upper)
        return definetti.psi_barrier(self.ev, x, policy)

    def value(self, x, policy):
        if isinstance(self.regime, Dual):
            return dual.value_barrier_dual(self.ev, x, policy)
        if self.is_band:
            return transaction.value_band(self.ev, x, policy)
        return definetti.value_barrier(self.ev, x, policy)

    def lambda_of_b(self, b):
        if isinstance(self.regime, Dual):
            return dual.lambda_of_b_dual(self.ev, b)
        return definetti.lambda_of_b(self.ev, b)

    def b0(self):
        if isinstance(self.regime, Dual):
            return dual.unconstrained_barrier_dual(self.ev)
        return definetti.unconstrained_barrier(self.ev)


def _check_inputs(x, K):
    x, K = float(x), float(K)
    if x < 0:
        raise DomainError("initial reserve must be nonnegative")
    if not 0 <= K <= 1:
        raise DomainError(f"K must lie in [0, 1], got {K}")
    return x, K


def _quiet_policy(ops, lam):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", definetti.HeuristicWarning)
        return ops.policy(lam)


def classify(ev: ScaleEvaluator, x: float, K: float, regime: Regime = NoCost(), tol: float = CLASSIFY_TOL) -> Status:
    """Feasibility status of the constraint level ``K`` at reserve ``x``."""
    x, K = _check_inputs(x, K)
    ops = _Ops(ev, regime)
    floor = ops.k_bar(x)
    if K < floor - tol:
        return Status.INFEASIBLE
    if abs(K - floor) <= tol:
        return Status.DO_NOTHING_BOUNDARY
    if K >= ops.psi(x, _quiet_policy(ops, 0.0)):
        return Status.INACTIVE
    return Status.BINDING


def _is_heuristic(ev, regime):
    return not isinstance(regime, Dual) and not ev.model.completely_monotone


def _solve_barrier_level(ops, x, K, b0):
    f = lambda b: ops.psi(x, b) - K
    hi = max(2.0 * b0, b0 + 1.0)
    while f(hi) > 0:
        hi = 2.0 * hi
        if hi > BARRIER_CAP:
            return None
    return optimize.brentq(f, b0, hi, xtol=1e-14, rtol=1e-15)


def solve(ev: ScaleEvaluator, x: float, K: float, regime: Regime = NoCost(),
          tol: float = CLASSIFY_TOL) -> ConstrainedSolution:
    """Optimal policy of the ruin-constrained problem at reserve ``x``."""
    x, K = _check_inputs(x, K)
    ops = _Ops(ev, regime)
    floor = ops.k_bar(x)
    heuristic = _is_heuristic(ev, regime)
    if heuristic:
        definetti.warn_if_heuristic(ev)
    status = classify(ev, x, K, regime, tol)
    common = dict(k_bar=floor, K=K, heuristic=heuristic)
    if status is Status.INFEASIBLE:
        return ConstrainedSolution(status, None, math.inf, -math.inf, math.nan, **common)
    if status is Status.DO_NOTHING_BOUNDARY:
        return ConstrainedSolution(status, None, math.inf, 0.0, floor, **common)
    if status is Status.INACTIVE:
        policy = _quiet_policy(ops, 0.0)
        return ConstrainedSolution(status, policy, 0.0, ops.value(x, policy), ops.psi(x, policy), **common)
    if ops.is_band:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", definetti.HeuristicWarning)
            lam, policy = transaction.solve_multiplier_star(ev, x, K, regime.beta)
    else:
        b0 = ops.b0()
        b = _solve_barrier_level(ops, x, K, b0)
        if b is None:
            if K - floor <= 1e2 * tol:
                return ConstrainedSolution(Status.DO_NOTHING_BOUNDARY, None, math.inf, 0.0, floor, **common)
            raise NumericalError(f"no barrier below {BARRIER_CAP} meets K = {K}")
        policy = BarrierPolicy(b)
        lam = ops.lambda_of_b(b)
    psi = ops.psi(x, policy)
    if abs(psi - K) > CONSTRAINT_TOL:
        raise NumericalError(f"constraint residual {psi - K:.3e} exceeds {CONSTRAINT_TOL}")
    return ConstrainedSolution(status, policy, lam, ops.value(x, policy), psi, **common)


@dataclass
class DualityReport:
    status: Status
    primal: float
    dual: float
    gap: float
    primal_argmax: object
    dual_argmin: float
    lambdas: np.ndarray = field(repr=False)
    dual_values: np.ndarray = field(repr=False)
    primal_values: np.ndarray = field(repr=False)
    feasible: np.ndarray = field(repr=False)

    @property
    def certified(self) -> bool:
        return -1e-6 <= self.gap <= GAP_TOL


def _refined_grid(center, half_width, n, lo=0.0):
    """``n`` points clustering cubically around ``center``."""
    u = np.linspace(-1.0, 1.0, n)
    return np.maximum(center + half_width * np.sign(u) * np.abs(u) ** 3, lo)


def default_grids(ev, x, K, regime=NoCost(), n=200):
    """Multiplier and policy grids centred on the solution.

    For barrier regimes the policy grid holds barrier levels; for the band
    regime the primal candidates are the optimal bands along the multiplier
    grid, so only multipliers are returned.
    """
    sol = solve(ev, x, K, regime)
    lam_star = sol.multiplier if math.isfinite(sol.multiplier) else 1.0
    lams = _refined_grid(lam_star, max(lam_star, 1.0), n)
    if isinstance(regime, TransactionCost) or sol.policy is None:
        return lams, None
    b_star = sol.policy.level
    b0 = _Ops(ev, regime).b0()
    return lams, _refined_grid(b_star, max(b_star - b0, 0.5), n, lo=0.0)


def duality_gap_report(ev: ScaleEvaluator, x: float, K: float, regime: Regime = NoCost(),
                       lambdas=None, levels=None, n: int = 200) -> DualityReport:
    """Numerical certificate of strong duality on finite grids.

    The primal side is the best plain value over feasible grid policies; the
    dual side is the smallest Lagrangian value over the multiplier grid.
    """
    x, K = _check_inputs(x, K)
    ops = _Ops(ev, regime)
    status = classify(ev, x, K, regime)
    if lambdas is None:
        if status in (Status.INFEASIBLE, Status.DO_NOTHING_BOUNDARY):
            lambdas = np.geomspace(1.0, 1e6, n)
        else:
            lambdas, auto_levels = default_grids(ev, x, K, regime, n)
            levels = auto_levels if levels is None else levels
    lambdas = np.asarray(lambdas, dtype=float)
    policies = [_quiet_policy(ops, lam) for lam in lambdas]
    psis = np.array([ops.psi(x, p) for p in policies])
    plain = np.array([ops.value(x, p) for p in policies])
    dual_values = plain + lambdas * (K - psis)
    j = int(np.argmin(dual_values))
    dual_inf = float(dual_values[j])

    if ops.is_band or levels is None:
        candidates = policies + [_quiet_policy(ops, 0.0)]
    else:
        candidates = [BarrierPolicy(b) for b in np.asarray(levels, dtype=float)]
    primal_psi = np.array([ops.psi(x, p) for p in candidates])
    primal_values = np.array([ops.value(x, p) for p in candidates])
    feasible = primal_psi <= K
    if status is Status.DO_NOTHING_BOUNDARY:
        primal_sup, arg = 0.0, None
    elif feasible.any():
        i = int(np.argmax(np.where(feasible, primal_values, -np.inf)))
        primal_sup, arg = float(primal_values[i]), candidates[i]
    else:
        primal_sup, arg = -math.inf, None
    gap = dual_inf - primal_sup if math.isfinite(primal_sup) else math.nan
    return DualityReport(status, primal_sup, dual_inf, gap, arg, float(lambdas[j]),
                         lambdas, dual_values, primal_values, feasible)
