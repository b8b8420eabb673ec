"""Ruin-constrained optimal dividends for spectrally one-sided Lévy reserves."""

__version__ = "0.1.0"

from .constrained import ConstrainedSolution, Dual, NoCost, Status, TransactionCost, classify, duality_gap_report, solve
from .definetti import BarrierPolicy, HeuristicWarning, k_bar, lambda_bar, lambda_of_b, optimal_barrier, psi_barrier, value_barrier, value_barrier_lagrangian, zeta
from .dual import k_bar_dual, k_small, lambda_bar_dual, lambda_of_b_dual, optimal_barrier_dual, psi_dual, value_barrier_dual, value_barrier_dual_lagrangian
from .errors import ConfigError, DomainError, InfeasibleError, NumericalError, RuinDivError, UnsupportedModelError
from .inversion import InversionParams, euler_inversion
from .levy import Exponential, Gamma, Lomax, ModelKind, Orientation, ProcessModel, Variation, laplace_exponent, right_inverse_phi, variation_kind
from .montecarlo import SimulationEstimate, simulate_do_nothing, simulate_policy
from .scale import ScaleEvaluator, ScaleMethod, verify_laplace_identity, w, z, z_bar
from .transaction import BandPolicy, g_lambda, level_curve, optimal_band, psi_band, solve_multiplier_star, value_band, value_band_lagrangian

__all__ = [name for name in dir() if not name.startswith("_")]
