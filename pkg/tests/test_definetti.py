import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracle_values as ov
from ruindiv import (
    BarrierPolicy,
    DomainError,
    HeuristicWarning,
    k_bar,
    lambda_bar,
    lambda_of_b,
    optimal_barrier,
    psi_barrier,
    value_barrier,
    value_barrier_lagrangian,
    zeta,
)
from ruindiv.definetti import golden_max, stationarity, unconstrained_barrier


def test_example1_barrier(ev1):
    b0 = optimal_barrier(ev1).level
    assert b0 == pytest.approx(0.42, abs=0.02)
    assert b0 == pytest.approx(ov.EX1_B0, abs=1e-8)
    assert ev1.w(0.42, 1) == pytest.approx(ov.EX1_W1_042, rel=1e-8)


def test_zeta_without_multiplier(ev1):
    s = np.array([0.1, 0.42, 2.0])
    np.testing.assert_allclose(zeta(ev1, 0.0, s), 1.0 / ev1.w(s, 1), rtol=1e-12)


def test_zeta_at_zero_unbounded_variation(ev3, ev_diff):
    assert zeta(ev3, 0.0, 0.0) == 0.0
    # with a Brownian part W'(0+) = 2/sigma^2 is finite, but the limit is still 1/W'(0+)
    assert zeta(ev_diff, 0.0, 0.0) == pytest.approx(0.8**2 / 2)


def test_b0_maximizes_zeta_on_grid(ev1):
    b0 = unconstrained_barrier(ev1)
    grid = np.linspace(0.0, 5.0, 5001)
    assert zeta(ev1, 0.0, b0) >= zeta(ev1, 0.0, grid).max() - 1e-12
    assert abs(stationarity(ev1, 0.0, b0)) < 1e-10


def test_golden_max_on_parabola():
    x, fx = golden_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-7)


@pytest.mark.parametrize("fixture", ["ev1", "ev3", "ev_exp"])
def test_barrier_increases_with_multiplier(request, fixture):
    ev = request.getfixturevalue(fixture)
    levels = [optimal_barrier(ev, lam).level for lam in (0.0, 0.5, 1.0, 2.0, 5.0, 20.0)]
    assert all(b > a for a, b in zip(levels, levels[1:]))


@pytest.mark.parametrize("fixture", ["ev1", "ev3"])
@pytest.mark.parametrize("offset", [0.1, 0.7, 2.0, 6.0])
def test_lambda_round_trip(request, fixture, offset):
    ev = request.getfixturevalue(fixture)
    b = unconstrained_barrier(ev) + offset
    assert optimal_barrier(ev, lambda_of_b(ev, b)).level == pytest.approx(b, abs=1e-6)


def test_lambda_of_b_endpoints(ev1):
    b0 = unconstrained_barrier(ev1)
    assert lambda_of_b(ev1, b0) == 0.0
    assert lambda_of_b(ev1, b0 + 20) > lambda_of_b(ev1, b0 + 10) > 10.0
    with pytest.raises(DomainError):
        lambda_of_b(ev1, b0 / 2)


@pytest.mark.parametrize("fixture", ["ev1", "ev3", "ev_diff"])
@given(a=st.floats(0.01, 8.0), d=st.floats(0.01, 2.0))
def test_lambda_strictly_increasing(request, fixture, a, d):
    ev = request.getfixturevalue(fixture)
    b0 = unconstrained_barrier(ev)
    assert lambda_of_b(ev, b0 + a + d) > lambda_of_b(ev, b0 + a)


def test_lambda_bar(ev1, ev_diff):
    assert lambda_bar(ev1) == 0.0
    # with b0 = 0 (small drift) the threshold is the first multiplier that lifts the barrier
    lb = lambda_bar(ev_diff)
    if unconstrained_barrier(ev_diff) == 0:
        assert optimal_barrier(ev_diff, 0.999 * lb).level == 0.0
        assert optimal_barrier(ev_diff, 1.001 * lb + 1e-9).level > 0.0


def test_value_at_and_above_barrier(ev1):
    b = 1.3
    assert value_barrier(ev1, b, b) == pytest.approx(ev1.w(b) / ev1.w(b, 1), rel=1e-12)
    assert value_barrier(ev1, b + 0.4, b) == pytest.approx(0.4 + ev1.w(b) / ev1.w(b, 1), rel=1e-12)
    assert value_barrier(ev1, 1.0, 1.0) == pytest.approx(ov.EX1_V_1_1, rel=1e-9)
    assert value_barrier_lagrangian(ev1, b, b, 0.0, 0.0) == value_barrier(ev1, b, b)


def test_lagrangian_matches_scale_formula(ev1):
    x, b, lam, K = 0.8, 1.5, 2.0, 0.85
    direct = ev1.w(x) * zeta(ev1, lam, b) - lam * ev1.z(x) + lam * K
    assert value_barrier_lagrangian(ev1, x, b, lam, K) == pytest.approx(direct, rel=1e-8)


def test_psi_oracles(ev1):
    assert psi_barrier(ev1, 1.0, 1.0) == pytest.approx(ov.EX1_PSI_1_1, rel=1e-9)
    assert k_bar(ev1, 1.0) == pytest.approx(ov.EX1_KBAR_1, rel=1e-9)


def test_psi_formula(ev1):
    x, b = 0.6, 2.0
    want = ev1.z(x) - ev1.q * ev1.w(b) / ev1.w(b, 1) * ev1.w(x)
    assert psi_barrier(ev1, x, b) == pytest.approx(want, rel=1e-9)
    assert psi_barrier(ev1, 3.0, b) == pytest.approx(psi_barrier(ev1, b, b), rel=1e-12)


def test_psi_unbounded_variation_at_zero(ev3):
    assert psi_barrier(ev3, 0.0, 2.0) == 1.0
    assert k_bar(ev3, 0.0) == 1.0


@pytest.mark.parametrize("fixture", ["ev1", "ev3"])
def test_psi_tends_to_floor(request, fixture):
    ev = request.getfixturevalue(fixture)
    assert psi_barrier(ev, 1.0, 60.0) == pytest.approx(k_bar(ev, 1.0), abs=1e-4)


@pytest.mark.parametrize("fixture", ["ev1", "ev3"])
def test_floor_decreases_to_zero(request, fixture):
    ev = request.getfixturevalue(fixture)
    x = np.linspace(0.0, 200.0, 400)
    floors = k_bar(ev, x)
    assert np.all(np.diff(floors) < 0)
    # heavy-tailed claims make the floor decay polynomially
    assert k_bar(ev, 1000.0) < 1e-3


@pytest.mark.parametrize("fixture", ["ev1", "ev3", "ev_exp"])
@given(x=st.floats(0.0, 6.0), b=st.floats(0.0, 8.0), d=st.floats(0.01, 3.0))
def test_psi_decreasing_in_barrier(request, fixture, x, b, d):
    ev = request.getfixturevalue(fixture)
    b = unconstrained_barrier(ev) + b
    assert psi_barrier(ev, x, b + d) <= psi_barrier(ev, x, b) + 1e-12


def test_barrier_policy_validation():
    with pytest.raises(DomainError):
        BarrierPolicy(-1.0)
    with pytest.raises(DomainError):
        BarrierPolicy(math.inf)


def test_heuristic_warning_for_gamma_claims(ev2_cl):
    # the dual evaluator's model has Gamma(2,1) jumps, not completely monotone
    with pytest.warns(HeuristicWarning):
        optimal_barrier(ev2_cl)


def test_no_warning_for_completely_monotone(ev1):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        optimal_barrier(ev1)


@pytest.mark.parametrize("lam", [0.0, 1.0, 10.0])
def test_zeta_unimodal(ev1, lam):
    b = optimal_barrier(ev1, lam).level
    left = zeta(ev1, lam, np.linspace(0.0, b, 200))
    right = zeta(ev1, lam, np.linspace(b, b + 10.0, 200))
    assert np.all(np.diff(left) > 0) and np.all(np.diff(right) < 0)


def test_multiplier_irrelevant_without_weight(ev1):
    assert value_barrier_lagrangian(ev1, 1.0, 2.0, 0.0, 0.3) == value_barrier_lagrangian(ev1, 1.0, 2.0, 0.0, 0.0)


@given(x=st.floats(0.0, 8.0), b=st.floats(0.0, 30.0))
def test_psi_above_floor(ev1, x, b):
    assert psi_barrier(ev1, x, b) >= k_bar(ev1, x) - 1e-12
