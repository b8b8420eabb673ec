import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracle_values as ov
from ruindiv import DomainError, ProcessModel, ScaleEvaluator, verify_laplace_identity
from ruindiv.scale import trapezoid_integral_w


class DiffusionOracle:
    """Closed forms for ``psi(t) = c t + s t^2 / 2`` from the two roots of ``psi = q``."""

    def __init__(self, c, sigma, q):
        a = 0.5 * sigma**2
        disc = math.sqrt(c * c + 4 * a * q)
        self.r1 = (-c + disc) / (2 * a)
        self.r2 = (-c - disc) / (2 * a)
        self.k = 1.0 / (a * (self.r1 - self.r2))
        self.q = q

    def w(self, x):
        return self.k * (math.exp(self.r1 * x) - math.exp(self.r2 * x))

    def w1(self, x):
        return self.k * (self.r1 * math.exp(self.r1 * x) - self.r2 * math.exp(self.r2 * x))

    def z(self, x):
        r1, r2 = self.r1, self.r2
        return 1.0 + self.q * self.k * ((math.exp(r1 * x) - 1) / r1 - (math.exp(r2 * x) - 1) / r2)

    def zbar(self, x):
        r1, r2 = self.r1, self.r2
        inner = lambda r: (math.exp(r * x) - 1 - r * x) / r**2
        return x + self.q * self.k * (inner(r1) - inner(r2))


DIFF = DiffusionOracle(0.3, 0.8, 0.1)
XS = [0.01, 0.05, 0.3, 1.0, 2.5, 5.0, 10.0]


def test_negative_and_zero_arguments(ev1, ev3):
    assert ev1.w(-1.0) == 0.0
    assert ev1.w(0.0) == pytest.approx(1.0)
    assert ev3.w(0.0) == 0.0
    assert ev1.z(-5.0) == 1.0 and ev1.z(0.0) == 1.0
    assert ev1.z_bar(-2.0) == -2.0 and ev1.z_bar(0.0) == 0.0


def test_stable_series_value(ev3):
    series = sum(0.1**k / math.gamma(1.5 * k + 1.5) for k in range(60))
    assert ev3.w(1.0) == pytest.approx(series, rel=1e-12)
    assert ev3.w(2.0) == pytest.approx(ov.EX3_W_2, rel=1e-10)


def test_stable_derivative_at_zero_is_infinite(ev3):
    assert ev3.w1_at_zero == math.inf
    assert ev3.w(0.0, 1) == math.inf


def test_bounded_variation_boundary(ev1):
    assert ev1.w1_at_zero == pytest.approx((1.0 + 0.05) / 1.0)
    assert ev1.w(1e-7, 1) == pytest.approx(ev1.w1_at_zero, rel=1e-4)


@pytest.mark.parametrize(
    "fixture, x, name, want",
    [
        ("ev1", 1.0, "w", ov.EX1_W_1),
        ("ev2", 1.0, "w", ov.EX2_W_1),
        ("ev2", 1.0, "z", ov.EX2_Z_1),
        ("ev2", 1.0, "z_bar", ov.EX2_ZBAR_1),
        ("ev_exp", 2.0, "w", ov.EXP_W_2),
        ("ev_exp", 2.0, "z", ov.EXP_Z_2),
        ("ev_exp_num", 2.0, "w", ov.EXP_W_2),
        ("ev_exp_num", 2.0, "z", ov.EXP_Z_2),
    ],
)
def test_against_frozen_oracles(request, fixture, x, name, want):
    ev = request.getfixturevalue(fixture)
    assert getattr(ev, name)(x) == pytest.approx(want, rel=1e-9)


def test_phi_oracles(ev1, ev2, ev3, ev_exp):
    assert ev1.phi == pytest.approx(ov.EX1_PHI, rel=1e-12)
    assert ev2.phi == pytest.approx(ov.EX2_PHI, rel=1e-12)
    assert ev3.phi == pytest.approx(ov.EX3_PHI, rel=1e-12)
    assert ev_exp.phi == pytest.approx(ov.EXP_PHI, rel=1e-12)


@pytest.mark.parametrize("x", XS)
@pytest.mark.parametrize("fixture", ["ev_diff", "ev_diff_num"])
def test_pure_diffusion_analytic(request, fixture, x):
    ev = request.getfixturevalue(fixture)
    assert ev.w(x) == pytest.approx(DIFF.w(x), rel=1e-7)
    assert ev.w(x, 1) == pytest.approx(DIFF.w1(x), rel=1e-7)
    assert ev.z(x) == pytest.approx(DIFF.z(x), rel=1e-7)
    assert ev.z_bar(x) == pytest.approx(DIFF.zbar(x), rel=1e-7)


@pytest.mark.parametrize(
    "closed, numeric", [("ev_exp", "ev_exp_num"), ("ev_diff", "ev_diff_num"), ("ev3", "ev3_num")]
)
def test_numeric_matches_closed_form(request, closed, numeric):
    a, b = request.getfixturevalue(closed), request.getfixturevalue(numeric)
    x = np.geomspace(0.01, 10.0, 60)
    for name in ("w", "z", "z_bar"):
        np.testing.assert_allclose(getattr(b, name)(x), getattr(a, name)(x), rtol=1e-6)
    np.testing.assert_allclose(b.w(x, 1), a.w(x, 1), rtol=1e-6)


@given(x=st.floats(0.01, 10.0))
def test_cancellation_free_combinations(ev_exp, x):
    ev = ev_exp
    w, w1, zz = ev.w(x), ev.w(x, 1), ev.z(x)
    assert ev.k_bar(x) == pytest.approx(zz - ev.q * w / ev.phi, rel=1e-9, abs=1e-12)
    assert ev.growth_defect(x) == pytest.approx(w1 - ev.phi * w, rel=1e-8, abs=1e-10)
    assert ev.zbar_defect(x) == pytest.approx(ev.z_bar(x) - zz / ev.phi, rel=1e-8, abs=1e-10)


def test_z_integrates_w(ev1):
    got = ev1.integral_w(0.5, 3.0)
    assert trapezoid_integral_w(ev1, 0.5, 3.0, step=1e-3) == pytest.approx(got, rel=1e-6)


@pytest.mark.parametrize("fixture", ["ev1", "ev2", "ev3", "ev_exp"])
def test_laplace_identity(request, fixture):
    ev = request.getfixturevalue(fixture)
    for beta in ev.phi + np.array([0.1, 1.0, 5.0]):
        assert verify_laplace_identity(ev, beta) < 1e-6


def test_laplace_identity_rejects_phi(ev1):
    with pytest.raises(DomainError):
        verify_laplace_identity(ev1, ev1.phi)


def test_q_must_be_positive():
    with pytest.raises(DomainError):
        ScaleEvaluator(ProcessModel.stable(1.5), 0.0)


def test_vectorized_shape(ev1):
    x = np.array([[-1.0, 0.0], [0.5, 2.0]])
    out = ev1.w(x)
    assert out.shape == (2, 2)
    assert out[0, 0] == 0.0 and out[1, 1] == pytest.approx(ev1.w(2.0))


@pytest.mark.parametrize("fixture", ["ev1", "ev2", "ev3", "ev_exp", "ev_diff"])
def test_asymptotic_growth(request, fixture):
    ev = request.getfixturevalue(fixture)
    target = 1.0 / ev.psi_prime_phi
    gaps = np.abs(ev.w_scaled(np.array([5.0, 10.0, 20.0, 40.0])) - target)
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 1e-4 * target


# shape properties on randomly drawn points

@pytest.mark.parametrize("fixture", ["ev1", "ev2", "ev3", "ev_exp", "ev_diff"])
@given(x=st.floats(0.01, 15.0), h=st.floats(0.01, 0.5))
def test_w_increasing_and_log_concave(request, fixture, x, h):
    ev = request.getfixturevalue(fixture)
    pts = np.array([x - h if x > h else x / 2, x, x + h])
    logw = ev.phi * pts + np.log(ev.w_scaled(pts))
    assert logw[2] > logw[1] > logw[0]
    # concavity against the chord, with the left step possibly shorter
    t = (pts[1] - pts[0]) / (pts[2] - pts[0])
    chord = (1 - t) * logw[0] + t * logw[2]
    assert logw[1] >= chord - 1e-9


@pytest.mark.parametrize("fixture", ["ev1", "ev3", "ev_exp", "ev_diff"])
@given(x=st.floats(0.02, 15.0), h=st.floats(0.01, 0.5))
def test_w_prime_log_convex(request, fixture, x, h):
    ev = request.getfixturevalue(fixture)
    assert ev.model.completely_monotone
    h = min(h, x / 2)
    pts = np.array([x - h, x, x + h])
    logw1 = ev.phi * pts + np.log(ev.w_scaled(pts, 1))
    assert logw1[1] <= 0.5 * (logw1[0] + logw1[2]) + 1e-9
