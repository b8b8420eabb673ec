import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ruindiv._special import expint_scaled, mittag_leffler_scaled


def mp_expint_scaled(nu, z):
    return complex(mp.exp(z) * mp.expint(nu, z))


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.0, 2.5, 3.5])
@pytest.mark.parametrize("z", [1e-3, 0.3, 1.9, 2.1, 7.0, 40.0, 3 + 4j, 0.5 - 2j, 25 + 60j])
def test_expint_scaled_matches_mpmath(nu, z):
    got = complex(expint_scaled(nu, np.array([z], dtype=complex))[0])
    want = mp_expint_scaled(nu, z)
    assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


@given(st.floats(0.01, 50.0), st.floats(-50.0, 50.0), st.sampled_from([1.5, 2.5, 3.0]))
def test_expint_scaled_right_half_plane(re, im, nu):
    z = complex(re, im)
    got = complex(expint_scaled(nu, np.array([z]))[0])
    assert abs(got - mp_expint_scaled(nu, z)) <= 1e-11 * max(1.0, abs(got))


def test_expint_scaled_at_zero():
    assert float(np.real(expint_scaled(2.5, np.array([0.0 + 0j]))[0])) == pytest.approx(1 / 1.5)


def mp_ml(alpha, beta, z):
    return mp.nsum(lambda k: mp.mpf(z) ** k / mp.gamma(alpha * k + beta), [0, mp.inf])


@pytest.mark.parametrize("beta", [1.0, 1.5, 2.0, 0.5, -0.5])
@pytest.mark.parametrize("z", [0.0, 0.1, 3.0, 40.0, 300.0])
def test_mittag_leffler_series_matches_mpmath(beta, z):
    mp.mp.dps = 40
    want = float(mp_ml(1.5, beta, z))
    got = float(mittag_leffler_scaled(1.5, beta, np.array([z]))[0])
    assert got == pytest.approx(want, rel=1e-11, abs=1e-14)


@pytest.mark.parametrize("beta", [1.0, 1.5, 2.0])
def test_mittag_leffler_asymptotic_branch(beta):
    mp.mp.dps = 60
    z = 700.0
    shift = z ** (1 / 1.5)
    want = float(mp_ml(1.5, beta, z) * mp.exp(-shift))
    got = float(mittag_leffler_scaled(1.5, beta, np.array([z]), shift=shift)[0])
    assert got == pytest.approx(want, rel=1e-10)
