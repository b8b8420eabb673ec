import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ruindiv.inversion import InversionParams, contour, euler_inversion


@pytest.mark.parametrize(
    "transform, exact",
    [
        (lambda s: 1.0 / (s + 1.0), lambda t: math.exp(-t)),
        (lambda s: 1.0 / s**2, lambda t: t),
        (lambda s: 1.0 / (s**2 + 1.0), math.sin),
        (lambda s: 1.0 / (s * (s + 2.0)), lambda t: (1 - math.exp(-2 * t)) / 2),
    ],
)
@pytest.mark.parametrize("t", [0.05, 1.0, 7.5])
def test_known_pairs(transform, exact, t):
    got = float(euler_inversion(transform, [t])[0])
    assert got == pytest.approx(exact(t), abs=1e-8 * max(1.0, t))


@given(st.floats(0.01, 20.0))
def test_bounded_function_absolute_accuracy(t):
    got = float(euler_inversion(lambda s: 1.0 / (s * (s + 1.0)), [t])[0])
    assert abs(got - (1 - math.exp(-t))) < 1e-9


def test_vectorized_matches_scalar():
    ts = np.array([0.1, 1.0, 3.0])
    f = lambda s: 1.0 / (s + 0.5)
    vec = euler_inversion(f, ts)
    for t, v in zip(ts, vec):
        assert v == pytest.approx(float(euler_inversion(f, [t])[0]), rel=1e-12)


def test_avoid_moves_real_node():
    params = InversionParams()
    t = params.abscissa / (2 * 3.0)
    s, a = contour([t], params, avoid=3.0)
    assert abs(s[0, 0].real - 3.0) > 1e-3
    assert a[0] == pytest.approx(params.abscissa + 0.5)


def test_rejects_nonpositive_abscissa():
    with pytest.raises(ValueError):
        euler_inversion(lambda s: 1 / s, [0.0])


@pytest.mark.parametrize("kwargs", [dict(n_terms=0), dict(euler_terms=0), dict(precision=0.0), dict(precision=1.5)])
def test_params_validated(kwargs):
    with pytest.raises(ValueError):
        InversionParams(**kwargs)
