import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochres import Bracket, QuadratureConfig, erf, find_root, integrate_line, maximize_scalar, normal_cdf
from stochres.errors import BadBracket, NonConvergence, NonFinite

SQRT_PI = math.sqrt(math.pi)


def erf_series(x: float) -> float:
    """Taylor-series oracle, independent of the library path."""
    term = x
    total = 0.0
    n = 0
    while abs(term) > 1e-18:
        total += term / (2 * n + 1)
        n += 1
        term *= -x * x / n
    return 2.0 / SQRT_PI * total


# ---------------------------------------------------------------------------
# erf / normal_cdf
# ---------------------------------------------------------------------------


def test_erf_at_zero():
    assert erf(0.0) == 0.0


def test_erf_matches_series_oracle():
    assert erf(1.0) == pytest.approx(0.8427007929, abs=1e-9)
    assert erf(-1.0) == pytest.approx(-0.8427007929, abs=1e-9)
    for x in np.linspace(-3, 3, 25):
        assert erf(float(x)) == pytest.approx(erf_series(float(x)), abs=1e-13)


@given(st.floats(min_value=-5.5, max_value=5.5, allow_nan=False))
@settings(max_examples=60, deadline=None)
def test_erf_odd_and_bounded(x):
    assert erf(-x) == pytest.approx(-erf(x), abs=1e-15)
    assert abs(erf(x)) < 1.0


def test_erf_strictly_increasing():
    # beyond |x| ~ 5 consecutive doubles saturate, so test where they resolve
    xs = np.linspace(-4.5, 4.5, 200)
    vals = [erf(float(x)) for x in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_normal_cdf_values():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(1.0) == pytest.approx(0.8413447461, abs=1e-9)
    assert normal_cdf(-40.0) < 1e-300


def test_normal_cdf_symmetry():
    for z in np.linspace(-8, 8, 81):
        assert normal_cdf(float(z)) + normal_cdf(float(-z)) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# integrate_line
# ---------------------------------------------------------------------------


def test_gaussian_integral():
    assert integrate_line(lambda x: math.exp(-x * x)) == pytest.approx(SQRT_PI, abs=1e-9)


@pytest.mark.parametrize(
    "f",
    [
        lambda x: x * math.exp(-x * x),
        lambda x: x**3 * math.exp(-x * x),
        lambda x: math.sin(x) * math.exp(-x * x),
        lambda x: x / (1.0 + x**4),
    ],
)
def test_odd_integrands_vanish(f):
    assert abs(integrate_line(f)) <= 1e-12


def test_second_moment_integral():
    # by parts: integral of x^2 e^{-x^2} equals half the Gaussian integral
    expected = SQRT_PI / 2.0
    assert integrate_line(lambda x: x * x * math.exp(-x * x)) == pytest.approx(expected, abs=1e-9)


def test_divergent_integrand_raises():
    with pytest.raises(NonConvergence):
        integrate_line(lambda x: 1.0)


def test_split_points_handle_kinks():
    # e^{-|x|} has a kink at 0; total mass is 2
    val = integrate_line(lambda x: math.exp(-abs(x)), split_at=(0.0,))
    assert val == pytest.approx(2.0, abs=1e-10)


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_subdivisions=0)


# ---------------------------------------------------------------------------
# find_root
# ---------------------------------------------------------------------------


def test_find_root_linear():
    assert find_root(lambda x: x - 2.0, Bracket(0.0, 5.0), tol=1e-10) == pytest.approx(2.0, abs=1e-10)


def test_find_root_erf_level():
    root = find_root(lambda x: erf(x) - 0.5, Bracket(0.0, 1.0), tol=1e-10)
    assert root == pytest.approx(0.4769362762, abs=1e-8)


def test_find_root_bad_bracket():
    with pytest.raises(BadBracket):
        find_root(lambda x: x * x + 1.0, Bracket(0.0, 1.0))


def test_find_root_residuals_small():
    cases = [
        (lambda x: x - 2.0, Bracket(0.0, 5.0), 1.0),
        (lambda x: erf(x) - 0.5, Bracket(0.0, 1.0), 2.0 / SQRT_PI),
        (lambda x: math.exp(x) - 3.0, Bracket(0.0, 2.0), 3.0),
    ]
    tol = 1e-10
    for g, bracket, lipschitz in cases:
        root = find_root(g, bracket, tol=tol)
        assert abs(g(root)) <= 10.0 * tol * lipschitz


def test_bracket_validation():
    with pytest.raises(ValueError):
        Bracket(1.0, 1.0)
    with pytest.raises(ValueError):
        Bracket(math.inf, 2.0)


# ---------------------------------------------------------------------------
# maximize_scalar
# ---------------------------------------------------------------------------


def test_maximize_parabola():
    res = maximize_scalar(lambda x: -((x - 1.0) ** 2), Bracket(0.0, 3.0), tol=1e-8)
    assert res.x_star == pytest.approx(1.0, abs=1e-6)


def test_maximize_sine_single_interior_max():
    res = maximize_scalar(math.sin, Bracket(0.0, 2.0 * math.pi), tol=1e-8)
    assert res.x_star == pytest.approx(math.pi / 2.0, abs=1e-6)
    assert len(res.local_maxima) == 1


def two_bumps(x):
    return math.exp(-((x - 1.0) ** 2)) + 0.5 * math.exp(-((x - 3.0) ** 2))


def test_maximize_two_bumps_reports_both():
    res = maximize_scalar(two_bumps, Bracket(0.0, 5.0), tol=1e-8)
    # dense-grid oracle for the true peak locations
    xs = np.linspace(0.0, 5.0, 200_001)
    ys = np.array([two_bumps(float(x)) for x in xs])
    interior = (ys[1:-1] >= ys[:-2]) & (ys[1:-1] >= ys[2:])
    oracle = xs[1:-1][interior]
    assert len(oracle) == 2
    assert len(res.local_maxima) == 2
    for (x_found, _), x_true in zip(res.local_maxima, oracle):
        assert x_found == pytest.approx(float(x_true), abs=1e-4)
    assert res.x_star == pytest.approx(float(oracle[0]), abs=1e-4)


@pytest.mark.parametrize("c", [0.5, 3.0, 250.0])
def test_maximize_scale_invariance(c):
    base = maximize_scalar(two_bumps, Bracket(0.0, 5.0), tol=1e-8)
    scaled = maximize_scalar(lambda x: c * two_bumps(x), Bracket(0.0, 5.0), tol=1e-8)
    assert scaled.x_star == pytest.approx(base.x_star, abs=1e-6)


def test_maximize_rejects_nan():
    def h(x):
        return math.nan if 1.0 < x < 1.2 else -x

    with pytest.raises(NonFinite):
        maximize_scalar(h, Bracket(0.0, 3.0))


def test_maximize_grid_floor():
    with pytest.raises(ValueError):
        maximize_scalar(math.sin, Bracket(0.0, 1.0), grid_n=8)
