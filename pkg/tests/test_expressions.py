import math

import numpy as np
import pytest

from stochres.expressions import ExpressionError, compile_expression


def test_constants_and_variable():
    assert compile_expression("2.5")(0.0) == 2.5
    assert compile_expression("x")(3.0) == 3.0
    assert compile_expression("1e-2")(0.0) == 0.01


def test_precedence():
    f = compile_expression("2+3*4")
    assert f(0.0) == 14.0
    assert compile_expression("(2+3)*4")(0.0) == 20.0
    assert compile_expression("2*x+1")(3.0) == 7.0


def test_power_right_associative():
    assert compile_expression("2^3^2")(0.0) == 512.0
    assert compile_expression("x^2")(4.0) == 16.0
    assert compile_expression("2^-1")(0.0) == 0.5


def test_unary_minus_binds_looser_than_power():
    assert compile_expression("-x^2")(3.0) == -9.0
    assert compile_expression("(-x)^2")(3.0) == 9.0
    assert compile_expression("--x")(2.0) == 2.0


def test_division():
    assert compile_expression("x/4")(2.0) == 0.5
    assert compile_expression("1/x")(4.0) == 0.25


def test_functions():
    assert compile_expression("exp(x)")(1.0) == pytest.approx(math.e)
    assert compile_expression("tanh(x)")(0.5) == pytest.approx(math.tanh(0.5))
    assert compile_expression("exp(-x^2)")(2.0) == pytest.approx(math.exp(-4.0))


def test_vectorized_evaluation():
    f = compile_expression("-x^3")
    xs = np.array([-1.0, 0.0, 2.0])
    assert np.allclose(f(xs), [1.0, 0.0, -8.0])
    g = compile_expression("1")
    assert np.allclose(g(xs), [1.0, 1.0, 1.0])
    assert g(xs).shape == xs.shape


def test_whitespace_tolerated():
    assert compile_expression(" - x ^ 2 + 1 ")(2.0) == -3.0


@pytest.mark.parametrize(
    "bad",
    ["", "  ", "y", "sin(x)", "2+", "exp(x", "(x", "x)", "2 3", "x & 2", "^2"],
)
def test_malformed_expressions_rejected(bad):
    with pytest.raises(ExpressionError):
        compile_expression(bad)


def test_expression_as_diffusion_coefficient():
    from stochres import DiffusionSpec, check_ergodicity

    spec = DiffusionSpec(
        drift=compile_expression("-x^3"),
        diffusion=compile_expression("1"),
        label="cubic",
    )
    report = check_ergodicity(spec)
    assert report.c2_holds and report.c3_holds
