"""This module contains tests for exact step functions."""
from fractions import Fraction

import numpy as np
import pytest

from ks2lab.hk_integrate import Box
from ks2lab.step_functions import StepFunction


@pytest.fixture
def staircase():
    """Return 3 on [0, 1] minus 1 on [1/2, 2]."""
    return 3 * StepFunction.indicator(Box.interval(0, 1)) - StepFunction.indicator(
        Box.interval(Fraction(1, 2), 2)
    )


def test_indicator_integral():
    """Test the exact integral of an indicator."""
    f = StepFunction.indicator(Box.interval(0, 1))
    result = f.integrate_box(Box.interval(Fraction(1, 2), 3))
    assert result.is_exact
    assert result.value == Fraction(1, 2)


def test_pointwise_values(staircase):
    """Test the StepFunction evaluation."""
    assert staircase(0.25) == 3.0
    assert staircase(0.75) == 2.0
    assert staircase(1.5) == -1.0
    assert staircase(5.0) == 0.0
    np.testing.assert_array_equal(staircase(np.array([0.25, 1.5])), [3.0, -1.0])


def test_sup_and_norms(staircase):
    """Test the exact sup and norm bounds."""
    assert staircase.sup_on(Box.interval(0, 2)) == 3
    assert staircase.sup_on(Box.interval(Fraction(3, 2), 2)) == -1
    assert staircase.sup_norm() == 3
    assert staircase.l1_norm_bound() == Fraction(9, 2)


def test_zero_coefficients_dropped():
    """Test that zero coefficients are not stored."""
    f = 0 * StepFunction.indicator(Box.interval(0, 1))
    assert f.terms == []
    assert f.sup_norm() == 0


def test_zero_function():
    """Test the StepFunction zero constructor."""
    zero = StepFunction.zero(2)
    assert zero.dim == 2
    assert zero.integrate_box(Box.centered(1, 2)).value == 0
    with pytest.raises(ValueError):
        StepFunction([])


def test_dimension_mismatch():
    """Test that adding step functions of different dimension fails."""
    with pytest.raises(ValueError):
        StepFunction.indicator(Box.interval(0, 1)) + StepFunction.indicator(
            Box((0, 0), (1, 1))
        )


def test_two_dimensional_integral():
    """Test an exact integral in two dimensions."""
    square = StepFunction.indicator(Box((0, 0), (1, 1)))
    result = square.integrate_box(Box((Fraction(1, 2), Fraction(1, 2)), (2, 2)))
    assert result.value == Fraction(1, 4)
    assert square(0.5, 0.5) == 1.0
    assert square(0.5, 1.5) == 0.0
