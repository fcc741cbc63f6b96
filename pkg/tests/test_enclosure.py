"""This module contains tests for the Enclosure class."""
from fractions import Fraction

import pytest

from ks2lab.enclosure import Enclosure, scalar_to_json


def test_exact_enclosure():
    """Test the Enclosure exact constructor."""
    third = Enclosure.exact(Fraction(1, 3))
    assert third.is_exact
    assert third.width == 0
    assert third.radius == 0.0
    assert third.contains(Fraction(1, 3))
    assert not third.contains(0.3)


def test_around():
    """Test the Enclosure around constructor."""
    enclosure = Enclosure.around(1, 0.5)
    assert enclosure.lo == Fraction(1, 2)
    assert enclosure.hi == Fraction(3, 2)
    assert enclosure.contains(1.2)
    assert not enclosure.is_exact
    with pytest.raises(ValueError):
        Enclosure.around(1, -0.5)


def test_reversed_bounds():
    """Test that reversed bounds are rejected."""
    with pytest.raises(ValueError):
        Enclosure(2, 1)


def test_exact_arithmetic_stays_exact():
    """Test that sums of exact enclosures stay exact."""
    total = Enclosure.exact(Fraction(1, 2)) + Fraction(1, 3)
    assert total.is_exact
    assert total.value == Fraction(5, 6)
    difference = Enclosure.exact(Fraction(1, 2)) - Enclosure.exact(Fraction(1, 2))
    assert difference.value == 0


def test_mixed_arithmetic_falls_back_to_float():
    """Test that mixing in a float enclosure gives float bounds."""
    total = Enclosure.exact(Fraction(1, 2)) + Enclosure(0.1, 0.2)
    assert isinstance(total.value, float)
    assert total.lo == pytest.approx(0.6)
    assert total.hi == pytest.approx(0.7)


def test_interval_product():
    """Test the Enclosure multiplication."""
    product = Enclosure(-1, 2) * Enclosure(3, 4)
    assert product.lo == -4
    assert product.hi == 8
    assert product.value == Fraction(7, 4)


def test_partial_propagates():
    """Test that the partial flag survives arithmetic."""
    partial = Enclosure.around(1.0, 0.1, partial=True)
    assert (partial + Enclosure.exact(1)).partial
    assert (Enclosure.exact(2) * partial).partial
    assert (-partial).partial


def test_widen():
    """Test the Enclosure widen method."""
    enclosure = Enclosure.exact(Fraction(1)).widen(Fraction(1, 4))
    assert enclosure.lo == Fraction(3, 4)
    assert enclosure.hi == Fraction(5, 4)
    assert enclosure.value == 1
    with pytest.raises(ValueError):
        enclosure.widen(-1)


def test_to_dict():
    """Test the Enclosure to_dict method."""
    assert Enclosure.exact(Fraction(1, 3)).to_dict() == {
        "value": "1/3",
        "lo": "1/3",
        "hi": "1/3",
        "partial": False,
    }


def test_scalar_to_json():
    """Test the JSON serialization of scalars."""
    assert scalar_to_json(Fraction(4)) == "4"
    assert scalar_to_json(Fraction(-3, 8)) == "-3/8"
    assert scalar_to_json(0.25) == 0.25
