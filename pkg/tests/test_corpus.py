"""This module contains tests for the function and kernel corpora."""
import math

import numpy as np
import pytest

from ks2lab.corpus import FUNCTIONS, load_function
from ks2lab.corpus.functions import dh_pointwise, h, h_antiderivative
from ks2lab.corpus.kernels import (
    KERNEL_FIXTURES,
    KERNEL_FUNCTIONS,
    gaussian_kernel,
    load_kernel_fixture,
    min_kernel,
    product_kernel,
)
from ks2lab.hk_integrate import GAUGE_RIEMANN, HAKE_LIMIT, SERIES_EXACT


def test_load_unknown_function():
    """Test that unknown names raise a ValueError."""
    with pytest.raises(ValueError):
        load_function("paper.unknown")


def test_registry_is_immutable():
    """Test that the registry cannot be modified."""
    with pytest.raises(TypeError):
        FUNCTIONS["new"] = FUNCTIONS["const.one"]


def test_antiderivative_of_h():
    """Test that the antiderivative differentiates to h."""
    t, step = 0.7, 1e-6
    slope = (h_antiderivative(t + step) - h_antiderivative(t - step)) / (2 * step)
    assert slope == pytest.approx(h(t), rel=1e-4)
    assert h(0.0) == 0.0
    assert h_antiderivative(0.0) == 0.0


def test_dh_differs_on_samples_only():
    """Test that D_h samples as h + 1 but integrates like h."""
    assert dh_pointwise(0.5) == pytest.approx(h(0.5) + 1)
    dh = load_function("paper.Dh")
    assert dh.pointwise is dh_pointwise
    assert dh.integrate().value == pytest.approx(-1.0, abs=1e-6)


def test_oscillator_hake_limit():
    """Test the improper integral of h over [0, 1]."""
    result = load_function("paper.h").integrate()
    assert result.mode == HAKE_LIMIT
    assert result.value == pytest.approx(-1.0, abs=1e-6)


def test_oscillator_gauge_away_from_zero():
    """Test the gauge integral of h over [0.1, 1] against its antiderivative."""
    oscillator = load_function("paper.h")
    assert oscillator.is_smooth_on((0.1, 1.0))
    assert not oscillator.is_smooth_on((0.0, 1.0))
    result = oscillator.integrate(mode=GAUGE_RIEMANN, domain=(0.1, 1.0))
    expected = h_antiderivative(1.0) - h_antiderivative(0.1)
    assert expected == pytest.approx(-1.01)
    assert result.mode == GAUGE_RIEMANN
    assert result.value == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("name", ["paper.staircase_f", "paper.staircase_g"])
def test_staircases_integrate_to_log2(name):
    """Test the series integrals of both staircases."""
    result = load_function(name).integrate()
    assert result.mode == SERIES_EXACT
    assert result.value == pytest.approx(math.log(2), abs=1e-9)


def test_series_mode_needs_default_domain():
    """Test that the series mode is refused on other domains."""
    with pytest.raises(ValueError):
        load_function("paper.staircase_f").integrate(domain=(0.0, 0.5))
    with pytest.raises(ValueError):
        load_function("const.one").integrate(mode=SERIES_EXACT)
    with pytest.raises(ValueError):
        load_function("const.one").integrate(mode="monte-carlo")


def test_gauge_mode_functions():
    """Test the bounded corpus functions in gauge mode."""
    assert load_function("const.one").integrate().value == pytest.approx(1.0, abs=1e-12)
    sinc = load_function("sinc")
    assert sinc.integrate(refine_levels=2).value == pytest.approx(sinc.exact_value, rel=1e-8)
    unit = load_function("indicator.unit")
    assert unit.integrate().value == pytest.approx(1.0, abs=1e-2)


def test_inverse_sqrt():
    """Test the improper integral of 1/sqrt(t)."""
    assert load_function("improper.inv_sqrt").integrate(tol=1e-8).value == pytest.approx(
        2.0, abs=1e-8
    )


def test_exact_values_are_consistent():
    """Test that every entry's oracle is finite and its domain nonempty."""
    for name, entry in FUNCTIONS.items():
        assert entry.name == name
        assert entry.domain[0] < entry.domain[1]
        assert np.isfinite(entry.exact_value)


def test_kernel_fixtures():
    """Test the kernel fixture loader."""
    fixture = load_kernel_fixture("diag21")
    fixture["type"] = "changed"
    assert load_kernel_fixture("diag21")["type"] != "changed"
    assert "decay_d1" in KERNEL_FIXTURES
    assert load_kernel_fixture("decay_d1")["model"] == {"d": 1, "c": 1.0, "a": 1.0}
    with pytest.raises(ValueError):
        load_kernel_fixture("unknown")


def test_kernel_functions_on_the_line():
    """Test the callable kernels with one coordinate per side."""
    assert product_kernel(2.0, 3.0) == 6.0
    assert gaussian_kernel(1.0, 1.0) == 1.0
    assert gaussian_kernel(0.0, 2.0) == pytest.approx(math.exp(-4))
    np.testing.assert_allclose(min_kernel(np.array([0.2, 0.7]), np.array([0.5, 0.1])), [0.2, 0.1])


def test_kernel_functions_in_two_dimensions():
    """Test that the callable kernels split 2d coordinates into x and y."""
    x1, x2 = np.array([1.0, 0.5]), np.array([2.0, 0.5])
    y1, y2 = np.array([3.0, 0.5]), np.array([1.0, 0.25])
    np.testing.assert_allclose(product_kernel(x1, x2, y1, y2), [5.0, 0.375])
    np.testing.assert_allclose(gaussian_kernel(x1, x2, y1, y2), np.exp([-5.0, -0.0625]))
    np.testing.assert_allclose(min_kernel(x1, x2, y1, y2), [1.0, 0.125])
    for kernel in KERNEL_FUNCTIONS.values():
        with pytest.raises(ValueError):
            kernel(1.0, 2.0, 3.0)
        with pytest.raises(ValueError):
            kernel()
