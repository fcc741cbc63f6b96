"""This module contains tests for the KS2 inner product, Gram matrices and bases."""
import math
from fractions import Fraction

import numpy as np
import pytest

from ks2lab.corpus import load_function
from ks2lab.cube_system import DIAGONAL, GEOMETRIC, enumerate_cubes
from ks2lab.hk_integrate import Box
from ks2lab.ks2_space import (
    CORRECTED,
    PAPER,
    expand,
    embedding_check,
    gram_matrix,
    gram_schmidt_onb,
    indicator_gram,
    ks2_inner,
    parseval_norm,
)
from ks2lab.step_functions import StepFunction


@pytest.fixture
def geometric():
    """Return the first three geometric cubes on the line."""
    return enumerate_cubes(d=1, K_max=3)


@pytest.fixture
def basis(geometric):
    """Return the orthonormal basis of the geometric system."""
    return gram_schmidt_onb(geometric)


def test_indicator_gram(geometric):
    """Test the exact Gram matrix of disjoint indicators."""
    gram = indicator_gram(geometric)
    assert gram[0][0] == Fraction(1, 8)
    assert gram[2][2] == Fraction(1, 512)
    assert gram[0][1] == 0


def test_paper_normalization_is_not_orthonormal():
    """Test that the scaling 2^((k-1)/2) puts 1/2 on the diagonal."""
    gram = gram_matrix(enumerate_cubes(d=1, K_max=6), normalization=PAPER)
    assert gram.is_exact
    assert gram.diag_values == [0.5] * 6
    assert gram.max_offdiag == 0
    report = gram.check()
    assert not report.orthonormal
    assert "not orthonormal" in report.verdict_text


def test_corrected_normalization_is_orthonormal():
    """Test that the corrected scaling gives the identity."""
    gram = gram_matrix(enumerate_cubes(d=2, K_max=5), normalization=CORRECTED)
    np.testing.assert_allclose(gram.values, np.eye(5), atol=1e-12)
    assert gram.check().orthonormal


def test_diagonal_mode_gram_overlaps():
    """Test that overlapping cubes give off-diagonal entries."""
    gram = gram_matrix(enumerate_cubes(d=1, K_max=4, mode=DIAGONAL))
    assert gram.max_offdiag > 0
    assert not gram.check().orthonormal
    frame = gram.to_dataframe()
    assert list(frame.columns) == ["i", "j", "value", "lo", "hi", "exact"]
    assert len(frame) == 16
    assert (frame["hi"] >= frame["lo"]).all()


def test_gram_unknown_normalization(geometric):
    """Test that unknown normalizations raise."""
    with pytest.raises(ValueError):
        gram_matrix(geometric, normalization="unit")


def test_geometric_basis(basis):
    """Test the basis of disjoint indicators."""
    assert basis.size == 3
    assert basis.dropped == []
    assert basis.exact_certificate
    assert basis.certificate_error <= 1e-12
    np.testing.assert_allclose(basis.evaluate(0.25), [2**1.5, 0, 0])
    np.testing.assert_allclose(basis.change_of_basis, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("mode", [GEOMETRIC, DIAGONAL])
def test_basis_certificate_twelve_cubes(mode):
    """Test that the basis of twelve cubes is orthonormal to 1e-12 entrywise."""
    onb = gram_schmidt_onb(enumerate_cubes(d=1, K_max=12, mode=mode))
    assert onb.exact_certificate
    assert onb.certificate_error <= 1e-12
    assert onb.size + len(onb.dropped) == 12
    assert onb.to_dict()["float_residual"] == onb.float_residual


def test_diagonal_basis_certificate():
    """Test the orthonormality certificate with overlapping cubes."""
    onb = gram_schmidt_onb(enumerate_cubes(d=1, K_max=6, mode=DIAGONAL))
    assert onb.exact_certificate
    assert onb.certificate_error <= 1e-12
    assert onb.float_residual <= 1e-9
    assert onb.size + len(onb.dropped) == 6
    for a in range(1, onb.size + 1):
        assert onb.element(a).norm() == pytest.approx(1.0)


def test_basis_element_bounds(basis):
    """Test the 1-based element access."""
    with pytest.raises(ValueError):
        basis.element(0)
    with pytest.raises(ValueError):
        basis.element(4)


def test_element_arithmetic(basis):
    """Test the coefficient arithmetic of KS2 elements."""
    f = basis.combination([1.0, 2.0, 2.0])
    g = basis.element(2)
    assert f.norm() == 3.0
    assert f.inner(g) == 2.0
    assert (f - 2 * g).norm() == pytest.approx(math.sqrt(5))
    assert parseval_norm(-f) == 3.0
    with pytest.raises(ValueError):
        basis.combination([1.0, 2.0])


def test_elements_of_different_bases(geometric, basis):
    """Test that elements over different bases do not mix."""
    other = gram_schmidt_onb(geometric)
    with pytest.raises(ValueError):
        basis.element(1) + other.element(1)


def test_element_as_step_function(basis):
    """Test the pointwise values of a basis element."""
    e1 = basis.element(1)
    assert e1(0.25) == pytest.approx(2**1.5)
    assert e1(0.6) == 0.0
    inner = ks2_inner(e1, e1, basis.system)
    assert float(inner.value) == pytest.approx(1.0, abs=1e-12)
    assert inner.width == 0


def test_ks2_inner_with_tail(geometric):
    """Test the enclosure of an inner product reaching past the system."""
    f = StepFunction.indicator(Box.interval(0, 1))
    inner = ks2_inner(f, f, geometric)
    assert inner.value == Fraction(73, 512)
    assert inner.contains(Fraction(1, 7))
    assert not inner.partial


def test_ks2_inner_without_bounds(geometric):
    """Test that a plain callable yields a partial enclosure."""
    inner = ks2_inner(lambda t: np.ones_like(t), lambda t: np.ones_like(t), geometric)
    assert inner.partial
    assert float(inner.value) == pytest.approx(73 / 512)


def test_expand_indicator(basis):
    """Test the coefficients and Parseval norm of an expanded indicator."""
    f = expand(StepFunction.indicator(Box.interval(0, 1)), basis)
    np.testing.assert_allclose(f.coeffs, [2**-1.5, 2**-3, 2**-4.5])
    assert f.norm() ** 2 == pytest.approx(73 / 512)
    assert f.provenance == "expanded-callable"


def test_expand_round_trip(basis):
    """Test that expanding an element recovers its coefficients."""
    f = basis.combination([0.5, -1.0, 3.0])
    np.testing.assert_allclose(expand(f.to_step_function(), basis).coeffs, f.coeffs)
    assert expand(f, basis).coeffs is not f.coeffs


def test_embedding_check_indicator():
    """Test the embedding inequality for the indicator of [0, 1]."""
    report = embedding_check(
        StepFunction.indicator(Box.interval(0, 1)), enumerate_cubes(d=1, K_max=8), name="unit"
    )
    assert report.holds
    assert report.hk_seminorm == pytest.approx(1.0)
    assert report.ks2_norm == pytest.approx(math.sqrt(1 / 7), abs=1e-3)


def test_embedding_check_staircase():
    """Test the embedding inequality for the HK-only staircase."""
    report = embedding_check(load_function("paper.staircase_f"), enumerate_cubes(d=1, K_max=8))
    assert report.function == "paper.staircase_f"
    assert report.hk_seminorm == pytest.approx(math.log(2), abs=1e-9)
    assert report.holds


@pytest.mark.parametrize("mode", [GEOMETRIC, DIAGONAL])
def test_parseval_against_inner_product(mode):
    """Test that the coefficient norm of random combinations matches the KS2 inner product."""
    onb = gram_schmidt_onb(enumerate_cubes(d=1, K_max=12, mode=mode))
    rng = np.random.default_rng(12)
    for _ in range(100):
        f = onb.combination(rng.standard_normal(onb.size))
        inner = ks2_inner(f, f, onb.system)
        assert float(inner.value) == pytest.approx(parseval_norm(f) ** 2, rel=1e-10)
