"""This module contains tests for the spectral decomposition and the RKHS of a kernel."""
import math

import numpy as np
import pytest

from ks2lab.corpus import load_kernel_fixture
from ks2lab.cube_system import enumerate_cubes
from ks2lab.exceptions import ConvergenceError
from ks2lab.integral_operators import KernelCoefficients, random_symmetric_kernel
from ks2lab.ks2_space import gram_schmidt_onb
from ks2lab.mercer_rkhs import (
    DecayModel,
    EigenSystem,
    RKHSElement,
    diag_domination_check,
    eigendecompose,
    iota_embed,
    iota_norm_bound,
    kernel_value,
    mercer_batch,
    mercer_reconstruct,
    multiplier_jK,
    pd_check,
    point_evaluator,
    pointwise_bound_check,
    random_points,
    reproducing_residual,
    rkhs_inner,
)
from ks2lab.results.mercer_results import DiagDominationReport


def _fixture(name):
    return KernelCoefficients.from_spec(load_kernel_fixture(name), name=name)


def _random_point_pairs(basis):
    points = random_points(basis, 6, np.random.default_rng(9))
    return list(zip(points, points[1:]))


@pytest.fixture
def pair_basis():
    """Return the orthonormal basis of two geometric cubes."""
    return gram_schmidt_onb(enumerate_cubes(d=1, K_max=2))


@pytest.fixture
def textbook():
    """Return the eigen system of [[2, 1], [1, 2]]."""
    return eigendecompose(_fixture("textbook2x2"))


def test_eigendecompose_textbook(textbook):
    """Test the eigenpairs of a 2x2 matrix."""
    np.testing.assert_allclose(textbook.eigenvalues, [3.0, 1.0], atol=1e-13)
    root = 1 / math.sqrt(2)
    np.testing.assert_allclose(textbook.eigenvectors, [[root, root], [root, -root]], atol=1e-13)
    assert textbook.orthogonality_error <= 1e-13
    assert not textbook.negatives_present


def test_eigendecompose_random():
    """Test the Jacobi sweeps against a reference decomposition."""
    A = random_symmetric_kernel(12, np.random.default_rng(4))
    E = eigendecompose(A)
    np.testing.assert_allclose(E.eigenvalues, np.sort(np.linalg.eigvalsh(A.A))[::-1], atol=1e-10)
    assert E.orthogonality_error <= 1e-12
    reconstructed = E.eigenvectors @ np.diag(E.eigenvalues) @ E.eigenvectors.T
    np.testing.assert_allclose(reconstructed, A.A, atol=1e-10)
    assert E.sweeps >= 1


def test_eigendecompose_validation():
    """Test the input checks of the Jacobi solver."""
    with pytest.raises(ValueError):
        eigendecompose(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        eigendecompose(np.ones((2, 3)))
    with pytest.raises(ValueError):
        eigendecompose(np.eye(65))
    assert issubclass(ConvergenceError, RuntimeError)


def test_indefinite_kernel():
    """Test that the swap kernel has a negative eigenvalue."""
    E = eigendecompose(_fixture("swap2x2"))
    np.testing.assert_allclose(E.eigenvalues, [1.0, -1.0], atol=1e-13)
    assert E.negatives_present


def test_mercer_reconstruct(textbook):
    """Test partial Mercer sums."""
    np.testing.assert_allclose(mercer_reconstruct(textbook, 1).A, np.full((2, 2), 1.5), atol=1e-12)
    np.testing.assert_array_equal(mercer_reconstruct(textbook, 0).A, np.zeros((2, 2)))
    np.testing.assert_allclose(mercer_reconstruct(textbook).A, [[2, 1], [1, 2]], atol=1e-12)
    assert mercer_reconstruct(textbook, 1).symmetric
    with pytest.raises(ValueError):
        mercer_reconstruct(textbook, 3)


def test_rkhs_inner():
    """Test the RKHS inner product and norm."""
    E = eigendecompose(np.diag([0.25, 0.0625]))
    f = RKHSElement([3.0, 4.0], E)
    assert f.norm() == 5.0
    assert rkhs_inner(f, f) == 25.0
    other = eigendecompose(np.diag([0.25, 0.0625]))
    with pytest.raises(ValueError):
        rkhs_inner(f, RKHSElement([1.0, 0.0], other))
    with pytest.raises(ValueError):
        RKHSElement([1.0], E)


def test_rkhs_element_needs_positive_eigenvalues():
    """Test that zero eigenvalues carry no RKHS coordinate."""
    E = eigendecompose(_fixture("rank1"))
    with pytest.raises(ValueError):
        RKHSElement([0.0, 1.0], E)
    assert RKHSElement([2.0, 0.0], E).norm() == 2.0


def test_multiplier_is_isometry(pair_basis):
    """Test that the multiplier maps KS2 coefficients isometrically."""
    E = eigendecompose(np.diag([0.25, 0.0625]))
    f = pair_basis.combination([3.0, 4.0])
    image = multiplier_jK(f, E)
    assert image.norm() == pytest.approx(5.0)
    assert image.dropped == []
    np.testing.assert_allclose(iota_embed(image, pair_basis).coeffs, [1.5, 1.0])


def test_multiplier_drops_zero_eigenvalues(pair_basis):
    """Test that coordinates on zero eigenvalues are dropped and recorded."""
    E = eigendecompose(_fixture("rank1"))
    image = multiplier_jK(pair_basis.combination([1.0, 2.0]), E)
    assert image.dropped == [2]
    np.testing.assert_array_equal(image.coeffs, [1.0, 0.0])
    with pytest.raises(ValueError):
        multiplier_jK(pair_basis.element(1), eigendecompose(_fixture("swap2x2")))


def test_point_evaluator(pair_basis):
    """Test K(x, .) inside and outside the cubes."""
    E = eigendecompose(_fixture("rank1"))
    evaluator = point_evaluator(E, 0.25, pair_basis)
    np.testing.assert_allclose(evaluator.coeffs, [2 * math.sqrt(2), 0.0])
    assert not evaluator.outside
    far = point_evaluator(E, 5.0, pair_basis)
    assert far.outside
    assert far.norm() == 0.0
    with pytest.raises(ValueError):
        point_evaluator(eigendecompose(_fixture("swap2x2")), 0.25, pair_basis)


def test_reproducing_property(textbook, pair_basis):
    """Test that <f, K(x, .)> reproduces f(x)."""
    f = RKHSElement([0.7, -1.3], textbook)
    for x in (0.25, 0.6, 0.5):
        assert reproducing_residual(f, x, pair_basis) <= 1e-10


def test_kernel_value(textbook, pair_basis):
    """Test the Mercer sum against the synthesized kernel."""
    A = _fixture("textbook2x2")
    assert kernel_value(textbook, 0.25, 0.6, pair_basis) == pytest.approx(
        A.evaluate(0.25, 0.6, pair_basis)
    )
    assert kernel_value(textbook, 0.25, 0.6, pair_basis) == pytest.approx(16 * math.sqrt(2))


def test_pd_check(pair_basis):
    """Test the quadratic form of a definite and an indefinite kernel."""
    points, weights = [0.25, 0.6], [1.0, -1.0]
    swap = _fixture("swap2x2")
    assert pd_check(swap, points, weights, pair_basis) == pytest.approx(-32 * math.sqrt(2))
    assert pd_check(eigendecompose(swap), points, weights, pair_basis) < 0
    assert pd_check(_fixture("textbook2x2"), points, weights, pair_basis) >= 0
    with pytest.raises(ValueError):
        pd_check(swap, points, [1.0], pair_basis)


def test_diag_domination(textbook, pair_basis):
    """Test the squared and unsquared diagonal domination."""
    report = diag_domination_check(textbook, 0.25, 0.6, pair_basis)
    assert report.squared_holds
    assert report.kxx == pytest.approx(16.0)
    small = DiagDominationReport(0.4, 0.5, 0.5)
    assert small.squared_holds
    assert not small.unsquared_holds


def test_decay_model():
    """Test the decay model and its embedding bound."""
    model = DecayModel(d=1, c=1.0, a=1.0)
    assert model.is_consistent()
    np.testing.assert_allclose(model.eigenvalues(2), [2**-3, 2**-6])
    assert model.iota_bound == pytest.approx(2**-1.5)
    assert not DecayModel(d=1, c=0.5, a=1.0).is_consistent()
    with pytest.raises(ValueError):
        DecayModel(d=0, c=1.0, a=1.0)
    with pytest.raises(ValueError):
        DecayModel(d=1, c=-1.0, a=1.0)


def test_iota_norm_bound():
    """Test the embedding norm of the decay fixture."""
    E = eigendecompose(_fixture("decay_d1"))
    report = iota_norm_bound(E, DecayModel(d=1, c=1.0, a=1.0))
    assert report.sup_sqrt_lambda == pytest.approx(2**-1.5)
    assert report.holds


def test_pointwise_bounds(textbook, pair_basis):
    """Test the continuity bounds of RKHS functions."""
    f = RKHSElement([1.0, 2.0], textbook)
    for x, y in _random_point_pairs(pair_basis):
        assert pointwise_bound_check(f, x, y, pair_basis).holds


def test_mercer_batch(pair_basis):
    """Test the full Mercer batch on a positive definite kernel."""
    report = mercer_batch(_fixture("textbook2x2"), pair_basis, seed=0, n_points=8)
    assert report.kernel == "textbook2x2"
    assert report.reconstruction_error <= 1e-12
    assert report.trace_error <= 1e-12
    assert report.mercer_diagonal_error <= 1e-10
    assert report.reproducing_residual <= 1e-10
    assert report.pd_minimum >= -1e-10
    assert all(r.squared_holds for r in report.diag_domination)
    assert report.to_dict() == mercer_batch(
        _fixture("textbook2x2"), pair_basis, seed=0, n_points=8
    ).to_dict()


def test_mercer_batch_indefinite(pair_basis):
    """Test that the batch skips the RKHS checks for an indefinite kernel."""
    report = mercer_batch(_fixture("swap2x2"), pair_basis, seed=0, n_points=4)
    assert report.reproducing_residual is None
    assert report.eigen["negatives_present"]


def test_eigen_system_shapes(pair_basis):
    """Test the EigenSystem constructor and size checks."""
    with pytest.raises(ValueError):
        EigenSystem(np.ones(2), np.eye(3))
    E = EigenSystem(np.ones(3), np.eye(3))
    with pytest.raises(ValueError):
        E.eigenfunctions_at(0.25, pair_basis)
