"""This module contains tests for the cube system and the measure it induces."""
import math
from fractions import Fraction

import numpy as np
import pytest

from ks2lab.corpus import load_function
from ks2lab.cube_system import (
    DIAGONAL,
    GEOMETRIC,
    CubeSystem,
    MeasureMu,
    F_k,
    F_k_sup,
    alpha_d,
    cantor_unpair,
    default_edge_scale,
    enumerate_cubes,
    mu_volume,
    overlap_volume,
    rational_at,
    rational_point,
)
from ks2lab.hk_integrate import Box
from ks2lab.step_functions import StepFunction


def test_alpha_d():
    """Test the Gamma-formula volume constant."""
    assert alpha_d(1) == pytest.approx(1.0)
    assert alpha_d(2) == pytest.approx(math.pi / 8)
    assert default_edge_scale(1) == 1
    with pytest.raises(ValueError):
        alpha_d(0)


def test_rational_enumeration():
    """Test the first rationals and the Cantor unpairing."""
    assert [rational_at(m) for m in range(5)] == [0, 1, -1, Fraction(1, 2), Fraction(-1, 2)]
    assert cantor_unpair(0) == (0, 0)
    assert cantor_unpair(4) == (1, 1)
    assert rational_point(1, 2) == (0, 0)
    with pytest.raises(ValueError):
        rational_at(-1)


def test_geometric_cubes_d1():
    """Test the disjoint geometric cubes on the line."""
    system = enumerate_cubes(d=1, K_max=3, mode=GEOMETRIC)
    assert [cube.box for cube in system] == [
        Box.interval(0, Fraction(1, 2)),
        Box.interval(Fraction(1, 2), Fraction(3, 4)),
        Box.interval(Fraction(3, 4), Fraction(7, 8)),
    ]
    assert system.volumes == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
    assert system.weights == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
    assert system.alpha == 1
    assert overlap_volume(system.cube(1), system.cube(2)) == 0


def test_geometric_cubes_d2():
    """Test that the geometric cubes are pairwise disjoint in the plane."""
    system = enumerate_cubes(d=2, K_max=5, mode=GEOMETRIC)
    overlaps = system.overlap_matrix()
    for i in range(5):
        for j in range(5):
            if i != j:
                assert overlaps[i][j] == 0
    assert overlaps[0][0] == system.alpha / 4
    assert float(system.alpha) == pytest.approx(system.paper_alpha, rel=1e-9)


def test_diagonal_cubes_d1():
    """Test the first diagonal-mode cubes around rational points."""
    system = enumerate_cubes(d=1, K_max=4, mode=DIAGONAL)
    assert [cube.box for cube in system] == [
        Box.interval(Fraction(-1, 2), Fraction(1, 2)),
        Box.interval(Fraction(1, 2), Fraction(3, 2)),
        Box.interval(Fraction(-1, 4), Fraction(1, 4)),
        Box.interval(Fraction(-3, 2), Fraction(-1, 2)),
    ]
    assert system.overlap_matrix()[0][2] == Fraction(1, 2)
    assert system.alpha is None


def test_enumeration_validation():
    """Test the argument checks of enumerate_cubes."""
    with pytest.raises(ValueError):
        enumerate_cubes(d=0, K_max=3)
    with pytest.raises(ValueError):
        enumerate_cubes(d=1, K_max=0)
    with pytest.raises(ValueError):
        enumerate_cubes(d=1, K_max=3, mode="spiral")
    with pytest.raises(ValueError):
        enumerate_cubes(d=1, K_max=3).cube(4)


def test_enumeration_is_deterministic():
    """Test that equal arguments give equal systems."""
    assert enumerate_cubes(2, 6, DIAGONAL) == enumerate_cubes(2, 6, DIAGONAL)
    assert enumerate_cubes(1, 6, DIAGONAL) != enumerate_cubes(1, 6, GEOMETRIC)
    assert CubeSystem.geometric(1, 2).to_dict()["cubes"][1] == {
        "k": 2,
        "level": 2,
        "center": ["5/8"],
        "radius": "1/8",
    }


def test_membership_on_faces():
    """Test that shared faces belong to both cubes."""
    system = enumerate_cubes(d=1, K_max=3)
    np.testing.assert_array_equal(system.membership(0.5), [True, True, False])
    np.testing.assert_array_equal(system.membership(2.0), [False, False, False])
    with pytest.raises(ValueError):
        system.membership((0.1, 0.1))


def test_functionals_of_step_functions():
    """Test that F_k is exact on the indicator algebra."""
    system = enumerate_cubes(d=1, K_max=3)
    f = StepFunction.indicator(Box.interval(0, Fraction(5, 8)))
    assert F_k(f, 1, system).value == Fraction(1, 2)
    assert F_k(f, 2, system).value == Fraction(1, 8)
    assert F_k(f, 3, system).value == 0
    assert F_k(f, 1, system).is_exact
    assert F_k(load_function("indicator.unit"), 2, system).value == Fraction(1, 4)
    assert F_k_sup(f, 2, system) == 1.0


def test_functionals_of_callables():
    """Test F_k and the sampled supremum of a plain callable."""
    system = enumerate_cubes(d=1, K_max=3)
    assert float(F_k(lambda t: np.ones_like(t), 1, system).value) == pytest.approx(0.5)
    assert float(F_k(lambda t: t, 2, system).value) == pytest.approx(
        (Fraction(9, 16) - Fraction(1, 4)) / 2
    )
    sup = F_k_sup(lambda t: t, 1, system)
    assert 0.49 <= sup <= 0.5


def test_mu_volume_geometric():
    """Test the truncated and closed-form volume of mu in one dimension."""
    system = enumerate_cubes(d=1, K_max=3)
    volume = mu_volume(system)
    assert volume.value == Fraction(73, 512)
    assert volume.hi == Fraction(1, 7)
    assert MeasureMu(system).closed_form_volume == Fraction(1, 7)
    long = mu_volume(enumerate_cubes(d=1, K_max=12))
    assert long.value == (1 - Fraction(1, 8**12)) / 7


def test_mu_volume_diagonal():
    """Test that the diagonal-mode volume carries a tail bound."""
    volume = MeasureMu(enumerate_cubes(d=1, K_max=4, mode=DIAGONAL)).volume()
    assert volume.lo == volume.value
    assert volume.hi - volume.lo == Fraction(1, 16)


def test_mu_density():
    """Test the density of mu at pairs of points."""
    mu = MeasureMu(enumerate_cubes(d=1, K_max=3))
    assert mu.density(0.25, 0.3) == Fraction(1, 2)
    assert mu.density(0.25, 0.6) == 0
    assert mu.density(0.5, 0.5) == Fraction(3, 4)
