"""This module contains tests for the covering-number bounds and the covering scan."""
import math

import pandas as pd
import pytest

from ks2lab.covering_numbers import (
    INTEGER_SCAN,
    LOOSE,
    OPTIMIZED,
    Ellipsoid,
    asymptotic_scan,
    critical_point,
    finite_rank_split,
    greedy_cover_count,
    lower_log_covering,
    phi_eps,
    select_m,
    spectral_lower_log_covering,
    upper_log_covering,
    volumetric_lower,
)
from ks2lab.exceptions import DimensionError
from ks2lab.mercer_rkhs import DecayModel
from ks2lab.results.covering_results import CSV_COLUMNS


@pytest.fixture
def model():
    """Return the decay model with d = 1 and c = a = 1."""
    return DecayModel(d=1, c=1.0, a=1.0)


@pytest.mark.parametrize(
    "eps, expected", [(2.0**-10, 7), (0.5, 1), (2.0**-24, 16), (2.0**-5, 3), (2.0**-3, 2)]
)
def test_select_m(eps, expected):
    """Test the rank of the finite-rank split, ties included."""
    assert select_m(eps, 1.0, 1) == expected


def test_select_m_validation():
    """Test the argument checks of select_m."""
    with pytest.raises(ValueError):
        select_m(0.0, 1.0, 1)
    with pytest.raises(ValueError):
        select_m(0.1, -1.0, 1)
    with pytest.raises(ValueError):
        select_m(0.1, 1.0, 0)


def test_finite_rank_split():
    """Test the norms of both parts of the split."""
    split = finite_rank_split(2.0**-10, 1.0, 1)
    assert split.m == 7
    assert split.rho_norm_bound == pytest.approx(2**-1.5)
    assert split.tail_norm_bound == pytest.approx(2.0**-12)
    assert split.tail_norm_bound < 2.0**-11 < 2.0**-10.5
    assert not split.large_eps
    assert finite_rank_split(1.0, 1.0, 1).large_eps


def test_upper_log_covering():
    """Test both variants of the upper bound."""
    assert upper_log_covering(2.0**-10, 1.0, 1) == pytest.approx(73.507, abs=1e-3)
    assert upper_log_covering(2.0**-24, 1.0, 1) == pytest.approx(392.0, abs=1e-3)
    loose = upper_log_covering(2.0**-10, 1.0, 1, variant=LOOSE)
    assert loose == pytest.approx(7 * (math.log2(5) + 8.5))
    assert loose >= upper_log_covering(2.0**-10, 1.0, 1)
    with pytest.raises(ValueError):
        upper_log_covering(2.0**-10, 1.0, 1, variant="tight")


def test_critical_point_and_phi():
    """Test the maximizer of the determinant bound."""
    assert critical_point(2.0**-10, 1.0, 1) == pytest.approx(10 / 3)
    assert critical_point(2.0**-24, 1.0, 1) == pytest.approx(8.0)
    assert phi_eps(3, 2.0**-10, 1.0, 1) == pytest.approx(16.5)
    assert phi_eps(4, 2.0**-10, 1.0, 1) == pytest.approx(16.0)


def test_lower_log_covering():
    """Test the optimized and the integer lower bounds."""
    assert lower_log_covering(2.0**-10, 1.0, 1, OPTIMIZED) == pytest.approx(50 / 3)
    assert lower_log_covering(2.0**-10, 1.0, 1, INTEGER_SCAN) == pytest.approx(16.5)
    assert lower_log_covering(2.0, 1.0, 1, OPTIMIZED) == 0.0
    assert lower_log_covering(2.0, 1.0, 1, INTEGER_SCAN) == 0.0
    with pytest.raises(ValueError):
        lower_log_covering(2.0**-10, 0.0, 1)
    with pytest.raises(ValueError):
        lower_log_covering(2.0**-10, 1.0, 1, mode="exact")


def test_spectral_lower_log_covering():
    """Test the lower bound from an explicit spectrum."""
    assert spectral_lower_log_covering([0.0625, 0.25], 0.25) == pytest.approx(1.0)
    assert spectral_lower_log_covering([0.25, -1.0, 0.0625], 0.25) == pytest.approx(1.0)
    assert spectral_lower_log_covering([0.25, 0.0625], 1.0) == 0.0


def test_ellipsoid():
    """Test the ellipsoid constructor and the rank-m image of the model."""
    e = Ellipsoid([0.5, 2.0])
    assert e.semi_axes.tolist() == [2.0, 0.5]
    assert e.dim == 2
    with pytest.raises(ValueError):
        Ellipsoid([])
    with pytest.raises(ValueError):
        Ellipsoid([1.0, 0.0])
    image = Ellipsoid.from_model(DecayModel(d=1, c=1.0, a=1.0), 2)
    assert image.semi_axes.tolist() == pytest.approx([2**-1.5, 2.0**-3])


def test_volumetric_lower():
    """Test the determinant count of an ellipsoid."""
    assert volumetric_lower(Ellipsoid([1.0]), 0.5) == pytest.approx(2.0)
    assert volumetric_lower(Ellipsoid([2**-1.5, 2.0**-3]), 2.0**-4) == pytest.approx(2**3.5)
    assert volumetric_lower(Ellipsoid([0.1]), 0.5) == 1.0


def test_greedy_cover_count():
    """Test the lattice count on small ellipsoids."""
    assert greedy_cover_count(Ellipsoid([1.0]), 0.5) == 5
    assert greedy_cover_count(Ellipsoid([0.1]), 0.5) == 1
    e = Ellipsoid([2**-1.5, 2.0**-3])
    assert greedy_cover_count(e, 2.0**-4) >= volumetric_lower(e, 2.0**-4)


def test_greedy_cover_count_validation():
    """Test the grid factor and dimension checks of the lattice count."""
    with pytest.raises(ValueError):
        greedy_cover_count(Ellipsoid([1.0]), 0.5, grid_factor=0.0)
    with pytest.raises(ValueError):
        greedy_cover_count(Ellipsoid([1.0]), 0.5, grid_factor=2.5)
    with pytest.raises(DimensionError):
        greedy_cover_count(Ellipsoid([1.0] * 7), 0.5)


def test_scan_validation(model):
    """Test the input checks of the covering scan."""
    with pytest.raises(ValueError):
        asymptotic_scan(model, [])
    with pytest.raises(ValueError):
        asymptotic_scan(model, [0.5])
    with pytest.raises(ValueError):
        asymptotic_scan(DecayModel(d=1, c=0.5, a=1.0), [2.0**-8])


def test_scan_ratios(model):
    """Test the record order and the ratios of the lower bound."""
    report = asymptotic_scan(model, [2.0**-p for p in range(6, 41)])
    eps = [r["eps"] for r in report.records]
    assert eps == sorted(eps, reverse=True)
    assert all(r["ratio_lower"] == pytest.approx(1 / 6) for r in report.records)
    ratios = report.terminal_ratios()
    assert ratios["eps"] == 2.0**-40
    assert ratios["ratio_upper"] == pytest.approx(0.683, abs=1e-3)
    assert ratios["upper_target"] == pytest.approx(2 / 3)
    assert ratios["lower_target"] == pytest.approx(1 / 6)
    assert report.sandwich_holds
    assert report.m_growth == pytest.approx(27 / 40)


def test_scan_ratios_d2():
    """Test the lower ratio in two dimensions."""
    report = asymptotic_scan(DecayModel(d=2, c=1.0, a=1.0), [2.0**-12, 2.0**-20])
    assert all(r["ratio_lower"] == pytest.approx(1 / 10) for r in report.records)


def test_scan_lattice_oracle(model):
    """Test that the lattice count sits above the volumetric count for small m."""
    report = asymptotic_scan(model, [0.25, 0.125, 0.0625, 0.03125, 2.0**-8])
    assert [r["m"] for r in report.records] == [1, 2, 3, 3, 5]
    assert report.records[0]["empirical_count"] == 3
    assert report.records[0]["volumetric_count"] == pytest.approx(math.sqrt(2))
    assert report.records[-1]["empirical_count"] is None
    assert report.oracle_sandwich_holds


def test_covering_report_output(model, tmp_path):
    """Test the CSV columns and the trend fit of a scan."""
    report = asymptotic_scan(model, [2.0**-p for p in range(6, 25)])
    path = tmp_path / "covering.csv"
    report.to_csv(path)
    frame = pd.read_csv(path)
    assert list(frame.columns) == CSV_COLUMNS
    assert len(frame) == 19
    fit = report.trend_fit()
    assert fit is not None
    data = report.to_dict()
    assert data["sandwich_holds"]
    assert data["model"] == {"d": 1, "c": 1.0, "a": 1.0}
