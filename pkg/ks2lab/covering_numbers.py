"""Covering-number bounds for the embedding of the RKHS of a decay-model kernel into KS2.

All logarithms are base 2. For eigenvalues with c^2 2^(-n(2d+1)) >= lambda_n >=
1/(a 2^(n(2d+1))) the log covering number of the image of the unit ball grows like
log2(1/eps)^2: the upper bound comes from a finite-rank split of the embedding, the
lower bound from the volume of the ellipsoid spanned by the first m eigendirections.
Small ellipsoids are also covered explicitly on a lattice, which gives an empirical
upper count to hold the volumetric lower count against.
"""
import math
from itertools import accumulate
from typing import List, Optional, Sequence

import numpy as np
from loguru import logger
from tqdm import tqdm
from typing_extensions import Self

from ks2lab.exceptions import CountOverflowError, DimensionError
from ks2lab.mercer_rkhs import DecayModel
from ks2lab.results.covering_results import CoveringReport

OPTIMIZED = "optimized"
INTEGER_SCAN = "integer_scan"
LOWER_MODES = (OPTIMIZED, INTEGER_SCAN)
STANDARD = "standard"
LOOSE = "loose"

COUNT_CAP = 10**7
MAX_LATTICE_DIM = 6
ORACLE_MAX_M = 3
MAX_SCAN_EPS = 0.25


def _check_eps(eps: float):
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}.")


def _exponent(d: int) -> int:
    if d < 1:
        raise ValueError(f"Dimension must be at least 1, got {d}.")
    return 2 * d + 1


class FiniteRankSplit:
    """The split of the embedding into a rank-m part and a small tail.

    Attributes:
        m: The rank.
        rho_norm_bound: Bound c 2^(-(2d+1)/2) on the norm of the rank-m part.
        tail_norm_bound: Bound c 2^(-(m+1)(2d+1)/2) on the norm of the tail.
        large_eps: True if eps is too large for the defining inequality and m was clamped to 1.
    """

    def __init__(self, m: int, rho_norm_bound: float, tail_norm_bound: float, large_eps: bool = False):
        """Initialize a FiniteRankSplit."""
        self.m = m
        self.rho_norm_bound = rho_norm_bound
        self.tail_norm_bound = tail_norm_bound
        self.large_eps = large_eps

    def to_dict(self) -> dict:
        """Return the split as a dict."""
        return {
            "m": self.m,
            "rho_norm_bound": self.rho_norm_bound,
            "tail_norm_bound": self.tail_norm_bound,
            "large_eps": self.large_eps,
        }

    def __repr__(self) -> str:
        """Return a string representation of the FiniteRankSplit."""
        return f"FiniteRankSplit(m={self.m}, large_eps={self.large_eps})"


def _raw_m(eps: float, c: float, d: int) -> int:
    x = 2 * math.log2(2 * c / eps) / _exponent(d)
    nearest = round(x)
    # eps/2 on a grid point: take the smaller m
    if abs(x - nearest) <= 1e-12:
        return nearest - 1
    return math.floor(x)


def select_m(eps: float, c: float, d: int) -> int:
    """Return the m >= 1 with c 2^(-(m+1)(2d+1)/2) < eps/2 < c 2^(-m(2d+1)/2).

    Ties resolve to the smaller m. If eps is too large for any m >= 1, m = 1 is returned
    and a warning is logged.

    Raises:
        ValueError: If eps or c is not positive, or d < 1.
    """
    _check_eps(eps)
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}.")
    m = _raw_m(eps, c, d)
    if m < 1:
        logger.warning(f"eps={eps} is too large for the finite-rank split; using m = 1.")
        return 1
    return m


def finite_rank_split(eps: float, c: float, d: int) -> FiniteRankSplit:
    """Return the finite-rank split used for the upper bound at eps."""
    _check_eps(eps)
    exponent = _exponent(d)
    large_eps = c > 0 and _raw_m(eps, c, d) < 1
    m = select_m(eps, c, d)
    return FiniteRankSplit(
        m,
        c * 2.0 ** (-exponent / 2),
        c * 2.0 ** (-(m + 1) * exponent / 2),
        large_eps,
    )


def upper_log_covering(eps: float, c: float, d: int, variant: str = STANDARD) -> float:
    """Return the upper bound on log2 C(eps).

    The standard variant is m log2(1 + 4c / (2^((2d+1)/2) eps)). The loose variant
    m log2(5c / (2^((2d+1)/2) eps)) dominates it once eps <= c 2^(-(2d+1)/2).

    Usage example:

    ```python
    from ks2lab.covering_numbers import upper_log_covering

    upper_log_covering(2.0**-10, c=1, d=1)  # 73.507...
    ```
    """
    m = select_m(eps, c, d)
    rho = c * 2.0 ** (-_exponent(d) / 2)
    if variant == STANDARD:
        return m * math.log2(1 + 4 * rho / eps)
    if variant == LOOSE:
        return m * math.log2(5 * rho / eps)
    raise ValueError(f"Unknown variant {variant}, expected {STANDARD} or {LOOSE}.")


def phi_eps(m: float, eps: float, a: float, d: int) -> float:
    """Return -m^2 (2d+1)/2 + m log2(1 / (sqrt(a) eps))."""
    return -(m**2) * _exponent(d) / 2 + m * math.log2(1 / (math.sqrt(a) * eps))


def critical_point(eps: float, a: float, d: int) -> float:
    """Return the maximizer -log2(sqrt(a) eps) / (2d+1) of phi_eps."""
    _check_eps(eps)
    return -math.log2(math.sqrt(a) * eps) / _exponent(d)


def lower_log_covering(eps: float, a: float, d: int, mode: str = OPTIMIZED) -> float:
    """Return the determinant lower bound on log2 C(eps), clamped at 0.

    The optimized mode evaluates phi_eps at the real critical point; the integer scan
    takes the better of its two integer neighbours of at least 1.
    """
    _check_eps(eps)
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}.")
    c0 = critical_point(eps, a, d)
    if mode == OPTIMIZED:
        value = phi_eps(c0, eps, a, d) if c0 > 0 else 0.0
    elif mode == INTEGER_SCAN:
        candidates = {m for m in (math.floor(c0), math.ceil(c0)) if m >= 1}
        value = max((phi_eps(m, eps, a, d) for m in candidates), default=0.0)
    else:
        raise ValueError(f"Unknown mode {mode}, expected one of {LOWER_MODES}.")
    return max(value, 0.0)


def spectral_lower_log_covering(eigenvalues: Sequence[float], eps: float) -> float:
    """Return max over m of 1/2 sum_{k<=m} log2 lambda_k - m log2 eps, clamped at 0.

    Eigenvalues are taken in nonincreasing order; the scan stops at the first
    nonpositive one.
    """
    _check_eps(eps)
    logs = []
    for value in sorted(eigenvalues, reverse=True):
        if value <= 0:
            break
        logs.append(0.5 * math.log2(value) - math.log2(eps))
    return max([0.0, *accumulate(logs)])


class Ellipsoid:
    """An axis-aligned ellipsoid with semi-axes a_1 >= ... >= a_m.

    Attributes:
        semi_axes: Positive semi-axes in nonincreasing order.
    """

    def __init__(self, semi_axes: Sequence[float]):
        """Initialize an Ellipsoid.

        Raises:
            ValueError: If there are no semi-axes or one is not positive and finite.
        """
        axes = np.asarray(semi_axes, dtype=float)
        if axes.ndim != 1 or len(axes) == 0:
            raise ValueError("An ellipsoid needs at least one semi-axis.")
        if not np.all(np.isfinite(axes)) or np.any(axes <= 0):
            raise ValueError(f"Semi-axes must be positive and finite, got {axes.tolist()}.")
        self.semi_axes = np.sort(axes)[::-1]

    @classmethod
    def from_model(cls, model: DecayModel, m: int) -> Self:
        """Return the image of the unit ball under the rank-m part of the embedding."""
        return cls(np.sqrt(model.eigenvalues(m)))

    @property
    def dim(self) -> int:
        """Return m."""
        return len(self.semi_axes)

    def __repr__(self) -> str:
        """Return a string representation of the Ellipsoid."""
        return f"Ellipsoid({np.round(self.semi_axes, 6).tolist()})"


def volumetric_lower(e: Ellipsoid, eps: float) -> float:
    """Return max(1, prod a_i / eps^m), the determinant lower bound on C(eps, e)."""
    _check_eps(eps)
    return max(1.0, float(np.prod(e.semi_axes / eps)))


def _axis_contributions(a: float, h: float) -> np.ndarray:
    # min of (x/a)^2 over each lattice cell [(k - 1/2)h, (k + 1/2)h] meeting [-a, a]
    n = math.floor(a / h + 0.5)
    k = np.arange(-n, n + 1)
    nearest = np.clip(0.0, (k - 0.5) * h, (k + 0.5) * h)
    return (nearest / a) ** 2


def greedy_cover_count(e: Ellipsoid, eps: float, grid_factor: float = 1.0) -> int:
    """Count eps-balls on a cubic lattice needed to cover an ellipsoid.

    The lattice has spacing h = grid_factor eps / sqrt(m); every cell meeting the
    ellipsoid contributes the ball around its centre, which contains the cell when
    grid_factor <= 2. The count is an upper bound on C(eps, e), not the minimum.

    Usage example:

    ```python
    from ks2lab.covering_numbers import Ellipsoid, greedy_cover_count

    greedy_cover_count(Ellipsoid([1.0]), 0.5)  # 5
    ```

    Raises:
        DimensionError: If m exceeds 6.
        CountOverflowError: If more than 10^7 cells are needed.
    """
    _check_eps(eps)
    if not 0 < grid_factor <= 2:
        raise ValueError(f"grid_factor must lie in (0, 2], got {grid_factor}.")
    if e.dim > MAX_LATTICE_DIM:
        raise DimensionError(f"Lattice covering supports m <= {MAX_LATTICE_DIM}, got {e.dim}.")
    if e.semi_axes[0] <= eps:
        return 1
    h = grid_factor * eps / math.sqrt(e.dim)
    partial = np.zeros(1)
    for a in e.semi_axes:
        partial = np.add.outer(partial, _axis_contributions(a, h)).ravel()
        partial = partial[partial <= 1.0]
        if len(partial) > COUNT_CAP:
            raise CountOverflowError(f"Lattice covering needs more than {COUNT_CAP} balls.")
    return len(partial)


def _record(
    model: DecayModel, eps: float, grid_factor: float, oracle_max_m: int
) -> dict:
    m = select_m(eps, model.c, model.d)
    upper = upper_log_covering(eps, model.c, model.d)
    lower_opt = lower_log_covering(eps, model.a, model.d, OPTIMIZED)
    lower_int = lower_log_covering(eps, model.a, model.d, INTEGER_SCAN)
    scale = math.log2(1 / eps) ** 2
    empirical: Optional[int] = None
    volumetric: Optional[float] = None
    if m <= oracle_max_m:
        ellipsoid = Ellipsoid.from_model(model, m)
        empirical = greedy_cover_count(ellipsoid, eps, grid_factor)
        volumetric = volumetric_lower(ellipsoid, eps)
        if volumetric > empirical:
            logger.error(f"Volumetric count {volumetric} exceeds lattice count {empirical} at eps={eps}.")
    if max(lower_opt, lower_int) > upper:
        logger.error(f"Lower bound exceeds upper bound at eps={eps}: {lower_opt} > {upper}.")
    return {
        "eps": eps,
        "m": m,
        "upper_log2": upper,
        "lower_log2_opt": lower_opt,
        "lower_log2_int": lower_int,
        "ratio_upper": upper / scale,
        "ratio_lower": lower_opt / scale,
        "empirical_count": empirical,
        "volumetric_count": volumetric,
    }


def asymptotic_scan(
    model: DecayModel,
    eps_grid: Sequence[float],
    grid_factor: float = 1.0,
    oracle_max_m: int = ORACLE_MAX_M,
) -> CoveringReport:
    """Evaluate both bounds and their ratios to log2(1/eps)^2 over a grid of eps.

    Records come out ordered by decreasing eps. Lattice and volumetric counts are added
    wherever m(eps) <= oracle_max_m.

    Raises:
        ValueError: If the grid is empty or leaves (0, 1/4], or the model is inconsistent.
    """
    if len(eps_grid) == 0:
        raise ValueError("The eps grid is empty.")
    if any(not 0 < eps <= MAX_SCAN_EPS for eps in eps_grid):
        raise ValueError(f"Every eps must lie in (0, {MAX_SCAN_EPS}].")
    if not model.is_consistent():
        raise ValueError(f"Inconsistent decay model {model}: need a c^2 >= 1.")
    logger.info(f"Started covering scan over {len(eps_grid)} values of eps for {model}.")
    records: List[dict] = [
        _record(model, float(eps), grid_factor, oracle_max_m)
        for eps in tqdm(sorted(eps_grid, reverse=True), desc="Covering scan")
    ]
    report = CoveringReport(model.to_dict(), records, grid_factor)
    logger.info(f"Done. Terminal ratios: {report.terminal_ratios()}.")
    return report
