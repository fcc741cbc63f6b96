"""Henstock-Kurzweil integration by gauge-fine Riemann sums, Hake limits and staircase series.

Three integration modes are provided and recorded in every HKResult:

- ``gauge-riemann``: Riemann sums over gauge-fine tagged partitions built by bisection.
  The error bound is the difference between the two finest refinement levels, an
  estimate rather than a certificate.
- ``hake-limit``: the integral over [a, b] as the limit of integrals over [c, b] for
  c decreasing to a, extrapolated across a dyadic mesh.
- ``series-exact``: staircase functions integrated plateau by plateau in exact rational
  arithmetic with a rigorous tail bound.

Only ``series-exact`` carries a rigorous bound.
"""
import math
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import integrate
from typing_extensions import Self

from ks2lab.enclosure import Enclosure, Scalar
from ks2lab.exceptions import (
    DimensionError,
    GaugeError,
    HakeConvergenceError,
    NonFiniteValueError,
    PartitionDepthError,
    TailBoundError,
)

GAUGE_RIEMANN = "gauge-riemann"
HAKE_LIMIT = "hake-limit"
SERIES_EXACT = "series-exact"
MODES = (GAUGE_RIEMANN, HAKE_LIMIT, SERIES_EXACT)

DEFAULT_MAX_DEPTH = 50
DEFAULT_MAX_DIM = 3
DEFAULT_REFINE_LEVELS = 4
HAKE_MAX_STEPS = 40
STAIRCASE_TERMS = 40


class Box:
    """An axis-aligned closed box [lo_1, hi_1] x ... x [lo_d, hi_d].

    Coordinates may be Fractions, in which case volumes and intersections are exact.

    Attributes:
        lo: Lower corner.
        hi: Upper corner.
    """

    def __init__(self, lo: Sequence[Scalar], hi: Sequence[Scalar]):
        """Initialize a Box."""
        lo, hi = tuple(lo), tuple(hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError(f"Box corners must have the same positive length: {lo}, {hi}.")
        for low, high in zip(lo, hi):
            if not low < high:
                raise ValueError(f"Box is empty along an axis: [{low}, {high}].")
        self.lo = lo
        self.hi = hi

    @classmethod
    def interval(cls, a: Scalar, b: Scalar) -> Self:
        """Create the one-dimensional box [a, b]."""
        return cls((a,), (b,))

    @classmethod
    def centered(cls, radius: Scalar, d: int) -> Self:
        """Create the max-norm cube D(0, r) in d dimensions."""
        return cls((-radius,) * d, (radius,) * d)

    @property
    def dim(self) -> int:
        """Return the dimension of the box."""
        return len(self.lo)

    @property
    def edges(self) -> Tuple[Scalar, ...]:
        """Return the edge lengths."""
        return tuple(high - low for low, high in zip(self.lo, self.hi))

    @property
    def volume(self) -> Scalar:
        """Return the Lebesgue measure of the box."""
        return math.prod(self.edges)

    @property
    def center(self) -> Tuple[Scalar, ...]:
        """Return the center of the box."""
        return tuple((low + high) / 2 for low, high in zip(self.lo, self.hi))

    def contains(self, point: Sequence[float]) -> bool:
        """Check whether a point lies in the closed box."""
        return all(low <= x <= high for low, x, high in zip(self.lo, point, self.hi))

    def intersection_volume(self, other: "Box") -> Scalar:
        """Return the volume of the intersection with another box."""
        if other.dim != self.dim:
            raise ValueError(f"Dimension mismatch: {self.dim} vs {other.dim}.")
        volume: Scalar = 1
        for low1, high1, low2, high2 in zip(self.lo, self.hi, other.lo, other.hi):
            overlap = min(high1, high2) - max(low1, low2)
            if overlap <= 0:
                return Fraction(0) if isinstance(volume, (int, Fraction)) else 0.0
            volume = volume * overlap
        return volume

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return lo and hi as float arrays."""
        return np.array(self.lo, dtype=float), np.array(self.hi, dtype=float)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Box) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        """Return a string representation of the Box."""
        return f"Box(lo={self.lo}, hi={self.hi})"


class Gauge:
    """A strictly positive function on the integration domain.

    The callable receives one coordinate array per axis, like an integrand. It returns
    either one radius per point (an isotropic gauge) or a sequence of d arrays with
    per-axis radii (an anisotropic gauge whose balls are boxes). Callables that do not
    accept arrays are evaluated point by point.

    Usage example:

    ```python
    from ks2lab.hk_integrate import Gauge

    gauge = Gauge(lambda t: np.where(t > 0, t / 2, 0.1))
    ```
    """

    def __init__(self, delta: Callable, name: str = "gauge"):
        """Initialize a Gauge."""
        self.delta = delta
        self.name = name

    @classmethod
    def constant(cls, radius: float) -> Self:
        """Create the constant gauge with the given radius."""
        if not radius > 0:
            raise GaugeError("everywhere", radius)
        return cls(lambda *coords: np.full(np.shape(coords[0]), float(radius)), f"const({radius})")

    def scaled(self, factor: float) -> "Gauge":
        """Return the gauge multiplied by a positive factor."""
        base = self.delta
        return Gauge(
            lambda *coords: _scale_radii(base(*coords), factor), f"{factor}*{self.name}"
        )

    def radii(self, points: np.ndarray) -> np.ndarray:
        """Evaluate the gauge at points of shape (n, d) and return radii of shape (n, d).

        Raises:
            GaugeError: If a radius is not strictly positive and finite.
        """
        n, d = points.shape
        try:
            raw = self.delta(*[points[:, axis] for axis in range(d)])
            radii = _as_radii(raw, n, d)
        except (TypeError, ValueError):
            radii = np.array(
                [_as_radii(self.delta(*point), 1, d)[0] for point in points]
            ).reshape(n, d)
        bad = ~(np.isfinite(radii) & (radii > 0))
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise GaugeError(tuple(points[row]), float(radii[row, col]))
        return radii

    def __repr__(self) -> str:
        """Return a string representation of the Gauge."""
        return f"Gauge({self.name})"


def _scale_radii(raw, factor: float):
    if isinstance(raw, (tuple, list)):
        return [np.asarray(r, dtype=float) * factor for r in raw]
    return np.asarray(raw, dtype=float) * factor


def _as_radii(raw, n: int, d: int) -> np.ndarray:
    if isinstance(raw, (tuple, list)):
        if len(raw) != d:
            raise ValueError(f"Anisotropic gauge must return {d} radii.")
        return np.stack([np.broadcast_to(np.asarray(r, dtype=float), (n,)) for r in raw], axis=1)
    radius = np.broadcast_to(np.asarray(raw, dtype=float), (n,))
    return np.repeat(radius[:, None], d, axis=1)


def riemann_gauge(domain: Tuple[float, float], eta: int) -> Gauge:
    """The constant gauge (b - a) / eta under which gauge sums are Riemann sums.

    A Riemann-integrable function is HK-integrable with a constant gauge; with this
    gauge the partitioner produces a uniform midpoint partition with at least eta cells.
    """
    a, b = domain
    if eta < 1:
        raise ValueError(f"eta must be a positive integer, got {eta}.")
    return Gauge.constant((b - a) / eta)


class TaggedPartition:
    """A finite cell-and-tag decomposition of a box.

    Attributes:
        lo: Lower corners of the cells, shape (n, d).
        hi: Upper corners of the cells, shape (n, d).
        tags: Tags, one per cell, each inside its cell.
        domain: The partitioned box.
    """

    def __init__(self, lo: np.ndarray, hi: np.ndarray, tags: np.ndarray, domain: Box):
        """Initialize a TaggedPartition, sorting cells by their lower corner."""
        order = np.lexsort(lo.T[::-1])
        self.lo = lo[order]
        self.hi = hi[order]
        self.tags = tags[order]
        self.domain = domain

    @property
    def cells(self) -> List[Tuple[Tuple[float, ...], Tuple[float, ...], Tuple[float, ...]]]:
        """Return the cells as (lo, hi, tag) tuples; in 1D these read ((a,), (b,), (tag,))."""
        return [
            (tuple(low), tuple(high), tuple(tag))
            for low, high, tag in zip(self.lo, self.hi, self.tags)
        ]

    @property
    def volumes(self) -> np.ndarray:
        """Return the cell volumes."""
        return np.prod(self.hi - self.lo, axis=1)

    def is_gauge_fine(self, gauge: Gauge) -> bool:
        """Check that every cell lies inside the open ball of radius delta(tag) around its tag."""
        radii = gauge.radii(self.tags)
        inside_lo = np.all(self.tags - radii < self.lo, axis=1)
        inside_hi = np.all(self.hi < self.tags + radii, axis=1)
        tagged = np.all((self.lo <= self.tags) & (self.tags <= self.hi), axis=1)
        return bool(np.all(inside_lo & inside_hi & tagged))

    def riemann_sum(self, f: Callable) -> Tuple[float, int]:
        """Return the Riemann sum of f over the partition and the number of evaluations."""
        values = evaluate(f, self.tags)
        return math.fsum(values * self.volumes), len(values)

    def __len__(self) -> int:
        return len(self.tags)

    def __repr__(self) -> str:
        """Return a string representation of the TaggedPartition."""
        return f"TaggedPartition(cells={len(self)}, domain={self.domain})"


def evaluate(f: Callable, points: np.ndarray) -> np.ndarray:
    """Evaluate f at points of shape (n, d), passing one coordinate array per axis.

    Raises:
        NonFiniteValueError: If f is not finite at one of the points.
    """
    n, d = points.shape
    try:
        values = np.broadcast_to(
            np.asarray(f(*[points[:, axis] for axis in range(d)]), dtype=float), (n,)
        )
    except (TypeError, ValueError):
        values = np.array([float(f(*point)) for point in points], dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        index = int(np.flatnonzero(bad)[0])
        raise NonFiniteValueError(tuple(points[index]), float(values[index]))
    return values


def _bisection_partition(
    gauge: Gauge,
    domain: Box,
    max_depth: int,
    singularities: Sequence[Sequence[float]],
) -> TaggedPartition:
    d = domain.dim
    lo_init, hi_init = domain.as_arrays()
    lo, hi = lo_init[None, :], hi_init[None, :]
    singular = np.asarray(singularities, dtype=float).reshape(-1, d)
    accepted: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = []

    for depth in range(max_depth + 1):
        n = lo.shape[0]
        widths = hi - lo
        mids = (lo + hi) / 2
        tags = np.full((n, d), np.nan)
        found = np.zeros(n, dtype=bool)

        # a cell holding a declared singularity may only be tagged there
        holds = np.zeros((n, len(singular)), dtype=bool)
        for s, point in enumerate(singular):
            holds[:, s] = np.all((lo <= point) & (point <= hi), axis=1)
        regular = ~holds.any(axis=1)
        single = holds.sum(axis=1) == 1

        mid_radii = gauge.radii(mids)
        candidates = [(mids, regular, mid_radii), (lo, regular, None), (hi, regular, None)]
        for s, point in enumerate(singular):
            candidates.append((np.broadcast_to(point, (n, d)), single & holds[:, s], None))

        for positions, allowed, radii in candidates:
            todo = allowed & ~found
            if not todo.any():
                continue
            at = positions[todo]
            rad = radii[todo] if radii is not None else gauge.radii(at)
            fine = (
                np.all(widths[todo] <= rad, axis=1)
                & np.all(at - rad < lo[todo], axis=1)
                & np.all(hi[todo] < at + rad, axis=1)
            )
            index = np.flatnonzero(todo)[fine]
            tags[index] = positions[index]
            found[index] = True

        if found.any():
            accepted.append((lo[found], hi[found], tags[found]))
        rest = ~found
        if not rest.any():
            break
        if depth == max_depth:
            raise PartitionDepthError(tuple(mids[rest][0]), max_depth)

        lo, hi = lo[rest], hi[rest]
        split = widths[rest] > mid_radii[rest]
        split[~split.any(axis=1)] = True
        for axis in range(d):
            rows = split[:, axis]
            if not rows.any():
                continue
            middle = (lo[rows, axis] + hi[rows, axis]) / 2
            left_hi, right_lo = hi[rows].copy(), lo[rows].copy()
            left_hi[:, axis] = middle
            right_lo[:, axis] = middle
            lo = np.concatenate([lo[~rows], lo[rows], right_lo])
            hi = np.concatenate([hi[~rows], left_hi, hi[rows]])
            split = np.concatenate([split[~rows], split[rows], split[rows]])

    return TaggedPartition(
        np.concatenate([cell[0] for cell in accepted]),
        np.concatenate([cell[1] for cell in accepted]),
        np.concatenate([cell[2] for cell in accepted]),
        domain,
    )


def cousin_partition(
    gauge: Gauge,
    domain: Tuple[float, float],
    max_depth: int = DEFAULT_MAX_DEPTH,
    singularities: Sequence[float] = (),
) -> TaggedPartition:
    """Build a gauge-fine tagged partition of an interval by recursive bisection.

    A cell is accepted when its whole width is at most delta(tag) and it sits inside
    the open ball of radius delta(tag) around the tag. Tags are tried at the midpoint,
    then at the left and right end. A cell containing a declared singularity is tagged
    at that singularity or split further.

    Args:
        gauge: The gauge.
        domain: The interval (a, b) with a < b.
        max_depth: Maximal number of bisection rounds.
        singularities: Points that must be tags of the cells containing them.

    Returns:
        The gauge-fine TaggedPartition.

    Raises:
        ValueError: If the domain is empty.
        PartitionDepthError: If max_depth rounds do not suffice.
    """
    box = Box.interval(*domain)
    return _bisection_partition(gauge, box, max_depth, [(s,) for s in singularities])


class HKResult:
    """An integral value with its error bound and the mode that produced it.

    Attributes:
        value: The integral value.
        error_bound: Nonnegative error bound; rigorous only in series-exact mode.
        mode: One of gauge-riemann, hake-limit, series-exact.
        evaluations: Number of function evaluations or series terms used.
    """

    def __init__(self, value: float, error_bound: float, mode: str, evaluations: int):
        """Initialize an HKResult."""
        if mode not in MODES:
            raise ValueError(f"Unknown integration mode {mode}, expected one of {MODES}.")
        if error_bound < 0:
            raise ValueError(f"Error bound must be nonnegative, got {error_bound}.")
        self.value = float(value)
        self.error_bound = float(error_bound)
        self.mode = mode
        self.evaluations = int(evaluations)

    @property
    def enclosure(self) -> Enclosure:
        """Return [value - error_bound, value + error_bound]."""
        return Enclosure.around(self.value, self.error_bound)

    def to_record(self, function: str, domain: Sequence[float], tol: float) -> dict:
        """Return the JSON record of an integration request and its result."""
        return {
            "function": function,
            "domain": [float(x) for x in domain],
            "mode": self.mode,
            "tol": tol,
            "value": self.value,
            "error_bound": self.error_bound,
            "evaluations": self.evaluations,
        }

    def __repr__(self) -> str:
        """Return a string representation of the HKResult."""
        return (
            f"HKResult(value={self.value!r}, error_bound={self.error_bound:.3g}, "
            f"mode={self.mode}, evaluations={self.evaluations})"
        )


def _refined_riemann(
    f: Callable,
    box: Box,
    gauge: Gauge,
    refine_levels: int,
    singularities: Sequence[Sequence[float]],
    max_depth: int,
    extrapolate: bool = False,
) -> HKResult:
    if refine_levels < 1:
        raise ValueError(f"refine_levels must be at least 1, got {refine_levels}.")
    sums = []
    evaluations = 0
    for level in range(refine_levels + 1):
        partition = _bisection_partition(
            gauge.scaled(2.0**-level), box, max_depth, singularities
        )
        value, count = partition.riemann_sum(f)
        sums.append(value)
        evaluations += count
    last = sums[-1] - sums[-2]
    if extrapolate:
        # midpoint sums of a smooth integrand converge like the square of the gauge scale
        return HKResult(sums[-1] + last / 3, abs(last) / 3, GAUGE_RIEMANN, evaluations)
    return HKResult(sums[-1], abs(last), GAUGE_RIEMANN, evaluations)


def hk_integrate_1d(
    f: Callable,
    domain: Tuple[float, float],
    gauge: Gauge,
    refine_levels: int = DEFAULT_REFINE_LEVELS,
    singularities: Sequence[float] = (),
    max_depth: int = DEFAULT_MAX_DEPTH,
    extrapolate: bool = False,
) -> HKResult:
    """Integrate f over an interval by gauge-fine Riemann sums.

    The gauge is refined by factors 2^-j for j = 0..refine_levels. The value is the
    Riemann sum at the finest level and the error bound is the difference between the
    last two levels. With extrapolate the last two levels are combined by one
    Richardson step of order 2 and the error bound is the size of that correction;
    this is sound only for integrands that are smooth on the closed interval.

    Args:
        f: The integrand, called with a coordinate array (or a float as fallback).
        domain: The interval (a, b).
        gauge: The gauge.
        refine_levels: Number of refinements, at least 1.
        singularities: Points that must be tags.
        max_depth: Bisection depth cap.
        extrapolate: Apply the Richardson step to the last two levels.

    Returns:
        HKResult in gauge-riemann mode.

    Raises:
        NonFiniteValueError: If f is not finite at a tag.
        PartitionDepthError: If a partition cannot be completed.
    """
    return _refined_riemann(
        f,
        Box.interval(*domain),
        gauge,
        refine_levels,
        [(s,) for s in singularities],
        max_depth,
        extrapolate,
    )


def hk_integrate_box(
    f: Callable,
    box: Box,
    gauge: Gauge,
    refine_levels: int = DEFAULT_REFINE_LEVELS,
    max_dim: int = DEFAULT_MAX_DIM,
    singularities: Sequence[Sequence[float]] = (),
    max_depth: int = DEFAULT_MAX_DEPTH,
    extrapolate: bool = False,
) -> HKResult:
    """Integrate f over a box in R^d by gauge-fine Riemann sums with per-axis bisection.

    Same error convention as hk_integrate_1d. Only the axes whose edge exceeds the
    gauge radius are bisected, so anisotropic gauges keep flat directions coarse.

    Raises:
        DimensionError: If the box dimension exceeds max_dim.
        NonFiniteValueError: If f is not finite at a tag.
    """
    if box.dim > max_dim:
        raise DimensionError(f"Box dimension {box.dim} exceeds the cap {max_dim}.")
    return _refined_riemann(f, box, gauge, refine_levels, singularities, max_depth, extrapolate)


def integrate_union(
    f: Callable,
    pieces: Sequence[Union[Box, Tuple[float, float]]],
    gauge: Gauge,
    refine_levels: int = DEFAULT_REFINE_LEVELS,
) -> HKResult:
    """Integrate f over a finite union of pairwise disjoint boxes or intervals.

    Raises:
        ValueError: If the union is empty or two pieces overlap with positive volume.
    """
    boxes = [piece if isinstance(piece, Box) else Box.interval(*piece) for piece in pieces]
    if not boxes:
        raise ValueError("A measurable set needs at least one piece.")
    for i, first in enumerate(boxes):
        for second in boxes[i + 1 :]:
            if first.intersection_volume(second) > 0:
                raise ValueError(f"Pieces {first} and {second} overlap.")
    results = [hk_integrate_box(f, box, gauge, refine_levels) for box in boxes]
    return HKResult(
        math.fsum(r.value for r in results),
        math.fsum(r.error_bound for r in results),
        GAUGE_RIEMANN,
        sum(r.evaluations for r in results),
    )


def _richardson(values: Sequence[float]) -> float:
    """Extrapolate the last value, estimating the order from contracting differences."""
    last = values[-1] - values[-2]
    order = 2.0
    if len(values) >= 3:
        previous = values[-2] - values[-3]
        if last != 0 and abs(previous) > abs(last):
            order = math.log2(abs(previous / last))
    return values[-1] + last / (2.0**order - 1.0)


def hake_limit_integrate(
    f: Callable,
    domain: Tuple[float, float],
    tol: float = 1e-6,
    max_steps: int = HAKE_MAX_STEPS,
    quad_limit: int = 500,
) -> HKResult:
    """Integrate f singular at the left end point as the limit of integrals over [c_j, b].

    The mesh is c_j = a + (b - a) 2^-j. Each slice [c_j, c_{j-1}] is integrated by
    adaptive quadrature and the partial integrals are extrapolated by Richardson's rule.
    Its order is estimated from three consecutive partial integrals when their
    differences contract, and is 2 otherwise.

    Args:
        f: The integrand, only evaluated on (a, b].
        domain: The interval (a, b).
        tol: Target accuracy for the extrapolated limit.
        max_steps: Maximal number of mesh points.
        quad_limit: Subinterval limit for each slice quadrature.

    Returns:
        HKResult in hake-limit mode with error_bound <= tol.

    Raises:
        HakeConvergenceError: If the extrapolants do not settle within max_steps.
    """
    a, b = domain
    if not a < b:
        raise ValueError(f"Domain must be a nonempty interval, got {domain}.")
    if tol <= 0:
        raise ValueError(f"Tolerance must be positive, got {tol}.")
    logger.info(f"Started Hake limit on [{a}, {b}] with tol={tol}.")
    partials: List[float] = []
    estimates: List[float] = []
    running = 0.0
    quad_error = 0.0
    evaluations = 0
    for step in range(1, max_steps + 1):
        right = a + (b - a) * 2.0 ** -(step - 1)
        left = a + (b - a) * 2.0**-step
        out = integrate.quad(
            f, left, right, epsabs=tol * 1e-2, epsrel=1e-12, limit=quad_limit, full_output=1
        )
        if len(out) > 3:
            logger.warning(f"Slice [{left}, {right}]: {out[3].splitlines()[0]}")
        running += out[0]
        quad_error += out[1]
        evaluations += out[2]["neval"]
        partials.append(running)
        if len(partials) < 2:
            continue
        estimates.append(_richardson(partials))
        if len(estimates) < 2:
            continue
        error = abs(estimates[-1] - estimates[-2]) + quad_error
        if error <= tol:
            logger.info(f"Done. Hake limit converged after {step} steps.")
            return HKResult(estimates[-1], error, HAKE_LIMIT, evaluations)
    raise HakeConvergenceError(max_steps, estimates)


class StaircaseSpec:
    """A function constant on the dyadic plateaus (2^-n, 2^-n+1] of (0, 1].

    Plateau values are exact rationals given by a callable of n >= 1 or a sequence.
    The integral is the series of terms v_n 2^-n.

    Attributes:
        tail_bound_rule: "alternating" or "absolute".
        n_terms: Number of series terms N used by default.
        moment_sequence: Declares |term_n| to be moments of a positive measure on
            [0, 1], which admits accelerated summation of alternating series.
        max_ratio: Largest admissible term ratio for the absolute rule.
        hk_bound: Optional bound on |integral over any interval|.
        name: Name for reports.
    """

    def __init__(
        self,
        plateau_values: Union[Callable[[int], Scalar], Sequence[Scalar]],
        tail_bound_rule: str = "alternating",
        n_terms: int = STAIRCASE_TERMS,
        moment_sequence: bool = False,
        max_ratio: float = 0.9,
        hk_bound: Optional[float] = None,
        name: str = "staircase",
    ):
        """Initialize a StaircaseSpec."""
        if tail_bound_rule not in ("alternating", "absolute"):
            raise ValueError(f"Unknown tail bound rule {tail_bound_rule}.")
        if n_terms < 1:
            raise ValueError(f"n_terms must be positive, got {n_terms}.")
        self._values = plateau_values
        self.tail_bound_rule = tail_bound_rule
        self.n_terms = n_terms
        self.moment_sequence = moment_sequence
        self.max_ratio = max_ratio
        self.hk_bound = hk_bound
        self.name = name

    def value(self, n: int) -> Fraction:
        """Return the plateau value v_n."""
        if n < 1:
            raise ValueError(f"Plateaus are indexed from 1, got {n}.")
        if callable(self._values):
            return Fraction(self._values(n))
        if n > len(self._values):
            raise ValueError(f"Only {len(self._values)} plateau values were given.")
        return Fraction(self._values[n - 1])

    def term(self, n: int) -> Fraction:
        """Return v_n times the length of plateau n."""
        return self.value(n) / 2**n

    @staticmethod
    def plateau(n: int) -> Tuple[Fraction, Fraction]:
        """Return the end points of plateau n."""
        return Fraction(1, 2**n), Fraction(1, 2 ** (n - 1))

    @property
    def breakpoints(self) -> List[Fraction]:
        """Return the decreasing breakpoints 2^-n for n = 0..n_terms."""
        return [Fraction(1, 2**n) for n in range(self.n_terms + 1)]

    @property
    def plateau_values(self) -> List[Fraction]:
        """Return the first n_terms plateau values."""
        return [self.value(n) for n in range(1, self.n_terms + 1)]

    def __call__(self, t):
        """Evaluate the staircase pointwise; zero outside (0, 1]."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        inside = (t > 0) & (t <= 1)
        with np.errstate(divide="ignore"):
            index = np.floor(-np.log2(np.where(inside, t, 1.0))).astype(int) + 1
        for n in np.unique(index[inside]):
            out[inside & (index == n)] = float(self.value(int(n)))
        return out if out.shape else float(out)

    def series(self, start: int = 1, n_terms: Optional[int] = None) -> Tuple[Scalar, Fraction]:
        """Sum the terms from plateau start on, returning (value, rigorous tail bound).

        Raises:
            TailBoundError: If the declared rule does not apply to the terms.
        """
        count = n_terms or self.n_terms
        terms = [self.term(n) for n in range(start, start + count + 1)]
        if self.tail_bound_rule == "alternating":
            return _alternating_sum(terms, self.moment_sequence)
        return _absolute_sum(terms, self.max_ratio)

    def integrate_over(self, lo: Scalar, hi: Scalar) -> Enclosure:
        """Integrate the staircase over [lo, hi] with a rigorous tail bound."""
        low = max(Fraction(lo), Fraction(0))
        high = min(Fraction(hi), Fraction(1))
        if low >= high:
            return Enclosure.exact(Fraction(0))
        first = _plateau_index(high)
        last = _plateau_index(low) if low > 0 else None
        total = Fraction(0)
        n = first
        while last is None or n <= last:
            left, right = self.plateau(n)
            if last is None and low <= left and n > first:
                # every later plateau lies inside [0, high]
                tail, bound = self.series(start=n)
                return Enclosure.around(total + tail, bound)
            overlap = min(right, high) - max(left, low)
            if overlap > 0:
                total += self.value(n) * overlap
            n += 1
        return Enclosure.exact(total)

    def integrate_box(self, box: Box) -> Enclosure:
        """Integrate over a one-dimensional box."""
        if box.dim != 1:
            raise ValueError("Staircase functions live on the real line.")
        return self.integrate_over(box.lo[0], box.hi[0])

    def __repr__(self) -> str:
        """Return a string representation of the StaircaseSpec."""
        return f"StaircaseSpec({self.name}, rule={self.tail_bound_rule}, N={self.n_terms})"


def _plateau_index(t: Fraction) -> int:
    # t in (2^-n, 2^-n+1]
    n = 1
    while Fraction(1, 2**n) >= t:
        n += 1
    return n


def _chebyshev_at_three(n: int) -> int:
    previous, current = 1, 3
    if n == 0:
        return previous
    for _ in range(n - 1):
        previous, current = current, 6 * current - previous
    return current


def _alternating_sum(terms: List[Fraction], moment_sequence: bool) -> Tuple[Scalar, Fraction]:
    for first, second in zip(terms, terms[1:]):
        if first == 0 or second == 0 or (first > 0) == (second > 0):
            raise TailBoundError("Series terms do not alternate in sign.")
        if abs(second) > abs(first):
            raise TailBoundError("Series terms do not decrease in magnitude.")
    n = len(terms) - 1
    if not moment_sequence:
        return sum(terms[:n], Fraction(0)), abs(terms[n])
    # Chebyshev-weighted acceleration; exact because T_n(3) and the weights are integers
    magnitudes = [abs(t) for t in terms[:n]]
    d = _chebyshev_at_three(n)
    b = Fraction(-1)
    c = Fraction(-d)
    s = Fraction(0)
    for k in range(n):
        c = b - c
        s += c * magnitudes[k]
        b = Fraction((k + n) * (k - n)) * b / (Fraction(2 * k + 1, 2) * (k + 1))
    sign = 1 if terms[0] > 0 else -1
    return sign * s / d, magnitudes[0] / d


def _absolute_sum(terms: List[Fraction], max_ratio: float) -> Tuple[Scalar, Fraction]:
    n = len(terms) - 1
    if any(t == 0 for t in terms[:n]):
        raise TailBoundError("Absolute rule needs nonzero terms.")
    ratios = [abs(terms[k + 1] / terms[k]) for k in range(n // 2, n)]
    ratio = max(ratios)
    if ratio > max_ratio:
        raise TailBoundError(
            f"Series not absolutely summable at observed term ratio {float(ratio):.4f}."
        )
    return sum(terms[:n], Fraction(0)), abs(terms[n - 1]) * ratio / (1 - ratio)


def staircase_series_integrate(spec: StaircaseSpec, n_terms: Optional[int] = None) -> HKResult:
    """Integrate a staircase function as the series of its plateau contributions.

    Each term v_n 2^-n is computed exactly. The error bound is rigorous: the first
    omitted term for alternating series, a geometric majorant for the absolute rule,
    and the accelerated bound |term_1| / T_N(3) for alternating moment sequences.

    Raises:
        TailBoundError: If the declared tail bound rule is inapplicable.
    """
    count = n_terms or spec.n_terms
    value, bound = spec.series(start=1, n_terms=count)
    return HKResult(float(value), float(bound), SERIES_EXACT, count + 1)


def nested_staircase_integrate(inner: StaircaseSpec, outer_terms: int = 60) -> HKResult:
    """Integrate g with g(2^-n (1 + x)) = f(x): a copy of the staircase f on every plateau.

    The plateau (2^-n, 2^-n+1] contributes 2^-n times the integral of f.
    """
    base = staircase_series_integrate(inner)
    mass = 1 - Fraction(1, 2**outer_terms)
    value = base.value * float(mass)
    bound = base.error_bound * float(mass) + abs(base.value) * 2.0**-outer_terms
    return HKResult(value, bound, SERIES_EXACT, base.evaluations + outer_terms)


def lebesgue_divergence_profile(spec: StaircaseSpec, n_terms: Optional[int] = None) -> np.ndarray:
    """Return the partial sums of |v_n| times the plateau lengths.

    For the alternating staircase these are harmonic numbers: the function is
    HK-integrable but not Lebesgue-integrable.
    """
    count = n_terms or spec.n_terms
    return np.cumsum([float(abs(spec.term(n))) for n in range(1, count + 1)])


def hk_seminorm(
    f: Callable,
    r_grid: Sequence[float],
    d: int = 1,
    gauge: Optional[Gauge] = None,
    refine_levels: int = 2,
) -> float:
    """Estimate sup over r of |integral of f over D(0, r)| on a grid of radii.

    Objects with an integrate_box method (step functions, staircases) are integrated
    exactly; other callables by hk_integrate_box with a constant gauge of 2r/1024
    unless a gauge is given. The result is a lower estimate of the supremum over r > 0.

    Raises:
        ValueError: If the grid is empty, not increasing or not positive.
    """
    radii = list(r_grid)
    if not radii or radii[0] <= 0 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError(f"r_grid must be increasing positive reals, got {radii}.")
    best = 0.0
    for radius in radii:
        box = Box.centered(radius, d)
        if hasattr(f, "integrate_box"):
            value = float(f.integrate_box(box).value)
        else:
            current = gauge or Gauge.constant(2 * radius / 1024)
            value = hk_integrate_box(f, box, current, refine_levels, max_dim=d).value
        best = max(best, abs(value))
    return best
