"""The cube family B_1, B_2, ... behind the KS2 norm, and the weighted measure it induces.

Two enumerations are available:

- ``geometric``: cube k has edge s 2^-k and the cubes are packed side by side along the
  first axis, so they are pairwise disjoint and vol(B_k) = s^d 2^-kd.
- ``diagonal``: the cubes B_n(q_i) of every level n around every rational point q_i,
  visited along the diagonals of the (n, i) grid. Radii are 2^-n, so cubes overlap.

All geometry is exact rational arithmetic.
"""
import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import special
from scipy.stats import qmc
from typing_extensions import Self

from ks2lab.corpus.functions import CorpusFunction
from ks2lab.enclosure import Enclosure, scalar_to_json
from ks2lab.hk_integrate import Box, Gauge, evaluate, hk_integrate_box
from ks2lab.step_functions import StepFunction

GEOMETRIC = "geometric"
DIAGONAL = "diagonal"
CUBE_MODES = (GEOMETRIC, DIAGONAL)

DEFAULT_K_MAX = 16
DEFAULT_SAMPLES = 1024


class Cube:
    """A closed max-norm ball {x : |x - center|_inf <= radius}.

    Attributes:
        center: The center, a tuple of Fractions.
        level: The level n; radii halve from one level to the next.
        radius: The exact radius.
        index: The position k of the cube in its system.
    """

    def __init__(self, center: Sequence[Fraction], level: int, radius: Fraction, index: int):
        """Initialize a Cube."""
        if radius <= 0:
            raise ValueError(f"Cube radius must be positive, got {radius}.")
        self.center = tuple(Fraction(c) for c in center)
        self.level = level
        self.radius = Fraction(radius)
        self.index = index

    @property
    def dim(self) -> int:
        """Return the dimension."""
        return len(self.center)

    @property
    def lo(self) -> Tuple[Fraction, ...]:
        """Return the lower corner."""
        return tuple(c - self.radius for c in self.center)

    @property
    def hi(self) -> Tuple[Fraction, ...]:
        """Return the upper corner."""
        return tuple(c + self.radius for c in self.center)

    @property
    def box(self) -> Box:
        """Return the cube as a Box."""
        return Box(self.lo, self.hi)

    @property
    def volume(self) -> Fraction:
        """Return (2 radius)^d."""
        return (2 * self.radius) ** self.dim

    def contains(self, point: Sequence[float]) -> bool:
        """Check membership; points on faces belong to the cube."""
        return all(
            low <= x <= high for low, x, high in zip(self.lo, point, self.hi)
        )

    def to_dict(self) -> dict:
        """Return a JSON-ready representation."""
        return {
            "k": self.index,
            "level": self.level,
            "center": [scalar_to_json(c) for c in self.center],
            "radius": scalar_to_json(self.radius),
        }

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Cube)
            and self.center == other.center
            and self.radius == other.radius
            and self.index == other.index
        )

    def __hash__(self) -> int:
        return hash((self.center, self.radius, self.index))

    def __repr__(self) -> str:
        """Return a string representation of the Cube."""
        center = ", ".join(str(c) for c in self.center)
        return f"Cube(k={self.index}, level={self.level}, center=({center}), radius={self.radius})"


def alpha_d(d: int) -> float:
    """Return pi^(d/2) / (2^(d-1) d^(d/2+1) Gamma(d/2)), equal to 1 for d = 1."""
    if d < 1:
        raise ValueError(f"Dimension must be positive, got {d}.")
    return math.pi ** (d / 2) / (2 ** (d - 1) * d ** (d / 2 + 1) * special.gamma(d / 2))


def default_edge_scale(d: int) -> Fraction:
    """Return the exact edge scale s with s^d close to alpha_d(d)."""
    if d == 1:
        return Fraction(1)
    return Fraction(alpha_d(d) ** (1 / d)).limit_denominator(10**12)


@lru_cache(maxsize=None)
def _fusc(n: int) -> int:
    # Stern's diatomic sequence
    if n < 2:
        return n
    if n % 2 == 0:
        return _fusc(n // 2)
    return _fusc(n // 2) + _fusc(n // 2 + 1)


def rational_at(m: int) -> Fraction:
    """Return the m-th rational of a fixed bijection from the naturals onto Q.

    0 maps to 0; odd m to the positive Calkin-Wilf rational number (m + 1) / 2 and even
    m to the negative of number m / 2.
    """
    if m < 0:
        raise ValueError(f"Rational index must be nonnegative, got {m}.")
    if m == 0:
        return Fraction(0)
    j = (m + 1) // 2 if m % 2 else m // 2
    value = Fraction(_fusc(j), _fusc(j + 1))
    return value if m % 2 else -value


def cantor_unpair(z: int) -> Tuple[int, int]:
    """Invert the Cantor pairing (x, y) -> (x + y)(x + y + 1)/2 + y."""
    w = (math.isqrt(8 * z + 1) - 1) // 2
    y = z - w * (w + 1) // 2
    return w - y, y


def _unpair_many(z: int, d: int) -> List[int]:
    parts = []
    for _ in range(d - 1):
        x, z = cantor_unpair(z)
        parts.append(x)
    parts.append(z)
    return parts


def rational_point(i: int, d: int) -> Tuple[Fraction, ...]:
    """Return the i-th point (i >= 1) of a fixed enumeration of Q^d."""
    return tuple(rational_at(m) for m in _unpair_many(i - 1, d))


def _diagonal_pairs() -> Iterator[Tuple[int, int]]:
    total = 2
    while True:
        for level in range(1, total):
            yield level, total - level
        total += 1


class CubeSystem:
    """A finite, ordered family of cubes B_1..B_K with weights 2^-k.

    The system is immutable after construction.

    Usage example:

    ```python
    from ks2lab.cube_system import enumerate_cubes

    system = enumerate_cubes(d=1, K_max=3, mode="geometric")
    system.volumes  # [1/2, 1/4, 1/8]
    ```

    Attributes:
        d: The dimension.
        mode: geometric or diagonal.
        cubes: The cubes ordered by index.
        edge_scale: The exact edge scale s in geometric mode, None otherwise.
    """

    def __init__(
        self,
        d: int,
        mode: str,
        cubes: Sequence[Cube],
        edge_scale: Optional[Fraction] = None,
    ):
        """Initialize a CubeSystem."""
        if d < 1:
            raise ValueError(f"Dimension must be positive, got {d}.")
        if mode not in CUBE_MODES:
            raise ValueError(f"Unknown cube mode {mode}, expected one of {CUBE_MODES}.")
        for position, cube in enumerate(cubes, start=1):
            if cube.index != position or cube.dim != d:
                raise ValueError(f"Cube {cube} does not fit position {position} in dimension {d}.")
        self.d = d
        self.mode = mode
        self.cubes: Tuple[Cube, ...] = tuple(cubes)
        self.edge_scale = edge_scale

    @classmethod
    def geometric(cls, d: int, K_max: int, edge_scale: Optional[Fraction] = None) -> Self:
        """Create K_max disjoint cubes with edges s 2^-k packed along the first axis."""
        scale = Fraction(edge_scale) if edge_scale is not None else default_edge_scale(d)
        if scale <= 0:
            raise ValueError(f"Edge scale must be positive, got {scale}.")
        cubes = []
        start = Fraction(0)
        for k in range(1, K_max + 1):
            radius = scale / 2 ** (k + 1)
            center = (start + radius,) + (radius,) * (d - 1)
            cubes.append(Cube(center, k, radius, k))
            start += 2 * radius
        return cls(d, GEOMETRIC, cubes, scale)

    @classmethod
    def diagonal(cls, d: int, K_max: int) -> Self:
        """Create the first K_max cubes B_n(q_i) along the diagonals of the (n, i) grid."""
        cubes = []
        pairs = _diagonal_pairs()
        for k in range(1, K_max + 1):
            level, i = next(pairs)
            cubes.append(Cube(rational_point(i, d), level, Fraction(1, 2**level), k))
        return cls(d, DIAGONAL, cubes)

    @property
    def K_max(self) -> int:
        """Return the number of cubes."""
        return len(self.cubes)

    @property
    def weights(self) -> List[Fraction]:
        """Return the weights 2^-k."""
        return [Fraction(1, 2**k) for k in range(1, self.K_max + 1)]

    @property
    def volumes(self) -> List[Fraction]:
        """Return the exact cube volumes."""
        return [cube.volume for cube in self.cubes]

    @property
    def alpha(self) -> Optional[Fraction]:
        """Return the exact volume constant s^d in geometric mode."""
        if self.edge_scale is None:
            return None
        return self.edge_scale**self.d

    @property
    def paper_alpha(self) -> float:
        """Return the Gamma-formula constant alpha_d."""
        return alpha_d(self.d)

    def cube(self, k: int) -> Cube:
        """Return B_k for 1 <= k <= K_max."""
        if not 1 <= k <= self.K_max:
            raise ValueError(f"Cube index {k} outside 1..{self.K_max}.")
        return self.cubes[k - 1]

    def overlap_matrix(self) -> List[List[Fraction]]:
        """Return the exact matrix of pairwise overlap volumes."""
        size = self.K_max
        matrix = [[Fraction(0)] * size for _ in range(size)]
        for i in range(size):
            for j in range(i, size):
                matrix[i][j] = matrix[j][i] = overlap_volume(self.cubes[i], self.cubes[j])
        return matrix

    def membership(self, point: Sequence[float]) -> np.ndarray:
        """Return a boolean array telling which cubes contain the point."""
        point = tuple(np.atleast_1d(point))
        if len(point) != self.d:
            raise ValueError(f"Expected a point in {self.d} dimensions, got {point}.")
        return np.array([cube.contains(point) for cube in self.cubes], dtype=bool)

    def to_dict(self) -> dict:
        """Return {d, K_max, mode, cubes} with exact scalars as strings."""
        return {
            "d": self.d,
            "K_max": self.K_max,
            "mode": self.mode,
            "cubes": [cube.to_dict() for cube in self.cubes],
        }

    def __len__(self) -> int:
        return self.K_max

    def __iter__(self) -> Iterator[Cube]:
        return iter(self.cubes)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CubeSystem)
            and self.mode == other.mode
            and self.d == other.d
            and self.cubes == other.cubes
        )

    def __hash__(self) -> int:
        return hash((self.mode, self.d, self.cubes))

    def __repr__(self) -> str:
        """Return a string representation of the CubeSystem."""
        return f"CubeSystem(d={self.d}, K_max={self.K_max}, mode={self.mode})"


def enumerate_cubes(
    d: int, K_max: int, mode: str = GEOMETRIC, edge_scale: Optional[Fraction] = None
) -> CubeSystem:
    """Enumerate the first K_max cubes of the family in the given mode.

    Args:
        d: The dimension, at least 1.
        K_max: The number of cubes, at least 1.
        mode: geometric or diagonal.
        edge_scale: Exact edge scale s for geometric mode.

    Returns:
        The CubeSystem; a pure function of its arguments.

    Raises:
        ValueError: If d or K_max is smaller than 1 or the mode is unknown.
    """
    if d < 1 or K_max < 1:
        raise ValueError(f"d and K_max must be positive, got d={d}, K_max={K_max}.")
    logger.info(f"Started enumerating {K_max} {mode} cubes in dimension {d}.")
    if mode == GEOMETRIC:
        system = CubeSystem.geometric(d, K_max, edge_scale)
    elif mode == DIAGONAL:
        system = CubeSystem.diagonal(d, K_max)
    else:
        raise ValueError(f"Unknown cube mode {mode}, expected one of {CUBE_MODES}.")
    logger.info("Done. Cube system enumerated.")
    return system


def cube_volume(cube: Cube) -> Fraction:
    """Return the exact volume (2r)^d."""
    return cube.volume


def overlap_volume(first: Cube, second: Cube) -> Fraction:
    """Return the exact volume of the intersection of two cubes."""
    if first.dim != second.dim:
        raise ValueError(f"Dimension mismatch: {first.dim} vs {second.dim}.")
    return Fraction(first.box.intersection_volume(second.box))


def _unwrap(f):
    """Reduce f to a step function, an object with integrate_box, or a plain callable."""
    if isinstance(f, CorpusFunction):
        return f.func
    if hasattr(f, "to_step_function"):
        return f.to_step_function()
    return f


def cube_integral(
    f: Callable,
    cube: Cube,
    gauge: Optional[Gauge] = None,
    refine_levels: int = 2,
) -> Enclosure:
    """Integrate f over a cube.

    Step functions and staircases are integrated exactly; any other callable goes
    through hk_integrate_box and inherits its heuristic error bound.
    """
    integrand = _unwrap(f)
    if hasattr(integrand, "integrate_box"):
        return integrand.integrate_box(cube.box)
    gauge = gauge or Gauge.constant(float(2 * cube.radius) / 16)
    result = hk_integrate_box(integrand, cube.box, gauge, refine_levels)
    return result.enclosure


def F_k(
    f: Callable,
    k: int,
    system: CubeSystem,
    gauge: Optional[Gauge] = None,
    refine_levels: int = 2,
) -> Enclosure:
    """Return the functional F_k(f), the integral of f over B_k, as an enclosure.

    Args:
        f: A step function, staircase, KS2 element, corpus function or callable.
        k: The cube index, 1 <= k <= K_max.
        system: The cube system.
        gauge: Gauge for callables; defaults to a constant gauge of edge / 16.
        refine_levels: Gauge refinements for callables.

    Returns:
        An exact enclosure on the indicator algebra, otherwise the integrator's.
    """
    return cube_integral(f, system.cube(k), gauge, refine_levels)


def cube_sup(f: Callable, cube: Cube, samples: int = DEFAULT_SAMPLES) -> float:
    """Estimate the essential supremum of f on a cube.

    Step functions are handled exactly over their arrangement cells. Other callables
    are sampled on an unscrambled Halton sequence, which gives a deterministic lower
    estimate.
    """
    integrand = _unwrap(f)
    if isinstance(integrand, StepFunction):
        return float(integrand.sup_on(cube.box))
    if samples < 1:
        raise ValueError(f"Number of samples must be positive, got {samples}.")
    unit = qmc.Halton(d=cube.dim, scramble=False).random(samples)
    lo, hi = cube.box.as_arrays()
    points = np.vstack([qmc.scale(unit, lo, hi), (lo + hi)[None, :] / 2])
    return float(np.max(evaluate(integrand, points)))


def F_k_sup(f: Callable, k: int, system: CubeSystem, samples: int = DEFAULT_SAMPLES) -> float:
    """Return the sampled essential supremum of f on B_k."""
    return cube_sup(f, system.cube(k), samples)


def mu_volume(system: CubeSystem) -> Enclosure:
    """Return the volume of the measure mu on R^d x R^d as an enclosure.

    The value is the partial sum over the system of 2^-k vol(B_k)^2 and the upper end
    adds a geometric bound on the omitted cubes. In geometric mode the upper end is
    the closed form alpha^2 / (2^(2d+1) - 1) exactly.
    """
    if system.K_max == 0:
        return Enclosure.exact(Fraction(0))
    partial = sum(
        (w * v**2 for w, v in zip(system.weights, system.volumes)), Fraction(0)
    )
    K, d = system.K_max, system.d
    if system.mode == GEOMETRIC:
        ratio = Fraction(1, 2 ** (2 * d + 1))
        tail = system.alpha**2 * ratio ** (K + 1) / (1 - ratio)
    else:
        # every diagonal-mode cube has volume at most 1
        tail = Fraction(1, 2**K)
    return Enclosure(partial, partial + tail, partial)


class MeasureMu:
    """The measure on R^d x R^d with density sum over k of 2^-k chi_k(x) chi_k(y).

    Attributes:
        system: The underlying cube system.
        closed_form_volume: alpha^2 / (2^(2d+1) - 1) in geometric mode, None otherwise.
    """

    def __init__(self, system: CubeSystem):
        """Initialize a MeasureMu."""
        self.system = system
        self.closed_form_volume: Optional[Fraction] = None
        if system.mode == GEOMETRIC and system.alpha is not None:
            self.closed_form_volume = system.alpha**2 / (2 ** (2 * system.d + 1) - 1)

    def volume(self) -> Enclosure:
        """Return mu_volume of the system."""
        return mu_volume(self.system)

    def density(self, x: Sequence[float], y: Sequence[float]) -> Fraction:
        """Evaluate the density at the pair (x, y)."""
        both = self.system.membership(x) & self.system.membership(y)
        return sum(
            (w for w, inside in zip(self.system.weights, both) if inside), Fraction(0)
        )

    def __repr__(self) -> str:
        """Return a string representation of the MeasureMu."""
        return f"MeasureMu({self.system}, closed_form_volume={self.closed_form_volume})"
