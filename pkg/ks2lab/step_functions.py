"""The indicator algebra: finite linear combinations of box indicators.

Step functions are the exact path of the laboratory. Their integrals over boxes, their
essential suprema and their sums are computed in rational arithmetic.
"""
import itertools
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from typing_extensions import Self

from ks2lab.enclosure import Enclosure, Scalar
from ks2lab.hk_integrate import Box


class StepFunction:
    """A finite sum of coefficient times indicator of a closed box.

    Usage example:

    ```python
    from fractions import Fraction
    from ks2lab.hk_integrate import Box
    from ks2lab.step_functions import StepFunction

    f = StepFunction.indicator(Box.interval(Fraction(0), Fraction(1)))
    g = 3 * f - StepFunction.indicator(Box.interval(Fraction(1, 2), Fraction(2)))
    ```

    Attributes:
        terms: List of (coefficient, box) pairs with exact coefficients.
        dim: The dimension of the boxes.
    """

    def __init__(self, terms: Iterable[Tuple[Scalar, Box]], dim: Optional[int] = None):
        """Initialize a StepFunction, dropping zero coefficients."""
        self.terms: List[Tuple[Fraction, Box]] = []
        for coefficient, box in terms:
            coefficient = Fraction(coefficient)
            if dim is None:
                dim = box.dim
            if box.dim != dim:
                raise ValueError(f"All boxes must have dimension {dim}, got {box.dim}.")
            if coefficient != 0:
                self.terms.append((coefficient, _exact_box(box)))
        if dim is None:
            raise ValueError("The dimension of an empty StepFunction must be given.")
        self.dim = dim

    @classmethod
    def indicator(cls, box: Box) -> Self:
        """Create the indicator function of a box."""
        return cls([(1, box)])

    @classmethod
    def zero(cls, dim: int) -> Self:
        """Create the zero function in dim dimensions."""
        return cls([], dim)

    def __add__(self, other: "StepFunction") -> "StepFunction":
        if not isinstance(other, StepFunction):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError(f"Dimension mismatch: {self.dim} vs {other.dim}.")
        return StepFunction(self.terms + other.terms, self.dim)

    def __mul__(self, scalar: Scalar) -> "StepFunction":
        scalar = Fraction(scalar)
        return StepFunction([(scalar * c, box) for c, box in self.terms], self.dim)

    __rmul__ = __mul__

    def __neg__(self) -> "StepFunction":
        return self * -1

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        return self + (-other)

    def __call__(self, *coords):
        """Evaluate pointwise; accepts one coordinate (array) per axis."""
        arrays = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in coords])
        if len(arrays) != self.dim:
            raise ValueError(f"Expected {self.dim} coordinates, got {len(arrays)}.")
        out = np.zeros(arrays[0].shape)
        for coefficient, box in self.terms:
            inside = np.ones(arrays[0].shape, dtype=bool)
            for x, low, high in zip(arrays, box.lo, box.hi):
                inside &= (float(low) <= x) & (x <= float(high))
            out = out + float(coefficient) * inside
        return out if out.shape else float(out)

    def integrate_box(self, box: Box) -> Enclosure:
        """Integrate over a box exactly."""
        box = _exact_box(box)
        total = sum(
            (c * term.intersection_volume(box) for c, term in self.terms), Fraction(0)
        )
        return Enclosure.exact(total)

    def _cells(self, box: Box) -> Iterable[Tuple[float, ...]]:
        """Midpoints of the arrangement cells of all term boxes clipped to box."""
        axes = []
        for axis in range(self.dim):
            cuts = {box.lo[axis], box.hi[axis]}
            for _, term in self.terms:
                for cut in (term.lo[axis], term.hi[axis]):
                    if box.lo[axis] < cut < box.hi[axis]:
                        cuts.add(cut)
            ordered = sorted(cuts)
            axes.append([(a + b) / 2 for a, b in zip(ordered, ordered[1:])])
        return itertools.product(*axes)

    def sup_on(self, box: Box) -> Fraction:
        """Return the essential supremum on a box, exactly."""
        box = _exact_box(box)
        return max(self._value_at(point) for point in self._cells(box))

    def sup_norm(self) -> Fraction:
        """Return the essential supremum of |f| over the whole space."""
        if not self.terms:
            return Fraction(0)
        lo = [min(term.lo[axis] for _, term in self.terms) for axis in range(self.dim)]
        hi = [max(term.hi[axis] for _, term in self.terms) for axis in range(self.dim)]
        hull = Box(lo, hi)
        return max(abs(self._value_at(point)) for point in self._cells(hull))

    def l1_norm_bound(self) -> Fraction:
        """Return sum |c| volume, a bound on |integral over any box|."""
        return sum((abs(c) * term.volume for c, term in self.terms), Fraction(0))

    def _value_at(self, point: Sequence[Fraction]) -> Fraction:
        return sum(
            (c for c, term in self.terms if term.contains(point)), Fraction(0)
        )

    def __repr__(self) -> str:
        """Return a string representation of the StepFunction."""
        return f"StepFunction(dim={self.dim}, terms={len(self.terms)})"


def _exact_box(box: Box) -> Box:
    if all(isinstance(x, Fraction) for x in box.lo + box.hi):
        return box
    return Box([Fraction(x) for x in box.lo], [Fraction(x) for x in box.hi])
