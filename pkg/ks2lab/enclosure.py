"""Closed real intervals carrying a representative value.

An Enclosure stands for a quantity known to lie in [lo, hi]. Exact results are
degenerate enclosures holding a Fraction. Truncated sums without an available tail
bound are marked as partial: their bounds only cover the computed part.
"""
from fractions import Fraction
from numbers import Real
from typing import Union

from typing_extensions import Self

Scalar = Union[Fraction, float, int]


def _to_scalar(value: Scalar) -> Scalar:
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    return float(value)


def scalar_to_json(value: Scalar) -> Union[str, float]:
    """Serialize an exact rational as "p/q" and anything else as a float."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return float(value)


class Enclosure:
    """A closed interval [lo, hi] around a representative value.

    Attributes:
        value: The representative value (a Fraction when exact).
        lo: Lower end of the interval.
        hi: Upper end of the interval.
        partial: True if a tail contribution is missing from the bounds.
    """

    def __init__(
        self,
        lo: Scalar,
        hi: Scalar,
        value: Scalar | None = None,
        partial: bool = False,
    ):
        """Initialize an Enclosure."""
        lo, hi = _to_scalar(lo), _to_scalar(hi)
        if lo > hi:
            raise ValueError(f"Enclosure bounds are reversed: lo={lo} > hi={hi}.")
        if value is None:
            value = (lo + hi) / 2
        self.lo = lo
        self.hi = hi
        self.value = _to_scalar(value)
        self.partial = partial

    @classmethod
    def exact(cls, value: Scalar) -> Self:
        """Create a degenerate enclosure."""
        return cls(value, value, value)

    @classmethod
    def around(cls, value: Scalar, radius: Scalar, partial: bool = False) -> Self:
        """Create the enclosure [value - radius, value + radius]."""
        if radius < 0:
            raise ValueError(f"Radius must be nonnegative, got {radius}.")
        value = _to_scalar(value)
        if isinstance(value, Fraction) and not isinstance(radius, Fraction):
            radius = Fraction(radius)
        return cls(value - radius, value + radius, value, partial)

    @property
    def width(self) -> Scalar:
        """Return hi - lo."""
        return self.hi - self.lo

    @property
    def radius(self) -> float:
        """Return the largest distance from the value to an end point."""
        return float(max(self.value - self.lo, self.hi - self.value))

    @property
    def is_exact(self) -> bool:
        """True for a degenerate enclosure of an exact rational."""
        return isinstance(self.value, Fraction) and self.lo == self.hi

    def contains(self, x: Real, slack: float = 0.0) -> bool:
        """Check whether x lies in the enclosure, widened by slack."""
        return self.lo - slack <= x <= self.hi + slack

    def __add__(self, other: "Enclosure | Scalar") -> "Enclosure":
        if not isinstance(other, Enclosure):
            other = Enclosure.exact(other)
        return Enclosure(
            _mix(self.lo, other.lo, "+"),
            _mix(self.hi, other.hi, "+"),
            _mix(self.value, other.value, "+"),
            self.partial or other.partial,
        )

    __radd__ = __add__

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo, -self.value, self.partial)

    def __sub__(self, other: "Enclosure | Scalar") -> "Enclosure":
        if not isinstance(other, Enclosure):
            other = Enclosure.exact(other)
        return self + (-other)

    def __mul__(self, other: "Enclosure | Scalar") -> "Enclosure":
        if not isinstance(other, Enclosure):
            other = Enclosure.exact(other)
        products = [
            _mix(a, b, "*") for a in (self.lo, self.hi) for b in (other.lo, other.hi)
        ]
        return Enclosure(
            min(products),
            max(products),
            _mix(self.value, other.value, "*"),
            self.partial or other.partial,
        )

    __rmul__ = __mul__

    def widen(self, amount: Scalar) -> "Enclosure":
        """Return the enclosure grown by amount on both sides."""
        if amount < 0:
            raise ValueError(f"Cannot widen by a negative amount {amount}.")
        if amount == 0:
            return self
        return Enclosure(
            _mix(self.lo, -amount, "+"),
            _mix(self.hi, amount, "+"),
            self.value,
            self.partial,
        )

    def to_dict(self) -> dict:
        """Return a JSON-ready representation."""
        return {
            "value": scalar_to_json(self.value),
            "lo": scalar_to_json(self.lo),
            "hi": scalar_to_json(self.hi),
            "partial": self.partial,
        }

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        """Return a string representation of the Enclosure."""
        flag = ", partial" if self.partial else ""
        return f"Enclosure({self.value} in [{self.lo}, {self.hi}]{flag})"


def _mix(a: Scalar, b: Scalar, op: str) -> Scalar:
    # keep exact arithmetic only when both operands are exact
    if not (isinstance(a, Fraction) and isinstance(b, Fraction)):
        a, b = float(a), float(b)
    return a + b if op == "+" else a * b
