"""Exceptions raised by the ks2lab package.

Validation problems derive from ValueError, numerical non-convergence derives from
RuntimeError via ConvergenceError. The command line maps the two families to exit
codes 1 and 2.
"""
from typing import Optional, Sequence


class GaugeError(ValueError):
    """A gauge returned a radius that is not strictly positive and finite.

    Attributes:
        point: The point at which the gauge failed.
    """

    def __init__(self, point: Sequence[float] | float, value: float):
        """Initialize a GaugeError."""
        self.point = point
        self.value = value
        super().__init__(f"Gauge must be positive and finite, got {value} at {point}.")


class NonFiniteValueError(ValueError):
    """An integrand produced a non-finite value at a tag.

    Attributes:
        tag: The tag at which the integrand was evaluated.
    """

    def __init__(self, tag: Sequence[float] | float, value: float):
        """Initialize a NonFiniteValueError."""
        self.tag = tag
        self.value = value
        super().__init__(f"Integrand is not finite at tag {tag}: {value}.")


class DimensionError(ValueError):
    """A dimension exceeds the configured cap."""


class TailBoundError(ValueError):
    """The declared tail-bound rule does not apply to a series."""


class CountOverflowError(ValueError):
    """A lattice enumeration exceeds the configured count cap."""


class ConvergenceError(RuntimeError):
    """A numerical procedure did not converge."""


class PartitionDepthError(ConvergenceError):
    """Bisection hit its depth cap before the partition became gauge-fine.

    Attributes:
        point: A point inside a cell that could not be tagged.
        depth: The depth cap that was exceeded.
    """

    def __init__(self, point: Sequence[float] | float, depth: int):
        """Initialize a PartitionDepthError."""
        self.point = point
        self.depth = depth
        super().__init__(
            f"Bisection depth {depth} exceeded near {point}; "
            "the gauge decays faster than representable subdivision."
        )


class HakeConvergenceError(ConvergenceError):
    """The Hake limit did not settle within the allowed number of steps.

    Attributes:
        estimates: The extrapolated values computed before giving up.
    """

    def __init__(self, steps: int, estimates: Optional[Sequence[float]] = None):
        """Initialize a HakeConvergenceError."""
        self.steps = steps
        self.estimates = list(estimates or [])
        last = self.estimates[-1] if self.estimates else None
        super().__init__(
            f"Hake limit did not converge after {steps} steps (last estimate {last})."
        )


class RankDeficiencyError(ConvergenceError):
    """Gram-Schmidt retained no basis vector."""
