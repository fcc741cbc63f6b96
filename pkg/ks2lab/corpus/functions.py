"""Named integrands with known integrals.

The registry is immutable after import. Every entry carries its preferred integration
mode, the oracle value used by tests and reports, and the bounds needed for KS2 tail
estimates.
"""
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from ks2lab.hk_integrate import (
    GAUGE_RIEMANN,
    HAKE_LIMIT,
    MODES,
    SERIES_EXACT,
    Box,
    Gauge,
    HKResult,
    StaircaseSpec,
    hake_limit_integrate,
    hk_integrate_1d,
    nested_staircase_integrate,
    riemann_gauge,
    staircase_series_integrate,
)
from ks2lab.step_functions import StepFunction


def h(t):
    """The oscillator 2t cos(pi/t^2) + (2 pi/t) sin(pi/t^2) with h(0) = 0."""
    t = np.asarray(t, dtype=float)
    safe = np.where(t == 0, 1.0, t)
    with np.errstate(over="ignore", invalid="ignore"):
        phase = np.pi / safe**2
        value = 2 * safe * np.cos(phase) + (2 * np.pi / safe) * np.sin(phase)
    out = np.where(t == 0, 0.0, value)
    return out if out.shape else float(out)


def h_antiderivative(t):
    """F(t) = t^2 cos(pi/t^2) with F(0) = 0, so that F' = h."""
    t = np.asarray(t, dtype=float)
    safe = np.where(t == 0, 1.0, t)
    out = np.where(t == 0, 0.0, safe**2 * np.cos(np.pi / safe**2))
    return out if out.shape else float(out)


def dh_pointwise(t):
    """h plus the indicator of the rationals.

    Every floating point number is rational, so sampled values are h + 1 everywhere.
    The perturbation lives on a null set and is invisible to integration, which is
    why the registry integrates the a.e. representative h instead.
    """
    return h(t) + 1.0


def sinc(x):
    """sin(x)/x with value 1 at 0."""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def inv_sqrt(t):
    """1/sqrt(t) on (0, 1]."""
    return 1.0 / np.sqrt(np.asarray(t, dtype=float))


def one(*coords):
    """The constant function 1."""
    return np.ones(np.broadcast(*[np.asarray(x) for x in coords]).shape)


STAIRCASE_F = StaircaseSpec(
    lambda n: Fraction((-1) ** (n + 1) * 2**n, n),
    tail_bound_rule="alternating",
    moment_sequence=True,
    hk_bound=2.0,
    name="paper.staircase_f",
)


def staircase_g(t):
    """A copy of the staircase f squeezed into every dyadic plateau of (0, 1]."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    inside = (t > 0) & (t <= 1)
    with np.errstate(divide="ignore"):
        n = np.floor(-np.log2(np.where(inside, t, 1.0))) + 1
    local = np.where(inside, t * 2.0**n - 1.0, 0.0)
    # the right end of a plateau maps to x = 1
    out[inside] = STAIRCASE_F(np.where(local[inside] <= 0, 1.0, local[inside]))
    return out if out.shape else float(out)


class CorpusFunction:
    """A named integrand with its integration metadata.

    Attributes:
        name: Registry name.
        func: The function that integrators sample (an a.e. representative).
        domain: Default integration interval.
        preferred_mode: Integration mode used when none is requested.
        exact_value: Oracle value of the integral over the default domain.
        singularities: Points that must be tags in gauge mode.
        sup_bound: Bound on |f|, if bounded.
        hk_bound: Bound on |integral over any interval|, if known.
        description: Human readable description.
        pointwise: The literal pointwise definition when it differs from func on a null set.
        smooth_except: Points where func fails to be smooth; None if it is not smooth at all.
            Gauge integrals over intervals avoiding these points are Richardson extrapolated.
    """

    def __init__(
        self,
        name: str,
        func: Callable,
        domain: Tuple[float, float],
        preferred_mode: str,
        exact_value: Optional[float] = None,
        singularities: Sequence[float] = (),
        sup_bound: Optional[float] = None,
        hk_bound: Optional[float] = None,
        description: str = "",
        pointwise: Optional[Callable] = None,
        series: Optional[Callable[[Optional[int]], HKResult]] = None,
        gauge: Optional[Callable[[Tuple[float, float]], Gauge]] = None,
        smooth_except: Optional[Sequence[float]] = None,
    ):
        """Initialize a CorpusFunction."""
        if preferred_mode not in MODES:
            raise ValueError(f"Unknown mode {preferred_mode}.")
        self.name = name
        self.func = func
        self.domain = domain
        self.preferred_mode = preferred_mode
        self.exact_value = exact_value
        self.singularities = tuple(singularities)
        self.sup_bound = sup_bound
        self.hk_bound = hk_bound
        self.description = description
        self.pointwise = pointwise or func
        self._series = series
        self._gauge = gauge
        self.smooth_except = None if smooth_except is None else tuple(smooth_except)

    def __call__(self, *coords):
        return self.func(*coords)

    def integrate(
        self,
        mode: Optional[str] = None,
        domain: Optional[Tuple[float, float]] = None,
        tol: float = 1e-6,
        refine_levels: int = 4,
        n_terms: Optional[int] = None,
    ) -> HKResult:
        """Integrate the function in the requested or preferred mode.

        Raises:
            ValueError: If the mode is unknown or unavailable for this function.
        """
        mode = mode or self.preferred_mode
        domain = tuple(domain or self.domain)
        if mode == SERIES_EXACT:
            if self._series is None or domain != tuple(self.domain):
                raise ValueError(f"{self.name} has no series representation on {domain}.")
            return self._series(n_terms)
        if mode == HAKE_LIMIT:
            return hake_limit_integrate(self.func, domain, tol=tol)
        if mode == GAUGE_RIEMANN:
            gauge = self._gauge(domain) if self._gauge else riemann_gauge(domain, 256)
            return hk_integrate_1d(
                self.func,
                domain,
                gauge,
                refine_levels,
                singularities=self.singularities,
                extrapolate=self.is_smooth_on(domain),
            )
        raise ValueError(f"Unknown mode {mode}, expected one of {MODES}.")

    def is_smooth_on(self, domain: Tuple[float, float]) -> bool:
        """True if func is smooth on the closed interval."""
        if self.smooth_except is None:
            return False
        return not any(domain[0] <= s <= domain[1] for s in self.smooth_except)

    def __repr__(self) -> str:
        """Return a string representation of the CorpusFunction."""
        return f"CorpusFunction({self.name}, domain={self.domain}, mode={self.preferred_mode})"


def _oscillator_gauge(domain: Tuple[float, float]) -> Gauge:
    # cells must resolve the local period t^3 of the oscillation
    return Gauge(lambda t: np.maximum(2e-3 * np.abs(np.asarray(t)) ** 3, 1e-12))


FUNCTIONS = MappingProxyType(
    {
        "paper.h": CorpusFunction(
            "paper.h",
            h,
            (0.0, 1.0),
            HAKE_LIMIT,
            exact_value=-1.0,
            description="2t cos(pi/t^2) + (2pi/t) sin(pi/t^2); antiderivative t^2 cos(pi/t^2).",
            gauge=_oscillator_gauge,
            smooth_except=(0.0,),
        ),
        "paper.Dh": CorpusFunction(
            "paper.Dh",
            h,
            (0.0, 1.0),
            HAKE_LIMIT,
            exact_value=-1.0,
            description="h plus the indicator of the rationals, integrated through h.",
            pointwise=dh_pointwise,
            gauge=_oscillator_gauge,
            smooth_except=(0.0,),
        ),
        "paper.staircase_f": CorpusFunction(
            "paper.staircase_f",
            STAIRCASE_F,
            (0.0, 1.0),
            SERIES_EXACT,
            exact_value=float(np.log(2.0)),
            hk_bound=2.0,
            description="(-1)^(n+1) 2^n / n on (2^-n, 2^-n+1]; HK but not Lebesgue integrable.",
            series=lambda n: staircase_series_integrate(STAIRCASE_F, n),
        ),
        "paper.staircase_g": CorpusFunction(
            "paper.staircase_g",
            staircase_g,
            (0.0, 1.0),
            SERIES_EXACT,
            exact_value=float(np.log(2.0)),
            description="g(2^-n (1 + x)) = f(x): the staircase f repeated on every plateau.",
            series=lambda n: nested_staircase_integrate(STAIRCASE_F, n or 60),
        ),
        "const.one": CorpusFunction(
            "const.one",
            one,
            (0.0, 1.0),
            GAUGE_RIEMANN,
            exact_value=1.0,
            sup_bound=1.0,
            description="The constant function 1.",
        ),
        "sinc": CorpusFunction(
            "sinc",
            sinc,
            (-np.pi, np.pi),
            GAUGE_RIEMANN,
            exact_value=float(2 * special.sici(np.pi)[0]),
            sup_bound=1.0,
            hk_bound=float(2 * special.sici(np.pi)[0]),
            description="sin(x)/x; its partial integrals peak at r = pi.",
            gauge=lambda domain: Gauge.constant((domain[1] - domain[0]) / 4096),
        ),
        "improper.inv_sqrt": CorpusFunction(
            "improper.inv_sqrt",
            inv_sqrt,
            (0.0, 1.0),
            HAKE_LIMIT,
            exact_value=2.0,
            description="1/sqrt(t), improperly Riemann integrable at 0.",
        ),
        "indicator.unit": CorpusFunction(
            "indicator.unit",
            StepFunction.indicator(Box.interval(Fraction(0), Fraction(1))),
            (-1.0, 2.0),
            GAUGE_RIEMANN,
            exact_value=1.0,
            sup_bound=1.0,
            hk_bound=1.0,
            description="The indicator of [0, 1].",
        ),
    }
)


def load_function(name: str) -> CorpusFunction:
    """Load a corpus function by name.

    Raises:
        ValueError: If the name is not in the registry.
    """
    if name not in FUNCTIONS:
        raise ValueError(
            f"Unknown corpus function {name}. Available: {', '.join(sorted(FUNCTIONS))}."
        )
    return FUNCTIONS[name]
