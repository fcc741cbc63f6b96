"""Reports for spectral decompositions and the reproducing kernel Hilbert space of a kernel."""
from typing import List, Optional

from loguru import logger

from ks2lab.results.base import ReportMixin


class DiagDominationReport(ReportMixin):
    """Compares |K(x, y)| with the diagonal values K(x, x) and K(y, y).

    The squared form |K(x,y)|^2 <= K(x,x) K(y,y) is Cauchy-Schwarz in the RKHS; the
    unsquared form |K(x,y)| <= K(x,x) K(y,y) is reported alongside.
    """

    def __init__(self, kxy: float, kxx: float, kyy: float, tolerance: float = 1e-12):
        """Initialize a DiagDominationReport."""
        self.kxy = float(kxy)
        self.kxx = float(kxx)
        self.kyy = float(kyy)
        self.tolerance = tolerance

    @property
    def squared_holds(self) -> bool:
        """True if |K(x,y)|^2 <= K(x,x) K(y,y) within tolerance."""
        return self.kxy**2 <= self.kxx * self.kyy * (1 + self.tolerance) + self.tolerance

    @property
    def unsquared_holds(self) -> bool:
        """True if |K(x,y)| <= K(x,x) K(y,y) within tolerance."""
        return abs(self.kxy) <= self.kxx * self.kyy + self.tolerance

    def to_dict(self) -> dict:
        """Return the JSON-ready report."""
        return {
            "kxy": self.kxy,
            "kxx": self.kxx,
            "kyy": self.kyy,
            "squared_holds": self.squared_holds,
            "unsquared_holds": self.unsquared_holds,
        }

    def report(self):
        """Print both forms."""
        print(
            f"K(x,y)={self.kxy:.6g}\t\tK(x,x)={self.kxx:.6g}\t\tK(y,y)={self.kyy:.6g}"
            f"\t\tsquared: {self.squared_holds}\t\tunsquared: {self.unsquared_holds}"
        )

    def __repr__(self) -> str:
        """Return a string representation of the DiagDominationReport."""
        return f"DiagDominationReport(squared={self.squared_holds}, unsquared={self.unsquared_holds})"


class IotaNormReport(ReportMixin):
    """Compares sup sqrt(lambda_n) with the decay model bound c 2^(-(2d+1)/2)."""

    def __init__(self, sup_sqrt_lambda: float, model_bound: float):
        """Initialize an IotaNormReport."""
        self.sup_sqrt_lambda = float(sup_sqrt_lambda)
        self.model_bound = float(model_bound)
        if not self.holds:
            logger.error(
                f"Embedding norm {self.sup_sqrt_lambda} exceeds the model bound {self.model_bound}."
            )

    @property
    def holds(self) -> bool:
        """True if the supremum is within the model bound."""
        return self.sup_sqrt_lambda <= self.model_bound * (1 + 1e-12)

    def to_dict(self) -> dict:
        """Return the JSON-ready report."""
        return {
            "sup_sqrt_lambda": self.sup_sqrt_lambda,
            "model_bound": self.model_bound,
            "holds": self.holds,
        }

    def report(self):
        """Print the comparison."""
        print(f"sup sqrt(lambda): {self.sup_sqrt_lambda:.6g}\t\tbound: {self.model_bound:.6g}")

    def __repr__(self) -> str:
        """Return a string representation of the IotaNormReport."""
        return f"IotaNormReport(holds={self.holds})"


class PointwiseBoundReport(ReportMixin):
    """The continuity bounds of an RKHS function at a pair of points."""

    def __init__(self, value: float, value_bound: float, difference: float, difference_bound: float):
        """Initialize a PointwiseBoundReport."""
        self.value = float(value)
        self.value_bound = float(value_bound)
        self.difference = float(difference)
        self.difference_bound = float(difference_bound)

    @property
    def holds(self) -> bool:
        """True if |f(x)| and |f(x) - f(y)| respect their bounds."""
        return (
            abs(self.value) <= self.value_bound + 1e-10
            and abs(self.difference) <= self.difference_bound + 1e-10
        )

    def to_dict(self) -> dict:
        """Return the JSON-ready report."""
        return {
            "value": self.value,
            "value_bound": self.value_bound,
            "difference": self.difference,
            "difference_bound": self.difference_bound,
            "holds": self.holds,
        }

    def report(self):
        """Print the bounds."""
        print(
            f"|f(x)|={abs(self.value):.6g} <= {self.value_bound:.6g}\t\t"
            f"|f(x)-f(y)|={abs(self.difference):.6g} <= {self.difference_bound:.6g}"
        )

    def __repr__(self) -> str:
        """Return a string representation of the PointwiseBoundReport."""
        return f"PointwiseBoundReport(holds={self.holds})"


class MercerReport(ReportMixin):
    """Spectral and RKHS checks on one kernel fixture.

    Attributes:
        kernel: Name of the kernel fixture.
        eigen: The EigenSystem as a dict.
        orthogonality_error: max |V^T V - I|.
        reconstruction_error: Frobenius error of the full Mercer sum.
        trace_error: |sum of eigenvalues - trace|.
        mercer_diagonal_error: max over points of |sum lambda k(x)^2 - K(x, x)|.
        reproducing_residual: max residual of the reproducing property.
        pd_minimum: Smallest quadratic form value over the random trials.
        diag_domination: Reports at random point pairs.
        seed: Seed of the random points.
    """

    def __init__(
        self,
        kernel: str,
        eigen: dict,
        orthogonality_error: float,
        reconstruction_error: float,
        trace_error: float,
        mercer_diagonal_error: Optional[float],
        reproducing_residual: Optional[float],
        pd_minimum: float,
        diag_domination: List[DiagDominationReport],
        seed: Optional[int],
    ):
        """Initialize a MercerReport."""
        self.kernel = kernel
        self.eigen = eigen
        self.orthogonality_error = float(orthogonality_error)
        self.reconstruction_error = float(reconstruction_error)
        self.trace_error = float(trace_error)
        self.mercer_diagonal_error = mercer_diagonal_error
        self.reproducing_residual = reproducing_residual
        self.pd_minimum = float(pd_minimum)
        self.diag_domination = diag_domination
        self.seed = seed

    def to_dict(self) -> dict:
        """Return the JSON-ready report."""
        return {
            "kernel": self.kernel,
            "eigen": self.eigen,
            "orthogonality_error": self.orthogonality_error,
            "reconstruction_error": self.reconstruction_error,
            "trace_error": self.trace_error,
            "mercer_diagonal_error": self.mercer_diagonal_error,
            "reproducing_residual": self.reproducing_residual,
            "pd_minimum": self.pd_minimum,
            "diag_domination_squared_holds": all(r.squared_holds for r in self.diag_domination),
            "diag_domination_unsquared_holds": all(r.unsquared_holds for r in self.diag_domination),
            "seed": self.seed,
        }

    def report(self):
        """Print a summary of the spectral checks."""
        eigenvalues = ", ".join(f"{v:.6g}" for v in self.eigen["eigenvalues"][:8])
        print(f"Kernel: {self.kernel}\t\teigenvalues: {eigenvalues}")
        print(
            f"orthogonality: {self.orthogonality_error:.3g}\t\treconstruction: "
            f"{self.reconstruction_error:.3g}\t\ttrace: {self.trace_error:.3g}"
            f"\t\tmin quadratic form: {self.pd_minimum:.3g}"
        )

    def __repr__(self) -> str:
        """Return a string representation of the MercerReport."""
        return f"MercerReport({self.kernel})"
