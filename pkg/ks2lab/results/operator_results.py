"""Reports for integral operators given by kernel coefficient matrices."""
from typing import List, Optional

import numpy as np
from loguru import logger

from ks2lab.results.base import ReportMixin


class OperatorNormReport(ReportMixin):
    """Largest observed ||A f|| over random unit f against the Frobenius norm of A.

    Attributes:
        max_ratio: Largest ||A f|| / ||f|| over the trials.
        frobenius: The Frobenius norm of A, which bounds the operator norm.
        spectral_norm: The exact operator norm, for reference.
        trials: Number of random directions.
        seed: Seed of the random directions.
    """

    def __init__(
        self,
        max_ratio: float,
        frobenius: float,
        spectral_norm: float,
        trials: int,
        seed: Optional[int],
    ):
        """Initialize an OperatorNormReport."""
        self.max_ratio = float(max_ratio)
        self.frobenius = float(frobenius)
        self.spectral_norm = float(spectral_norm)
        self.trials = trials
        self.seed = seed
        if not self.holds:
            logger.error(f"Operator norm bound violated: {self.max_ratio} > {self.frobenius}.")

    @property
    def holds(self) -> bool:
        """True if max_ratio <= frobenius (1 + 1e-12)."""
        return self.max_ratio <= self.frobenius * (1 + 1e-12)

    def to_dict(self) -> dict:
        """Return the JSON-ready report."""
        return {
            "max_ratio": self.max_ratio,
            "frobenius": self.frobenius,
            "spectral_norm": self.spectral_norm,
            "trials": self.trials,
            "seed": self.seed,
            "holds": self.holds,
        }

    def report(self):
        """Print the comparison."""
        print(
            f"max ||Af||/||f||: {self.max_ratio:.6g}\t\tFrobenius: {self.frobenius:.6g}"
            f"\t\tholds: {self.holds}"
        )

    def __repr__(self) -> str:
        """Return a string representation of the OperatorNormReport."""
        return f"OperatorNormReport(max_ratio={self.max_ratio:.6g}, frobenius={self.frobenius:.6g})"


class CoefficientBoundReport(ReportMixin):
    """Checks sum of c_k^2 <= ||K||^2 ||f||^2 for the coefficients c of I_K f."""

    def __init__(self, coefficient_energy: float, bound: float):
        """Initialize a CoefficientBoundReport."""
        self.coefficient_energy = float(coefficient_energy)
        self.bound = float(bound)
        if not self.holds:
            logger.error(f"Coefficient bound violated: {self.coefficient_energy} > {self.bound}.")

    @property
    def holds(self) -> bool:
        """True if the energy is within the bound up to 1e-12."""
        return self.coefficient_energy <= self.bound + 1e-12

    def to_dict(self) -> dict:
        """Return the JSON-ready report."""
        return {
            "coefficient_energy": self.coefficient_energy,
            "bound": self.bound,
            "holds": self.holds,
        }

    def report(self):
        """Print the comparison."""
        print(f"sum c_k^2: {self.coefficient_energy:.6g}\t\tbound: {self.bound:.6g}")

    def __repr__(self) -> str:
        """Return a string representation of the CoefficientBoundReport."""
        return f"CoefficientBoundReport(holds={self.holds})"


class OperatorReport(ReportMixin):
    """All operator checks run on one kernel fixture.

    Attributes:
        kernel: Name of the kernel fixture.
        size: Dimension of the coefficient matrix.
        symmetric: The symmetry flag of the kernel.
        norm: The operator norm report.
        self_adjointness_residuals: Residuals |<Af, g> - <f, Ag>| per trial.
        brute_force_errors: Deviation from the cube-functional oracle per trial.
        coefficient_bounds: Coefficient bound reports per trial.
        compactness_profile: Frobenius norms outside the leading m x m block.
        seed: Seed of the batch.
    """

    def __init__(
        self,
        kernel: str,
        size: int,
        symmetric: bool,
        norm: OperatorNormReport,
        self_adjointness_residuals: List[float],
        brute_force_errors: List[float],
        coefficient_bounds: List[CoefficientBoundReport],
        compactness_profile: List[float],
        seed: Optional[int],
    ):
        """Initialize an OperatorReport."""
        self.kernel = kernel
        self.size = size
        self.symmetric = symmetric
        self.norm = norm
        self.self_adjointness_residuals = [float(r) for r in self_adjointness_residuals]
        self.brute_force_errors = [float(e) for e in brute_force_errors]
        self.coefficient_bounds = coefficient_bounds
        self.compactness_profile = [float(t) for t in compactness_profile]
        self.seed = seed

    @property
    def holds(self) -> bool:
        """True if every check passed."""
        adjoint = not self.symmetric or all(r <= 1e-12 for r in self.self_adjointness_residuals)
        return self.norm.holds and adjoint and all(b.holds for b in self.coefficient_bounds)

    def to_dict(self) -> dict:
        """Return the JSON-ready report."""
        return {
            "kernel": self.kernel,
            "size": self.size,
            "symmetric": self.symmetric,
            "norm": self.norm.to_dict(),
            "self_adjointness_residual_max": max(self.self_adjointness_residuals, default=0.0),
            "brute_force_error_max": max(self.brute_force_errors, default=0.0),
            "coefficient_bounds_hold": all(b.holds for b in self.coefficient_bounds),
            "compactness_profile": self.compactness_profile,
            "seed": self.seed,
            "holds": self.holds,
        }

    def report(self):
        """Print a summary of all checks."""
        print(f"Kernel: {self.kernel} (size {self.size}, symmetric={self.symmetric})")
        self.norm.report()
        print(
            f"max self-adjointness residual: {max(self.self_adjointness_residuals, default=0.0):.3g}"
            f"\t\tmax brute-force error: {max(self.brute_force_errors, default=0.0):.3g}"
        )
        print(f"compactness profile: {np.round(self.compactness_profile, 6).tolist()}")

    def __repr__(self) -> str:
        """Return a string representation of the OperatorReport."""
        return f"OperatorReport({self.kernel}, holds={self.holds})"
