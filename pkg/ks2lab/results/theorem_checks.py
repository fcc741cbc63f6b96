"""Reports for the checks on the characteristic family and the embedding into KS2."""
from typing import List

import numpy as np
from loguru import logger

from ks2lab.results.base import ReportMixin


class GramReport(ReportMixin):
    """The verdict on whether the normalized characteristic family is orthonormal.

    Attributes:
        normalization: paper or corrected.
        K_max: Number of cubes.
        mode: The cube mode.
        max_offdiag: Largest absolute off-diagonal Gram entry.
        diag_values: The diagonal Gram entries.
        tolerance: Allowed deviation from the identity.
    """

    def __init__(
        self,
        normalization: str,
        K_max: int,
        mode: str,
        max_offdiag: float,
        diag_values: List[float],
        tolerance: float = 1e-12,
    ):
        """Initialize a GramReport."""
        self.normalization = normalization
        self.K_max = K_max
        self.mode = mode
        self.max_offdiag = float(max_offdiag)
        self.diag_values = [float(v) for v in diag_values]
        self.tolerance = tolerance

    @property
    def orthonormal(self) -> bool:
        """True if the Gram matrix is the identity within tolerance."""
        diag_error = max((abs(v - 1.0) for v in self.diag_values), default=0.0)
        return self.max_offdiag <= self.tolerance and diag_error <= self.tolerance

    @property
    def verdict_text(self) -> str:
        """Return a one-sentence verdict."""
        if self.orthonormal:
            return f"The {self.normalization} family is orthonormal up to K={self.K_max}."
        diag = np.unique(np.round(self.diag_values, 12))
        return (
            f"The {self.normalization} family is not orthonormal: diagonal values "
            f"{', '.join(f'{v:.6g}' for v in diag[:4])}, largest off-diagonal entry "
            f"{self.max_offdiag:.6g}."
        )

    def to_dict(self) -> dict:
        """Return the JSON-ready report."""
        return {
            "normalization": self.normalization,
            "K_max": self.K_max,
            "mode": self.mode,
            "max_offdiag": self.max_offdiag,
            "diag_values": self.diag_values,
            "orthonormal": self.orthonormal,
            "verdict_text": self.verdict_text,
        }

    def report(self):
        """Print the verdict."""
        print(f"Gram check ({self.mode}, K={self.K_max}): {self.verdict_text}")

    def __repr__(self) -> str:
        """Return a string representation of the GramReport."""
        return f"GramReport({self.normalization}, orthonormal={self.orthonormal})"


class EmbeddingReport(ReportMixin):
    """Compares the KS2 norm of a function with its HK seminorm.

    Attributes:
        function: Name of the checked function.
        ks2_norm: Upper end of the enclosure of the KS2 norm.
        hk_seminorm: Grid estimate of sup over r of the integral over D(0, r).
        allowance: Error allowance added to the seminorm.
    """

    def __init__(self, function: str, ks2_norm: float, hk_seminorm: float, allowance: float):
        """Initialize an EmbeddingReport and log a violated inequality."""
        self.function = function
        self.ks2_norm = float(ks2_norm)
        self.hk_seminorm = float(hk_seminorm)
        self.allowance = float(allowance)
        if not self.holds:
            logger.error(
                f"Embedding inequality violated for {function}: "
                f"{self.ks2_norm} > {self.hk_seminorm} + {self.allowance}."
            )

    @property
    def ratio(self) -> float:
        """Return ks2_norm / hk_seminorm, with 0/0 read as 0."""
        if self.hk_seminorm == 0:
            return 0.0 if self.ks2_norm == 0 else float("inf")
        return self.ks2_norm / self.hk_seminorm

    @property
    def holds(self) -> bool:
        """True if ks2_norm <= hk_seminorm + allowance."""
        return self.ks2_norm <= self.hk_seminorm + self.allowance

    def to_dict(self) -> dict:
        """Return the JSON-ready report."""
        return {
            "function": self.function,
            "ks2_norm": self.ks2_norm,
            "hk_seminorm": self.hk_seminorm,
            "ratio": self.ratio,
            "allowance": self.allowance,
            "holds": self.holds,
        }

    def report(self):
        """Print the comparison."""
        print(
            f"{self.function}\t\tKS2 norm: {self.ks2_norm:.6g}\t\tHK seminorm: "
            f"{self.hk_seminorm:.6g}\t\tratio: {self.ratio:.4f}\t\tholds: {self.holds}"
        )

    def __repr__(self) -> str:
        """Return a string representation of the EmbeddingReport."""
        return f"EmbeddingReport({self.function}, ratio={self.ratio:.4g}, holds={self.holds})"
