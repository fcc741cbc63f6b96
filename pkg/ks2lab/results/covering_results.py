"""Reports for covering-number scans of the embedding of an RKHS into KS2."""
import math
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from ks2lab.results.base import ReportMixin

CSV_COLUMNS = [
    "eps",
    "m",
    "upper_log2",
    "lower_log2_opt",
    "lower_log2_int",
    "ratio_upper",
    "ratio_lower",
    "empirical_count",
    "volumetric_count",
]
TREND_THRESHOLD = 2.0**-8


class CoveringReport(ReportMixin):
    """Per-eps covering bounds of a decay model and their asymptotic ratios.

    Each record holds eps, m, the upper and the two lower log2 bounds, the ratios
    log2-bound / log2(1/eps)^2 and, for small m, the empirical lattice count and the
    volumetric lower count of the finite-rank ellipsoid.

    Usage example:

    ```python
    from ks2lab.covering_numbers import asymptotic_scan
    from ks2lab.mercer_rkhs import DecayModel

    report = asymptotic_scan(DecayModel(d=1, c=1, a=1), [2.0**-p for p in range(6, 25)])
    report.terminal_ratios()
    report.to_csv("covering.csv")
    ```

    Attributes:
        model: The decay model as a dict {d, c, a}.
        records: One dict per eps, ordered by decreasing eps.
        grid_factor: Lattice spacing factor of the empirical oracle.
    """

    def __init__(self, model: dict, records: List[dict], grid_factor: float = 1.0):
        """Initialize a CoveringReport."""
        self.model = model
        self.records = records
        self.grid_factor = grid_factor

    @property
    def upper_target(self) -> float:
        """Return the limsup target 2/(2d+1) of the upper ratio."""
        return 2 / (2 * self.model["d"] + 1)

    @property
    def lower_target(self) -> float:
        """Return the liminf target 1/(2(2d+1)) of the lower ratio."""
        return 1 / (2 * (2 * self.model["d"] + 1))

    @property
    def sandwich_holds(self) -> bool:
        """True if lower <= upper on every record."""
        return all(
            max(r["lower_log2_opt"], r["lower_log2_int"]) <= r["upper_log2"] for r in self.records
        )

    @property
    def oracle_sandwich_holds(self) -> bool:
        """True if volumetric <= empirical wherever both counts exist."""
        return all(
            r["volumetric_count"] <= r["empirical_count"]
            for r in self.records
            if r["empirical_count"] is not None
        )

    def to_dataframe(self) -> pd.DataFrame:
        """Return the records with the CSV columns."""
        return pd.DataFrame(self.records, columns=CSV_COLUMNS)

    def to_csv(self, path: str | Path):
        """Write the records as CSV."""
        self.to_dataframe().to_csv(path, index=False)

    def terminal_ratios(self) -> dict:
        """Return the ratios at the smallest eps next to their targets."""
        if not self.records:
            return {}
        last = self.records[-1]
        return {
            "eps": last["eps"],
            "ratio_upper": last["ratio_upper"],
            "ratio_lower": last["ratio_lower"],
            "upper_target": self.upper_target,
            "lower_target": self.lower_target,
        }

    def trend_fit(self, threshold: float = TREND_THRESHOLD) -> Optional[Tuple[float, float]]:
        """Fit ratio_upper ~ A + B / log2(1/eps) over records with eps <= threshold.

        Returns:
            (A, B), or None with fewer than two qualifying records.
        """
        points = [r for r in self.records if r["eps"] <= threshold]
        if len(points) < 2:
            return None
        x = np.array([1 / math.log2(1 / r["eps"]) for r in points])
        y = np.array([r["ratio_upper"] for r in points])
        B, A = np.polyfit(x, y, 1)
        return float(A), float(B)

    @property
    def trend_nonincreasing(self) -> Optional[bool]:
        """True if the fitted upper-ratio trend is nonincreasing as eps decreases."""
        fit = self.trend_fit()
        return None if fit is None else fit[1] >= 0

    @property
    def m_growth(self) -> Optional[float]:
        """Return m / log2(1/eps) at the smallest eps; tends to 2/(2d+1)."""
        if not self.records:
            return None
        last = self.records[-1]
        return last["m"] / math.log2(1 / last["eps"])

    def to_dict(self) -> dict:
        """Return the JSON-ready report."""
        fit = self.trend_fit()
        return {
            "model": self.model,
            "grid_factor": self.grid_factor,
            "records": self.records,
            "terminal_ratios": self.terminal_ratios(),
            "trend_fit": None if fit is None else {"A": fit[0], "B": fit[1]},
            "trend_nonincreasing": self.trend_nonincreasing,
            "m_growth": self.m_growth,
            "sandwich_holds": self.sandwich_holds,
            "oracle_sandwich_holds": self.oracle_sandwich_holds,
        }

    def report(self):
        """Print the records and the terminal ratios."""
        print("eps\t\tm\tupper\t\tlower_opt\tlower_int")
        for r in self.records:
            print(
                f"{r['eps']:.3g}\t\t{r['m']}\t{r['upper_log2']:.4f}\t"
                f"{r['lower_log2_opt']:.4f}\t\t{r['lower_log2_int']:.4f}"
            )
        ratios = self.terminal_ratios()
        if ratios:
            print(
                f"ratio_upper: {ratios['ratio_upper']:.4f} (target {ratios['upper_target']:.4f})"
                f"\t\tratio_lower: {ratios['ratio_lower']:.4f} (target {ratios['lower_target']:.4f})"
            )

    def __repr__(self) -> str:
        """Return a string representation of the CoveringReport."""
        return f"CoveringReport(model={self.model}, records={len(self.records)})"
