"""The KS2 inner product over a cube system, Gram matrices and an orthonormal basis.

The inner product of f and g is the sum over k of 2^-k F_k(f) F_k(g), truncated at the
size of the cube system. Everything below is computed for this truncated form; the
omitted cubes enter only through tail bounds on enclosures.

The orthonormal basis is obtained from the exact Gram matrix of the cube indicators by
an LDL^T factorization in rational arithmetic, so the only inexact step is the final
scaling by square roots of the pivots.
"""
import math
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from ks2lab.corpus.functions import CorpusFunction
from ks2lab.cube_system import GEOMETRIC, CubeSystem, F_k, mu_volume
from ks2lab.enclosure import Enclosure, Scalar, scalar_to_json
from ks2lab.exceptions import RankDeficiencyError
from ks2lab.hk_integrate import Box, Gauge, hk_seminorm
from ks2lab.results.theorem_checks import EmbeddingReport, GramReport
from ks2lab.step_functions import StepFunction

PAPER = "paper"
CORRECTED = "corrected"
NORMALIZATIONS = (PAPER, CORRECTED)

DEFAULT_PIVOT_TOL = 1e-10
DEFAULT_R_GRID = (0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)


def _scale_squared(k: int, volume: Fraction, normalization: str) -> Fraction:
    """Return c_k^2 for Y_k = c_k chi_k."""
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"Unknown normalization {normalization}, expected one of {NORMALIZATIONS}.")
    power = k - 1 if normalization == PAPER else k
    return Fraction(2**power) / volume**2


def _scale_product(i: int, j: int, volumes: Sequence[Fraction], normalization: str) -> Scalar:
    # s_i s_j = 2^(e/2): rational exactly when e is even
    exponent = i + j - (2 if normalization == PAPER else 0)
    denominator = volumes[i - 1] * volumes[j - 1]
    if exponent % 2 == 0:
        return Fraction(2) ** (exponent // 2) / denominator
    return 2.0 ** (exponent / 2) / float(denominator)


def indicator_gram(system: CubeSystem) -> List[List[Fraction]]:
    """Return the exact truncated Gram matrix of the cube indicators chi_1..chi_K."""
    overlaps = system.overlap_matrix()
    weights = system.weights
    size = system.K_max
    gram = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        for j in range(i, size):
            gram[i][j] = gram[j][i] = sum(
                (w * overlaps[k][i] * overlaps[k][j] for k, w in enumerate(weights)), Fraction(0)
            )
    return gram


class GramEnclosure:
    """Enclosures of the KS2 inner products of the normalized family Y_k = c_k chi_k.

    In geometric mode the cubes after K_max are disjoint from the first K_max, so all
    entries are exact (rational whenever the scale product is). In diagonal mode the
    omitted cubes add a nonnegative tail, and entry (i, j) lies in
    [G_ij, G_ij + 2^-K vol_i vol_j c_i c_j].

    Attributes:
        system: The cube system.
        normalization: paper or corrected.
        entries: K x K nested list of Enclosures.
    """

    def __init__(self, system: CubeSystem, normalization: str, entries: List[List[Enclosure]]):
        """Initialize a GramEnclosure."""
        self.system = system
        self.normalization = normalization
        self.entries = entries

    @property
    def values(self) -> np.ndarray:
        """Return the truncated Gram matrix as floats."""
        return np.array([[float(e.value) for e in row] for row in self.entries])

    @property
    def is_exact(self) -> bool:
        """True if every entry is an exact rational."""
        return all(e.is_exact for row in self.entries for e in row)

    @property
    def diag_values(self) -> List[float]:
        """Return the diagonal entries."""
        return [float(self.entries[i][i].value) for i in range(len(self.entries))]

    @property
    def max_offdiag(self) -> float:
        """Return the largest absolute off-diagonal entry, upper ends included."""
        size = len(self.entries)
        return max(
            (
                max(abs(float(self.entries[i][j].lo)), abs(float(self.entries[i][j].hi)))
                for i in range(size)
                for j in range(size)
                if i != j
            ),
            default=0.0,
        )

    def check(self, tolerance: float = 1e-12) -> GramReport:
        """Return the orthonormality verdict for the family."""
        return GramReport(
            self.normalization,
            self.system.K_max,
            self.system.mode,
            self.max_offdiag,
            self.diag_values,
            tolerance,
        )

    def to_dataframe(self) -> pd.DataFrame:
        """Return one row per entry with columns i, j, value, lo, hi, exact."""
        rows = []
        for i, row in enumerate(self.entries, start=1):
            for j, entry in enumerate(row, start=1):
                rows.append(
                    {
                        "i": i,
                        "j": j,
                        "value": float(entry.value),
                        "lo": float(entry.lo),
                        "hi": float(entry.hi),
                        "exact": entry.is_exact,
                    }
                )
        return pd.DataFrame(rows, columns=["i", "j", "value", "lo", "hi", "exact"])

    def to_dict(self) -> dict:
        """Return the matrix with exact entries as "p/q" strings."""
        return {
            "normalization": self.normalization,
            "K_max": self.system.K_max,
            "mode": self.system.mode,
            "entries": [[scalar_to_json(e.value) for e in row] for row in self.entries],
            "upper": [[scalar_to_json(e.hi) for e in row] for row in self.entries],
        }

    def __repr__(self) -> str:
        """Return a string representation of the GramEnclosure."""
        return f"GramEnclosure({self.system}, normalization={self.normalization})"


def gram_matrix(system: CubeSystem, normalization: str = CORRECTED) -> GramEnclosure:
    """Compute the KS2 Gram matrix of Y_k = s_k / vol(B_k) chi_k.

    Args:
        system: The cube system.
        normalization: "paper" for s_k = 2^((k-1)/2) or "corrected" for s_k = 2^(k/2).

    Returns:
        The GramEnclosure, exact in geometric mode.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"Unknown normalization {normalization}, expected one of {NORMALIZATIONS}.")
    logger.info(f"Started Gram matrix for {system} with {normalization} normalization.")
    raw = indicator_gram(system)
    volumes = system.volumes
    size = system.K_max
    tail_factor = Fraction(0) if system.mode == GEOMETRIC else Fraction(1, 2**size)
    entries: List[List[Enclosure]] = [[None] * size for _ in range(size)]  # type: ignore
    for i in tqdm(range(size), desc="Gram rows", disable=size < 8):
        for j in range(i, size):
            scale = _scale_product(i + 1, j + 1, volumes, normalization)
            if raw[i][j] == 0 and tail_factor == 0:
                entry = Enclosure.exact(Fraction(0))
            else:
                value = raw[i][j] * scale if isinstance(scale, Fraction) else float(raw[i][j]) * scale
                tail = tail_factor * volumes[i] * volumes[j]
                upper = value + (tail * scale if isinstance(scale, Fraction) else float(tail) * scale)
                entry = Enclosure(value, upper, value)
            entries[i][j] = entries[j][i] = entry
    logger.info("Done. Gram matrix computed.")
    return GramEnclosure(system, normalization, entries)


class OrthoBasis:
    """An orthonormal basis e_1..e_R of the span of the cube indicators.

    e_a = sum over i of T_chi[a, i] chi_i, and equivalently sum over i of
    change_of_basis[a, i] Y_i for the chosen normalization.

    Attributes:
        system: The source cube system.
        normalization: Normalization of the family Y_k that change_of_basis refers to.
        retained: 1-based indices of the indicators that entered the basis.
        dropped: 1-based indices removed because their pivot fell below the threshold.
        pivots: The exact LDL^T pivots of the retained indicators.
        inverse_factor: The exact inverse of the unit lower factor, R x R.
        T_chi: Float coefficients of the basis in the indicators, R x K.
        exact_certificate: True if the exact factorization reproduces the Gram matrix.
        certificate_error: max |Gram(e) - I| from the exact factorization, scaled by the
            square roots of the pivots in floating point.
        float_residual: max |Gram(e) - I| with T_chi and the Gram matrix in floating point.
    """

    def __init__(
        self,
        system: CubeSystem,
        normalization: str,
        retained: List[int],
        dropped: List[int],
        pivots: List[Fraction],
        inverse_factor: List[List[Fraction]],
        raw_gram: List[List[Fraction]],
    ):
        """Initialize an OrthoBasis and compute its certificate."""
        self.system = system
        self.normalization = normalization
        self.retained = retained
        self.dropped = dropped
        self.pivots = pivots
        self.inverse_factor = inverse_factor
        self.raw_gram = raw_gram
        size, rank = system.K_max, len(retained)
        self.T_chi = np.zeros((rank, size))
        for a in range(rank):
            root = math.sqrt(float(pivots[a]))
            for b in range(a + 1):
                self.T_chi[a, retained[b] - 1] = float(inverse_factor[a][b]) / root
        self.overlaps = np.array([[float(v) for v in row] for row in system.overlap_matrix()])
        self.weights = np.array([float(w) for w in system.weights])
        self.phi = self.T_chi @ self.overlaps
        exact_gram = self._exact_basis_gram()
        self.exact_certificate = all(
            exact_gram[a][b] == (pivots[a] if a == b else 0) for a in range(rank) for b in range(rank)
        )
        self.certificate_error = max(
            (
                abs(float(exact_gram[a][b] / pivots[a]) - 1.0)
                if a == b
                else abs(float(exact_gram[a][b])) / math.sqrt(float(pivots[a] * pivots[b]))
                for a in range(rank)
                for b in range(rank)
            ),
            default=0.0,
        )
        gram = self.T_chi @ np.array([[float(v) for v in row] for row in raw_gram]) @ self.T_chi.T
        self.float_residual = float(np.max(np.abs(gram - np.eye(rank)))) if rank else 0.0

    def _exact_basis_gram(self) -> List[List[Fraction]]:
        """Return L^-1 G L^-T over the retained indicators in exact arithmetic."""
        rank = len(self.retained)
        index = [r - 1 for r in self.retained]
        result = [[Fraction(0)] * rank for _ in range(rank)]
        for a in range(rank):
            for b in range(a, rank):
                result[a][b] = result[b][a] = sum(
                    (
                        self.inverse_factor[a][p]
                        * self.raw_gram[index[p]][index[q]]
                        * self.inverse_factor[b][q]
                        for p in range(a + 1)
                        for q in range(b + 1)
                    ),
                    Fraction(0),
                )
        return result

    @property
    def size(self) -> int:
        """Return the number R of basis functions."""
        return len(self.retained)

    @property
    def change_of_basis(self) -> np.ndarray:
        """Return T with e_a = sum over i of T[a, i] Y_i."""
        scales = np.array(
            [
                math.sqrt(float(_scale_squared(k, v, self.normalization)))
                for k, v in enumerate(self.system.volumes, start=1)
            ]
        )
        return self.T_chi / scales[None, :]

    def element(self, a: int) -> "KS2Element":
        """Return the basis function e_a, 1-based."""
        if not 1 <= a <= self.size:
            raise ValueError(f"Basis index {a} outside 1..{self.size}.")
        coeffs = np.zeros(self.size)
        coeffs[a - 1] = 1.0
        return KS2Element(coeffs, self)

    def combination(self, coeffs: Sequence[float]) -> "KS2Element":
        """Return the element sum over a of coeffs[a] e_a."""
        return KS2Element(np.asarray(coeffs, dtype=float), self)

    def evaluate(self, point: Sequence[float]) -> np.ndarray:
        """Return the values e_1(x)..e_R(x); faces count as inside every cube."""
        return self.T_chi @ self.system.membership(point).astype(float)

    def to_dict(self) -> dict:
        """Return the basis with exact pivots as strings."""
        return {
            "normalization": self.normalization,
            "system": self.system.to_dict(),
            "retained": self.retained,
            "dropped": self.dropped,
            "pivots": [scalar_to_json(p) for p in self.pivots],
            "change_of_basis": self.change_of_basis.tolist(),
            "certificate_error": self.certificate_error,
            "float_residual": self.float_residual,
            "exact_certificate": self.exact_certificate,
        }

    def __repr__(self) -> str:
        """Return a string representation of the OrthoBasis."""
        return (
            f"OrthoBasis(size={self.size}, dropped={self.dropped}, "
            f"certificate_error={self.certificate_error:.2g})"
        )


def gram_schmidt_onb(
    system: CubeSystem,
    normalization: str = CORRECTED,
    pivot_tol: float = DEFAULT_PIVOT_TOL,
) -> OrthoBasis:
    """Orthonormalize the cube indicators by an exact LDL^T factorization.

    The pivot test is applied to the normalized family: indicator j is dropped when
    c_j^2 D_j < pivot_tol, with D_j its exact pivot.

    Raises:
        RankDeficiencyError: If no indicator is retained.
    """
    if system.K_max == 0:
        raise RankDeficiencyError("An empty cube system has no basis.")
    logger.info(f"Started Gram-Schmidt on {system}.")
    raw = indicator_gram(system)
    volumes = system.volumes
    retained: List[int] = []
    dropped: List[int] = []
    rows: dict = {}
    pivots: dict = {}
    for j in range(system.K_max):
        row: dict = {}
        for position, r in enumerate(retained):
            partial = raw[j][r] - sum(
                (row[q] * rows[r][q] * pivots[q] for q in retained[:position]), Fraction(0)
            )
            row[r] = partial / pivots[r]
        pivot = raw[j][j] - sum((row[r] ** 2 * pivots[r] for r in retained), Fraction(0))
        if _scale_squared(j + 1, volumes[j], normalization) * pivot < pivot_tol:
            logger.warning(f"Dropped indicator {j + 1}: pivot {float(pivot):.3g} below threshold.")
            dropped.append(j + 1)
            continue
        retained.append(j)
        rows[j] = row
        pivots[j] = pivot
    if not retained:
        raise RankDeficiencyError(f"No indicator of {system} survived the pivot test.")

    # invert the unit lower factor restricted to the retained indices
    rank = len(retained)
    factor = [
        [rows[retained[a]].get(retained[b], Fraction(0)) if b < a else Fraction(int(a == b))
         for b in range(rank)]
        for a in range(rank)
    ]
    inverse = [[Fraction(int(a == b)) for b in range(rank)] for a in range(rank)]
    for a in range(rank):
        for b in range(a):
            inverse[a][b] = -sum(
                (factor[a][c] * inverse[c][b] for c in range(b, a)), Fraction(0)
            )
    basis = OrthoBasis(
        system,
        normalization,
        [r + 1 for r in retained],
        dropped,
        [pivots[r] for r in retained],
        inverse,
        raw,
    )
    logger.info(f"Done. Basis of size {basis.size}, certificate error {basis.certificate_error:.2g}.")
    return basis


class KS2Element:
    """A finite combination of orthonormal basis functions.

    Attributes:
        coeffs: Coefficients over the basis.
        basis: The OrthoBasis the coefficients refer to.
        errors: Per-coefficient error bounds.
        partial: True if some tail contribution could not be bounded.
        provenance: basis-combination or expanded-callable.
    """

    def __init__(
        self,
        coeffs: np.ndarray,
        basis: OrthoBasis,
        errors: Optional[np.ndarray] = None,
        partial: bool = False,
        provenance: str = "basis-combination",
    ):
        """Initialize a KS2Element."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (basis.size,):
            raise ValueError(f"Expected {basis.size} coefficients, got shape {coeffs.shape}.")
        self.coeffs = coeffs
        self.basis = basis
        self.errors = np.zeros(basis.size) if errors is None else np.asarray(errors, dtype=float)
        self.partial = partial
        self.provenance = provenance

    @property
    def tail_bound(self) -> float:
        """Return the Euclidean norm of the coefficient errors."""
        return float(np.linalg.norm(self.errors))

    def _check(self, other: "KS2Element"):
        if other.basis is not self.basis:
            raise ValueError("Elements refer to different bases.")

    def __add__(self, other: "KS2Element") -> "KS2Element":
        self._check(other)
        return KS2Element(
            self.coeffs + other.coeffs,
            self.basis,
            self.errors + other.errors,
            self.partial or other.partial,
            self.provenance if self.provenance == other.provenance else "expanded-callable",
        )

    def __mul__(self, scalar: float) -> "KS2Element":
        return KS2Element(
            self.coeffs * scalar, self.basis, self.errors * abs(scalar), self.partial, self.provenance
        )

    __rmul__ = __mul__

    def __neg__(self) -> "KS2Element":
        return self * -1.0

    def __sub__(self, other: "KS2Element") -> "KS2Element":
        return self + (-other)

    def inner(self, other: "KS2Element") -> float:
        """Return the coefficient inner product."""
        self._check(other)
        return float(self.coeffs @ other.coeffs)

    def norm(self) -> float:
        """Return the Parseval norm."""
        return parseval_norm(self)

    def to_step_function(self) -> StepFunction:
        """Return the element as a combination of cube indicators."""
        weights = self.basis.T_chi.T @ self.coeffs
        return StepFunction(
            [(Fraction(float(w)), cube.box) for w, cube in zip(weights, self.basis.system.cubes)],
            self.basis.system.d,
        )

    def __call__(self, *coords):
        return self.to_step_function()(*coords)

    def to_dict(self) -> dict:
        """Return a JSON-ready representation."""
        return {
            "coeffs": self.coeffs.tolist(),
            "tail_bound": self.tail_bound,
            "partial": self.partial,
            "provenance": self.provenance,
        }

    def __repr__(self) -> str:
        """Return a string representation of the KS2Element."""
        return f"KS2Element(size={len(self.coeffs)}, norm={self.norm():.6g}, {self.provenance})"


def _as_step(f) -> Optional[StepFunction]:
    if isinstance(f, KS2Element):
        return f.to_step_function()
    if isinstance(f, CorpusFunction):
        f = f.func
    return f if isinstance(f, StepFunction) else None


def _sup_bound(f) -> Optional[Scalar]:
    step = _as_step(f)
    if step is not None:
        return step.sup_norm()
    return getattr(f, "sup_bound", None)


def _hk_bound(f) -> Optional[Scalar]:
    step = _as_step(f)
    if step is not None:
        return step.l1_norm_bound()
    bound = getattr(f, "hk_bound", None)
    if bound is None and isinstance(f, CorpusFunction):
        bound = getattr(f.func, "hk_bound", None)
    return bound


def _tail_region(system: CubeSystem) -> Box:
    # the hull of all geometric cubes after K_max
    scale, K, d = system.edge_scale, system.K_max, system.d
    return Box(
        (scale * (1 - Fraction(1, 2**K)),) + (Fraction(0),) * (d - 1),
        (scale,) + (scale / 2 ** (K + 1),) * (d - 1),
    )


def _functional_bound(f, system: CubeSystem) -> Optional[Scalar]:
    """Bound |F_k(f)| uniformly over the cubes after K_max."""
    if system.mode == GEOMETRIC:
        largest = system.alpha / 2 ** ((system.K_max + 1) * system.d)
    else:
        largest = Fraction(1)
    candidates = []
    sup = _sup_bound(f)
    if sup is not None:
        candidates.append(sup * largest)
    hk = _hk_bound(f)
    if hk is not None:
        candidates.append(hk)
    return min(candidates) if candidates else None


def _tail_bound(f, g, system: CubeSystem) -> Optional[Scalar]:
    if system.mode == GEOMETRIC:
        region = _tail_region(system)
        for h in (f, g):
            step = _as_step(h)
            if step is not None and all(
                box.intersection_volume(region) == 0 for _, box in step.terms
            ):
                return Fraction(0)
    candidates = []
    sup_f, sup_g = _sup_bound(f), _sup_bound(g)
    if sup_f is not None and sup_g is not None and system.mode == GEOMETRIC:
        measure = mu_volume(system)
        candidates.append(sup_f * sup_g * (measure.hi - measure.lo))
    bound_f, bound_g = _functional_bound(f, system), _functional_bound(g, system)
    if bound_f is not None and bound_g is not None:
        candidates.append(Fraction(1, 2**system.K_max) * bound_f * bound_g)
    return min(candidates) if candidates else None


def ks2_inner(
    f: Callable,
    g: Callable,
    system: CubeSystem,
    gauge: Optional[Gauge] = None,
    refine_levels: int = 2,
) -> Enclosure:
    """Return the KS2 inner product of f and g as an enclosure.

    The value is the sum over the system of 2^-k F_k(f) F_k(g). The enclosure is
    widened by a bound on the omitted cubes: zero for step functions that avoid them in
    geometric mode, else derived from sup or HK bounds. Without any bound the result is
    flagged partial.

    Args:
        f: A step function, KS2Element, staircase, corpus function or callable.
        g: Same as f.
        system: The cube system.
        gauge: Gauge used for plain callables.
        refine_levels: Gauge refinements for plain callables.
    """
    total = Enclosure.exact(Fraction(0))
    for k, weight in enumerate(system.weights, start=1):
        left = F_k(f, k, system, gauge, refine_levels)
        right = left if g is f else F_k(g, k, system, gauge, refine_levels)
        total = total + left * right * weight
    tail = _tail_bound(f, g, system)
    if tail is None:
        logger.warning("No tail bound available; the inner product covers the cube system only.")
        return Enclosure(total.lo, total.hi, total.value, partial=True)
    return total.widen(tail)


def expand(
    f: Callable,
    basis: OrthoBasis,
    gauge: Optional[Gauge] = None,
    refine_levels: int = 2,
) -> KS2Element:
    """Expand f in the orthonormal basis: c_a = <f, e_a>.

    Coefficients come from the cube functionals, c = Phi W F(f) with Phi = T_chi O.
    Their errors combine the enclosure widths of F_k(f) with, in diagonal mode, a bound
    on the cubes after K_max.
    """
    if isinstance(f, KS2Element) and f.basis is basis:
        return KS2Element(f.coeffs.copy(), basis, f.errors.copy(), f.partial, f.provenance)
    system = basis.system
    logger.info(f"Started expansion in a basis of size {basis.size}.")
    functionals = [
        F_k(f, k, system, gauge, refine_levels)
        for k in tqdm(range(1, system.K_max + 1), desc="Cube functionals", disable=system.K_max < 8)
    ]
    values = np.array([float(e.value) for e in functionals])
    radii = np.array([e.radius for e in functionals])
    weighted = basis.phi * basis.weights[None, :]
    coeffs = weighted @ values
    errors = np.abs(weighted) @ radii
    partial = any(e.partial for e in functionals)
    if system.mode != GEOMETRIC:
        bound = _functional_bound(f, system)
        if bound is None:
            logger.warning("No functional bound available; expansion covers the cube system only.")
            partial = True
        else:
            volumes = np.array([float(v) for v in system.volumes])
            l1 = np.abs(basis.T_chi) @ volumes
            errors = errors + 2.0**-system.K_max * float(bound) * l1
    logger.info("Done. Expansion computed.")
    return KS2Element(coeffs, basis, errors, partial, "expanded-callable")


def parseval_norm(f: KS2Element) -> float:
    """Return the square root of the sum of squared coefficients."""
    return float(np.linalg.norm(f.coeffs))


def embedding_check(
    f: Callable,
    system: CubeSystem,
    r_grid: Sequence[float] = DEFAULT_R_GRID,
    name: Optional[str] = None,
    gauge: Optional[Gauge] = None,
) -> EmbeddingReport:
    """Compare the KS2 norm of f with its HK seminorm sup over r of |integral over D(0, r)|.

    A violation is logged and recorded in the report, never raised.
    """
    inner = ks2_inner(f, f, system, gauge)
    upper = math.sqrt(max(float(inner.hi), 0.0))
    lower = math.sqrt(max(float(inner.lo), 0.0))
    target = f.func if isinstance(f, CorpusFunction) else f
    if isinstance(target, KS2Element):
        target = target.to_step_function()
    seminorm = hk_seminorm(target, r_grid, d=system.d)
    label = name or getattr(f, "name", None) or type(f).__name__
    return EmbeddingReport(label, upper, seminorm, upper - lower + 1e-12)
