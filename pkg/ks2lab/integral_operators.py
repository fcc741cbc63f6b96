"""Kernels as coefficient matrices in the tensor basis e_a (x) e_b and the operators they induce.

A kernel K on R^d x R^d has coefficients A[a, b] = <K, e_a (x) e_b> in the product KS2
space. The induced operator I_K f(x) = <K(x, .), f> acts on coefficient vectors as
A @ c. Matrix input is taken as coefficients directly; step kernels are integrated
exactly; other callables go through the 2d-dimensional gauge integrator.
"""
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from tqdm import tqdm
from typing_extensions import Self

from ks2lab.corpus.kernels import KERNEL_FUNCTIONS
from ks2lab.cube_system import F_k
from ks2lab.enclosure import Enclosure, Scalar
from ks2lab.hk_integrate import Box, Gauge, hk_integrate_box
from ks2lab.ks2_space import KS2Element, OrthoBasis
from ks2lab.results.operator_results import (
    CoefficientBoundReport,
    OperatorNormReport,
    OperatorReport,
)
from ks2lab.step_functions import StepFunction

DEFAULT_TRIALS = 64


class TensorStep:
    """A finite sum of coefficient times chi_{P}(x) chi_{Q}(y) over box pairs.

    Attributes:
        terms: List of (coefficient, box_x, box_y) with exact coefficients.
        dim: The dimension of each factor.
    """

    def __init__(self, terms: Sequence[Tuple[Scalar, Box, Box]], dim: int):
        """Initialize a TensorStep."""
        self.terms = [
            (Fraction(c), bx, by) for c, bx, by in terms if Fraction(c) != 0
        ]
        for _, bx, by in self.terms:
            if bx.dim != dim or by.dim != dim:
                raise ValueError(f"Tensor factors must have dimension {dim}.")
        self.dim = dim

    @classmethod
    def outer(cls, f: StepFunction, g: StepFunction) -> Self:
        """Create f(x) g(y)."""
        if f.dim != g.dim:
            raise ValueError(f"Dimension mismatch: {f.dim} vs {g.dim}.")
        return cls(
            [(cf * cg, bf, bg) for cf, bf in f.terms for cg, bg in g.terms], f.dim
        )

    def __add__(self, other: "TensorStep") -> "TensorStep":
        return TensorStep(self.terms + other.terms, self.dim)

    def __mul__(self, scalar: Scalar) -> "TensorStep":
        return TensorStep([(Fraction(scalar) * c, bx, by) for c, bx, by in self.terms], self.dim)

    __rmul__ = __mul__

    def integrate(self, box_x: Box, box_y: Box) -> Fraction:
        """Integrate exactly over box_x x box_y."""
        return sum(
            (
                c * bx.intersection_volume(box_x) * by.intersection_volume(box_y)
                for c, bx, by in self.terms
            ),
            Fraction(0),
        )

    def __call__(self, *coords):
        """Evaluate at (x_1..x_d, y_1..y_d)."""
        if len(coords) != 2 * self.dim:
            raise ValueError(f"Expected {2 * self.dim} coordinates, got {len(coords)}.")
        x, y = coords[: self.dim], coords[self.dim :]
        total = 0.0
        for c, bx, by in self.terms:
            total = total + float(c) * StepFunction.indicator(bx)(*x) * StepFunction.indicator(by)(*y)
        return total

    def __repr__(self) -> str:
        """Return a string representation of the TensorStep."""
        return f"TensorStep(dim={self.dim}, terms={len(self.terms)})"


class TensorFunctional:
    """The functional F_{k,j}(K), the integral of K over B_k x B_j.

    Attributes:
        k: Index of the x cube.
        j: Index of the y cube.
    """

    def __init__(self, k: int, j: int):
        """Initialize a TensorFunctional."""
        if k < 1 or j < 1:
            raise ValueError(f"Cube indices start at 1, got ({k}, {j}).")
        self.k = k
        self.j = j

    def __call__(
        self,
        kernel: Union[TensorStep, Callable],
        basis: OrthoBasis,
        gauge: Optional[Gauge] = None,
        refine_levels: int = 2,
    ) -> Enclosure:
        """Evaluate the functional on a kernel."""
        system = basis.system
        if max(self.k, self.j) > system.K_max:
            raise ValueError(f"Indices ({self.k}, {self.j}) exceed K_max={system.K_max}.")
        box_x, box_y = system.cube(self.k).box, system.cube(self.j).box
        if isinstance(kernel, TensorStep):
            return Enclosure.exact(kernel.integrate(box_x, box_y))
        product = Box(box_x.lo + box_y.lo, box_x.hi + box_y.hi)
        gauge = gauge or Gauge.constant(float(min(product.edges)) / 16)
        return hk_integrate_box(kernel, product, gauge, refine_levels, max_dim=2 * system.d).enclosure

    def __repr__(self) -> str:
        """Return a string representation of the TensorFunctional."""
        return f"TensorFunctional({self.k}, {self.j})"


class KernelCoefficients:
    """The coefficient matrix A[a, b] = <K, e_a (x) e_b> of a kernel.

    Usage example:

    ```python
    from ks2lab.integral_operators import KernelCoefficients

    kernel = KernelCoefficients([[2.0, 1.0], [1.0, 2.0]])
    kernel.frobenius  # 3.1622...
    ```

    Attributes:
        A: The coefficient matrix.
        symmetric: True if A equals its transpose exactly.
        errors: Entrywise error bounds (zero for matrix input).
        name: Name used in reports.
    """

    def __init__(
        self,
        A: Sequence[Sequence[Scalar]],
        symmetric: Optional[bool] = None,
        errors: Optional[np.ndarray] = None,
        name: str = "kernel",
    ):
        """Initialize KernelCoefficients.

        Raises:
            ValueError: If A is not square, or symmetric is True for a non-symmetric A.
        """
        if len(A) == 0:
            A = np.zeros((0, 0))
        else:
            A = np.array([[float(Fraction(v)) for v in row] for row in A], dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"Kernel coefficients must be square, got shape {A.shape}.")
        exact_symmetric = bool(np.array_equal(A, A.T))
        if symmetric and not exact_symmetric:
            raise ValueError("Matrix is flagged symmetric but differs from its transpose.")
        self.A = A
        self.symmetric = exact_symmetric if symmetric is None else bool(symmetric)
        self.errors = np.zeros(A.shape) if errors is None else np.asarray(errors, dtype=float)
        self.name = name
        self._frobenius: Optional[float] = None

    @classmethod
    def from_spec(cls, spec: dict, basis: Optional[OrthoBasis] = None, name: str = "kernel") -> Self:
        """Create coefficients from a kernel spec {type, data, symmetric}.

        Raises:
            ValueError: If the type is unknown, or a callable kernel comes without a basis.
        """
        kind, data = spec.get("type"), spec.get("data")
        symmetric = spec.get("symmetric")
        if kind == "matrix":
            return cls(data, symmetric, name=name)
        if kind == "diagonal":
            values = [Fraction(v) for v in data]
            matrix = [[v if i == j else 0 for j in range(len(values))] for i, v in enumerate(values)]
            return cls(matrix, symmetric, name=name)
        if kind == "random-psd":
            rng = np.random.default_rng(data["seed"])
            factor = rng.standard_normal((data["size"], data["size"]))
            gram = factor @ factor.T / data["size"]
            return cls((gram + gram.T) / 2, True, name=name)
        if kind == "callable-name":
            if basis is None:
                raise ValueError("A callable kernel needs a basis to be ingested.")
            if data not in KERNEL_FUNCTIONS:
                raise ValueError(f"Unknown kernel function {data}.")
            coefficients = kernel_coefficients(KERNEL_FUNCTIONS[data], basis, symmetric=symmetric)
            coefficients.name = name
            return coefficients
        raise ValueError(f"Unknown kernel spec type {kind}.")

    @property
    def size(self) -> int:
        """Return the dimension of A."""
        return self.A.shape[0]

    @property
    def frobenius(self) -> float:
        """Return the KS2 norm of the kernel, the Frobenius norm of A."""
        if self._frobenius is None:
            self._frobenius = float(np.sqrt(np.sum(self.A**2)))
        return self._frobenius

    def evaluate(self, x: Sequence[float], y: Sequence[float], basis: OrthoBasis) -> float:
        """Synthesize K(x, y) = sum A[a, b] e_a(x) e_b(y)."""
        self._check_basis(basis)
        return float(basis.evaluate(x) @ self.A @ basis.evaluate(y))

    def _check_basis(self, basis: OrthoBasis):
        if basis.size != self.size:
            raise ValueError(f"Kernel of size {self.size} does not fit a basis of size {basis.size}.")

    def to_dict(self) -> dict:
        """Return the kernel as a matrix spec."""
        return {"type": "matrix", "data": self.A.tolist(), "symmetric": self.symmetric}

    def __repr__(self) -> str:
        """Return a string representation of the KernelCoefficients."""
        return f"KernelCoefficients({self.name}, size={self.size}, symmetric={self.symmetric})"


def _functional_matrix(
    kernel: Union[TensorStep, Callable],
    basis: OrthoBasis,
    gauge: Optional[Gauge],
    refine_levels: int,
) -> Tuple[np.ndarray, np.ndarray]:
    size = basis.system.K_max
    values = np.zeros((size, size))
    radii = np.zeros((size, size))
    for k in tqdm(range(1, size + 1), desc="Tensor functionals", disable=size < 8):
        for j in range(1, size + 1):
            enclosure = TensorFunctional(k, j)(kernel, basis, gauge, refine_levels)
            values[k - 1, j - 1] = float(enclosure.value)
            radii[k - 1, j - 1] = enclosure.radius
    return values, radii


def kernel_coefficients(
    K_input: Union[KernelCoefficients, np.ndarray, Sequence, TensorStep, Callable],
    basis: OrthoBasis,
    gauge: Optional[Gauge] = None,
    refine_levels: int = 2,
    symmetric: Optional[bool] = None,
) -> KernelCoefficients:
    """Ingest a kernel as coefficients in the tensor basis.

    For functions, A = (Phi W) F (Phi W)^T where F[k, j] = F_{k,j}(K), W = diag(2^-k) and
    Phi[a, k] = F_k(e_a). Matrices are taken as coefficients.

    Args:
        K_input: Coefficients, a TensorStep, or a callable K(x_1..x_d, y_1..y_d).
        basis: The orthonormal basis.
        gauge: Gauge for callable kernels on the product cubes.
        refine_levels: Gauge refinements for callable kernels.
        symmetric: Force the symmetry flag; computed coefficients are then symmetrized.
    """
    if isinstance(K_input, KernelCoefficients):
        K_input._check_basis(basis)
        return K_input
    if not callable(K_input):
        coefficients = KernelCoefficients(K_input, symmetric)
        coefficients._check_basis(basis)
        return coefficients
    logger.info(f"Started kernel ingestion on {basis.system}.")
    values, radii = _functional_matrix(K_input, basis, gauge, refine_levels)
    weighted = basis.phi * basis.weights[None, :]
    A = weighted @ values @ weighted.T
    errors = np.abs(weighted) @ radii @ np.abs(weighted).T
    if symmetric:
        A = (A + A.T) / 2
    logger.info("Done. Kernel coefficients computed.")
    return KernelCoefficients(A, symmetric, errors)


def tensor_coeff(
    K_input: Union[KernelCoefficients, np.ndarray, Sequence, TensorStep, Callable],
    k: int,
    j: int,
    basis: OrthoBasis,
    gauge: Optional[Gauge] = None,
) -> Enclosure:
    """Return the coefficient <K, e_k (x) e_j> with 1-based indices."""
    coefficients = kernel_coefficients(K_input, basis, gauge)
    if not (1 <= k <= coefficients.size and 1 <= j <= coefficients.size):
        raise ValueError(f"Indices ({k}, {j}) outside 1..{coefficients.size}.")
    return Enclosure.around(
        coefficients.A[k - 1, j - 1], float(coefficients.errors[k - 1, j - 1])
    )


def kernel_from_coefficients(A: KernelCoefficients, basis: OrthoBasis) -> TensorStep:
    """Return sum A[a, b] e_a (x) e_b as an exact tensor step kernel."""
    A._check_basis(basis)
    weights = basis.T_chi.T @ A.A @ basis.T_chi
    cubes = basis.system.cubes
    return TensorStep(
        [
            (Fraction(float(weights[p, q])), cubes[p].box, cubes[q].box)
            for p in range(len(cubes))
            for q in range(len(cubes))
        ],
        basis.system.d,
    )


def apply_operator(A: KernelCoefficients, f: KS2Element) -> KS2Element:
    """Apply I_K: the output coefficients are A @ f.coeffs."""
    A._check_basis(f.basis)
    return KS2Element(
        A.A @ f.coeffs,
        f.basis,
        np.abs(A.A) @ f.errors + A.errors @ np.abs(f.coeffs),
        f.partial,
        f.provenance,
    )


def brute_force_apply(A: KernelCoefficients, f: KS2Element) -> np.ndarray:
    """Coefficients of I_K f from cube functionals only, as an independent oracle.

    Computes <I_K f, e_a> = sum over p, q of 2^-p F_p(e_a) 2^-q F_{p,q}(K) F_q(f), with
    the kernel synthesized as a tensor step function.
    """
    basis = f.basis
    system = basis.system
    kernel = kernel_from_coefficients(A, basis)
    size = system.K_max
    weights = [float(w) for w in system.weights]
    functionals = np.zeros((size, size))
    for p in range(size):
        for q in range(size):
            functionals[p, q] = float(kernel.integrate(system.cube(p + 1).box, system.cube(q + 1).box))
    f_values = np.array([float(F_k(f, q, system).value) for q in range(1, size + 1)])
    out = np.zeros(basis.size)
    for a in range(basis.size):
        element = basis.element(a + 1)
        total = 0.0
        for p in range(size):
            e_value = float(F_k(element, p + 1, system).value)
            if e_value == 0:
                continue
            inner = sum(weights[q] * functionals[p, q] * f_values[q] for q in range(size))
            total += weights[p] * e_value * inner
        out[a] = total
    return out


def random_unit_element(basis: OrthoBasis, rng: np.random.Generator) -> KS2Element:
    """Draw a uniformly distributed unit vector of the basis span."""
    direction = rng.standard_normal(basis.size)
    return basis.combination(direction / np.linalg.norm(direction))


def operator_norm_bound(
    A: KernelCoefficients, trials: int = DEFAULT_TRIALS, seed: Optional[int] = None
) -> OperatorNormReport:
    """Compare max ||A f|| over random unit f with the Frobenius norm of A.

    Every trial draws from its own stream spawned from the seed.
    """
    if trials < 1:
        raise ValueError(f"Number of trials must be positive, got {trials}.")
    best = 0.0
    for stream in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(stream)
        direction = rng.standard_normal(A.size)
        direction /= np.linalg.norm(direction)
        best = max(best, float(np.linalg.norm(A.A @ direction)))
    spectral = float(np.linalg.norm(A.A, 2)) if A.size else 0.0
    return OperatorNormReport(best, A.frobenius, spectral, trials, seed)


def self_adjointness_residual(A: KernelCoefficients, f: KS2Element, g: KS2Element) -> float:
    """Return |<A f, g> - <f, A g>|."""
    if not A.symmetric:
        logger.warning(f"{A.name} is not symmetric; the residual measures its asymmetry.")
    A._check_basis(f.basis)
    return abs(float((A.A @ f.coeffs) @ g.coeffs - f.coeffs @ (A.A @ g.coeffs)))


def compactness_profile(A: KernelCoefficients) -> List[float]:
    """Return, for m = 1..K, the Frobenius norm of A outside its leading m x m block."""
    total = np.sum(A.A**2)
    profile = []
    for m in range(1, A.size + 1):
        rest = total - np.sum(A.A[:m, :m] ** 2)
        profile.append(float(np.sqrt(max(rest, 0.0))))
    return profile


def random_symmetric_kernel(size: int, rng: np.random.Generator) -> KernelCoefficients:
    """Draw a symmetric coefficient matrix with standard normal entries."""
    if size < 1:
        raise ValueError(f"Size must be positive, got {size}.")
    draw = rng.standard_normal((size, size))
    return KernelCoefficients((draw + draw.T) / 2, True, name=f"random{size}")


def coefficient_bound_check(A: KernelCoefficients, f: KS2Element) -> CoefficientBoundReport:
    """Check that the coefficients of I_K f satisfy sum c_k^2 <= ||K||^2 ||f||^2."""
    image = apply_operator(A, f)
    energy = float(image.coeffs @ image.coeffs)
    bound = A.frobenius**2 * float(f.coeffs @ f.coeffs)
    return CoefficientBoundReport(energy, bound * (1 + 1e-12))


def operator_batch(
    A: KernelCoefficients,
    basis: OrthoBasis,
    trials: int = DEFAULT_TRIALS,
    seed: Optional[int] = None,
    brute_force_trials: int = 4,
) -> OperatorReport:
    """Run all operator checks on a kernel with seeded random elements."""
    A._check_basis(basis)
    logger.info(f"Started operator batch for {A.name} with {trials} trials.")
    norm = operator_norm_bound(A, trials, seed)
    residuals, brute, bounds = [], [], []
    streams = np.random.SeedSequence(seed).spawn(trials)
    for index, stream in enumerate(tqdm(streams, desc="Operator trials", disable=trials < 16)):
        rng = np.random.default_rng(stream)
        f, g = random_unit_element(basis, rng), random_unit_element(basis, rng)
        residuals.append(self_adjointness_residual(A, f, g))
        bounds.append(coefficient_bound_check(A, f))
        if index < brute_force_trials:
            brute.append(float(np.max(np.abs(brute_force_apply(A, f) - apply_operator(A, f).coeffs))))
    logger.info("Done. Operator batch finished.")
    return OperatorReport(
        A.name,
        A.size,
        A.symmetric,
        norm,
        residuals,
        brute,
        bounds,
        compactness_profile(A),
        seed,
    )
