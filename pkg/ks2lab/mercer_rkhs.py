"""Spectral decomposition of kernel coefficients, Mercer sums and the RKHS of a kernel.

With A = V diag(lambda) V^T, the eigenfunctions are k_n = sum over j of V[j, n] e_j
and K(x, y) = sum over n of lambda_n k_n(x) k_n(y). The RKHS H_K consists of the
sums of c_n sqrt(lambda_n) k_n with (c_n) square summable, and <f, g>_K = sum c_n d_n.
Directions with lambda_n = 0 carry no RKHS coordinate.
"""
import math
from typing import List, Optional, Sequence, Union

import numpy as np
from loguru import logger
from tqdm import tqdm

from ks2lab.exceptions import ConvergenceError
from ks2lab.integral_operators import KernelCoefficients
from ks2lab.ks2_space import KS2Element, OrthoBasis
from ks2lab.results.mercer_results import (
    DiagDominationReport,
    IotaNormReport,
    MercerReport,
    PointwiseBoundReport,
)

DEFAULT_JACOBI_TOL = 1e-13
MAX_SWEEPS = 100
MAX_SIZE = 64


class EigenSystem:
    """Eigenvalues in nonincreasing order with orthonormal eigenvector columns.

    Attributes:
        eigenvalues: lambda_1 >= lambda_2 >= ...
        eigenvectors: Orthogonal matrix; column n holds the basis coefficients of k_n.
        tol: Tolerance used to classify eigenvalues as negative or zero.
        sweeps: Number of Jacobi sweeps used.
    """

    def __init__(
        self,
        eigenvalues: np.ndarray,
        eigenvectors: np.ndarray,
        tol: float = DEFAULT_JACOBI_TOL,
        sweeps: int = 0,
    ):
        """Initialize an EigenSystem."""
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.eigenvectors = np.asarray(eigenvectors, dtype=float)
        if self.eigenvectors.shape != (len(self.eigenvalues),) * 2:
            raise ValueError("Eigenvector matrix must be square and match the eigenvalues.")
        self.tol = tol
        self.sweeps = sweeps

    @property
    def size(self) -> int:
        """Return the number of eigenpairs."""
        return len(self.eigenvalues)

    @property
    def negatives_present(self) -> bool:
        """True if some eigenvalue is below -tol."""
        return bool(np.any(self.eigenvalues < -self.tol))

    @property
    def positive(self) -> np.ndarray:
        """Return a mask of the eigenvalues above tol."""
        return self.eigenvalues > self.tol

    @property
    def orthogonality_error(self) -> float:
        """Return max |V^T V - I|."""
        gram = self.eigenvectors.T @ self.eigenvectors
        return float(np.max(np.abs(gram - np.eye(self.size)))) if self.size else 0.0

    def eigenfunctions_at(self, point: Sequence[float], basis: OrthoBasis) -> np.ndarray:
        """Return k_1(x)..k_K(x)."""
        if basis.size != self.size:
            raise ValueError(f"Eigen system of size {self.size} does not fit basis size {basis.size}.")
        return self.eigenvectors.T @ basis.evaluate(point)

    def to_dict(self) -> dict:
        """Return {eigenvalues, eigenvectors, negatives_present}."""
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenvectors": self.eigenvectors.tolist(),
            "negatives_present": self.negatives_present,
        }

    def __repr__(self) -> str:
        """Return a string representation of the EigenSystem."""
        return f"EigenSystem(size={self.size}, negatives_present={self.negatives_present})"


def _rotate(A: np.ndarray, V: np.ndarray, p: int, q: int):
    # symmetric 2x2 Schur decomposition zeroing A[p, q]
    tau = (A[q, q] - A[p, p]) / (2 * A[p, q])
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1 + tau * tau))
    c = 1 / math.sqrt(1 + t * t)
    s = t * c
    col_p, col_q = A[:, p].copy(), A[:, q].copy()
    A[:, p] = c * col_p - s * col_q
    A[:, q] = s * col_p + c * col_q
    row_p, row_q = A[p, :].copy(), A[q, :].copy()
    A[p, :] = c * row_p - s * row_q
    A[q, :] = s * row_p + c * row_q
    A[p, q] = A[q, p] = 0.0
    vec_p, vec_q = V[:, p].copy(), V[:, q].copy()
    V[:, p] = c * vec_p - s * vec_q
    V[:, q] = s * vec_p + c * vec_q


def _off_norm(A: np.ndarray) -> float:
    return float(np.sqrt(np.sum(A**2) - np.sum(np.diag(A) ** 2)))


def eigendecompose(
    A: Union[KernelCoefficients, np.ndarray], tol: float = DEFAULT_JACOBI_TOL
) -> EigenSystem:
    """Diagonalize a symmetric matrix by cyclic Jacobi rotations.

    Sweeps run until the off-diagonal Frobenius norm is at most tol max(1, ||A||_F).
    Eigenvalues are sorted in nonincreasing order and every eigenvector is signed so
    that its first nonzero entry is positive.

    Raises:
        ValueError: If the matrix is not symmetric or too large.
        ConvergenceError: If the sweeps do not converge.
    """
    matrix = np.array(A.A if isinstance(A, KernelCoefficients) else A, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Matrix must be square, got shape {matrix.shape}.")
    if not np.array_equal(matrix, matrix.T):
        raise ValueError("Jacobi diagonalization needs a symmetric matrix.")
    size = matrix.shape[0]
    if size > MAX_SIZE:
        raise ValueError(f"Matrix size {size} exceeds the supported {MAX_SIZE}.")
    V = np.eye(size)
    threshold = tol * max(1.0, float(np.linalg.norm(matrix)))
    sweeps = 0
    while _off_norm(matrix) > threshold:
        if sweeps == MAX_SWEEPS:
            raise ConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps.")
        for p in range(size):
            for q in range(p + 1, size):
                if matrix[p, q] != 0:
                    _rotate(matrix, V, p, q)
        sweeps += 1
    eigenvalues = np.diag(matrix).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues, V = eigenvalues[order], V[:, order]
    for n in range(size):
        nonzero = np.flatnonzero(np.abs(V[:, n]) > 1e-14)
        if len(nonzero) and V[nonzero[0], n] < 0:
            V[:, n] = -V[:, n]
    system = EigenSystem(eigenvalues, V, tol, sweeps)
    if system.negatives_present:
        logger.warning(f"Kernel is not positive semidefinite: smallest eigenvalue {eigenvalues[-1]:.3g}.")
    return system


def mercer_reconstruct(E: EigenSystem, n_terms: Optional[int] = None) -> KernelCoefficients:
    """Return the sum of the first n_terms of lambda_n k_n (x) k_n."""
    n_terms = E.size if n_terms is None else n_terms
    if not 0 <= n_terms <= E.size:
        raise ValueError(f"n_terms must lie in 0..{E.size}, got {n_terms}.")
    vectors = E.eigenvectors[:, :n_terms]
    matrix = vectors @ np.diag(E.eigenvalues[:n_terms]) @ vectors.T
    return KernelCoefficients((matrix + matrix.T) / 2, True, name=f"mercer{n_terms}")


class RKHSElement:
    """An element sum of c_n sqrt(lambda_n) k_n of the RKHS of a kernel.

    Attributes:
        coeffs: The coefficients c_n; zero wherever lambda_n is not positive.
        eigen: The EigenSystem the coefficients refer to.
        dropped: Indices (1-based) of coordinates removed because lambda_n = 0.
        outside: True for a point evaluator at a point outside every cube.
    """

    def __init__(
        self,
        coeffs: Sequence[float],
        eigen: EigenSystem,
        dropped: Sequence[int] = (),
        outside: bool = False,
    ):
        """Initialize an RKHSElement.

        Raises:
            ValueError: If a coefficient sits on a direction with lambda_n <= tol.
        """
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (eigen.size,):
            raise ValueError(f"Expected {eigen.size} coefficients, got shape {coeffs.shape}.")
        if np.any(coeffs[~eigen.positive] != 0):
            raise ValueError("RKHS coordinates exist only for positive eigenvalues.")
        self.coeffs = coeffs
        self.eigen = eigen
        self.dropped = list(dropped)
        self.outside = outside

    def norm(self) -> float:
        """Return ||f||_K."""
        return float(np.linalg.norm(self.coeffs))

    def ks2_coefficients(self) -> np.ndarray:
        """Return the coefficients of the function in the orthonormal KS2 basis."""
        root = np.sqrt(np.clip(self.eigen.eigenvalues, 0.0, None))
        return self.eigen.eigenvectors @ (self.coeffs * root)

    def __call__(self, point: Sequence[float], basis: OrthoBasis) -> float:
        """Evaluate by direct synthesis in the orthonormal basis."""
        return float(self.ks2_coefficients() @ basis.evaluate(point))

    def __repr__(self) -> str:
        """Return a string representation of the RKHSElement."""
        return f"RKHSElement(size={len(self.coeffs)}, norm={self.norm():.6g})"


def rkhs_inner(f: RKHSElement, g: RKHSElement) -> float:
    """Return <f, g>_K = sum c_n d_n.

    Raises:
        ValueError: If the elements refer to different eigen systems.
    """
    if f.eigen is not g.eigen:
        raise ValueError("RKHS elements refer to different eigen systems.")
    return float(f.coeffs @ g.coeffs)


def _require_nonnegative(E: EigenSystem):
    if E.negatives_present:
        raise ValueError(
            f"Negative eigenvalue {E.eigenvalues.min():.3g}: the kernel has no RKHS of this form."
        )


def point_evaluator(E: EigenSystem, x: Sequence[float], basis: OrthoBasis) -> RKHSElement:
    """Return K(x, .) as an RKHS element, with coefficients sqrt(lambda_n) k_n(x).

    A point outside every cube gives the zero element with the outside flag set.

    Raises:
        ValueError: If the eigen system has a negative eigenvalue.
    """
    _require_nonnegative(E)
    if not basis.system.membership(x).any():
        return RKHSElement(np.zeros(E.size), E, outside=True)
    values = E.eigenfunctions_at(x, basis)
    root = np.sqrt(np.clip(E.eigenvalues, 0.0, None))
    return RKHSElement(np.where(E.positive, root * values, 0.0), E)


def kernel_value(E: EigenSystem, x: Sequence[float], y: Sequence[float], basis: OrthoBasis) -> float:
    """Return K(x, y) = sum lambda_n k_n(x) k_n(y)."""
    return float(
        np.sum(E.eigenvalues * E.eigenfunctions_at(x, basis) * E.eigenfunctions_at(y, basis))
    )


def reproducing_residual(f: RKHSElement, x: Sequence[float], basis: OrthoBasis) -> float:
    """Return |<f, K(x, .)>_K - f(x)| with f(x) synthesized directly."""
    evaluator = point_evaluator(f.eigen, x, basis)
    return abs(rkhs_inner(f, evaluator) - f(x, basis))


def pd_check(
    kernel: Union[EigenSystem, KernelCoefficients],
    points: Sequence[Sequence[float]],
    weights: Sequence[float],
    basis: OrthoBasis,
) -> float:
    """Return the quadratic form sum w_i w_j K(x_i, x_j); values below -1e-10 are logged."""
    if len(points) != len(weights):
        raise ValueError(f"Got {len(points)} points but {len(weights)} weights.")
    if isinstance(kernel, EigenSystem):
        features = np.array([kernel.eigenfunctions_at(x, basis) for x in points]).reshape(
            len(points), kernel.size
        )
        gram = features @ np.diag(kernel.eigenvalues) @ features.T
    else:
        values = np.array([basis.evaluate(x) for x in points]).reshape(len(points), basis.size)
        gram = values @ kernel.A @ values.T
    w = np.asarray(weights, dtype=float)
    form = float(w @ gram @ w)
    if form < -1e-10:
        logger.warning(f"Kernel is not positive definite: quadratic form {form:.3g}.")
    return form


def diag_domination_check(
    E: EigenSystem, x: Sequence[float], y: Sequence[float], basis: OrthoBasis
) -> DiagDominationReport:
    """Evaluate |K(x,y)| against K(x,x) and K(y,y) in squared and unsquared form."""
    return DiagDominationReport(
        kernel_value(E, x, y, basis), kernel_value(E, x, x, basis), kernel_value(E, y, y, basis)
    )


def multiplier_jK(f: KS2Element, E: EigenSystem) -> RKHSElement:
    """Map sum a_n k_n in KS2 to sum a_n sqrt(lambda_n) k_n in the RKHS.

    The RKHS coefficients are a = V^T f.coeffs. Coordinates with lambda_n = 0 are dropped
    and recorded; the map is an isometry when every lambda_n is positive.

    Raises:
        ValueError: If the eigen system has a negative eigenvalue.
    """
    _require_nonnegative(E)
    if f.basis.size != E.size:
        raise ValueError(f"Element of size {f.basis.size} does not fit eigen system size {E.size}.")
    a = E.eigenvectors.T @ f.coeffs
    lost = ~E.positive & (np.abs(a) > 0)
    dropped = [int(n) + 1 for n in np.flatnonzero(lost)]
    if dropped:
        logger.warning(f"Dropped coordinates {dropped} on zero eigenvalues.")
    return RKHSElement(np.where(E.positive, a, 0.0), E, dropped)


def iota_embed(f: RKHSElement, basis: OrthoBasis) -> KS2Element:
    """Return the RKHS element as an element of KS2."""
    return basis.combination(f.ks2_coefficients())


class DecayModel:
    """Eigenvalues lambda_n = c^2 2^(-n(2d+1)) with the two-sided decay constants c and a.

    Attributes:
        d: The dimension.
        c: Upper constant, lambda_n <= c^2 2^(-n(2d+1)).
        a: Lower constant, lambda_n >= 1 / (a 2^(n(2d+1))).
    """

    def __init__(self, d: int, c: float, a: float):
        """Initialize a DecayModel."""
        if d < 1 or c <= 0 or a <= 0:
            raise ValueError(f"Need d >= 1, c > 0 and a > 0, got d={d}, c={c}, a={a}.")
        self.d = d
        self.c = float(c)
        self.a = float(a)

    def is_consistent(self) -> bool:
        """True if a c^2 >= 1, so that the generated eigenvalues respect both bounds."""
        return self.a * self.c**2 >= 1

    def eigenvalues(self, n: int) -> np.ndarray:
        """Return lambda_1..lambda_n."""
        exponent = 2 * self.d + 1
        return np.array([self.c**2 * 2.0 ** (-k * exponent) for k in range(1, n + 1)])

    def kernel_matrix(self, n: int) -> KernelCoefficients:
        """Return the diagonal kernel with the first n eigenvalues."""
        return KernelCoefficients(np.diag(self.eigenvalues(n)), True, name=f"decay_d{self.d}")

    @property
    def iota_bound(self) -> float:
        """Return c 2^(-(2d+1)/2)."""
        return self.c * 2.0 ** (-(2 * self.d + 1) / 2)

    def to_dict(self) -> dict:
        """Return {d, c, a}."""
        return {"d": self.d, "c": self.c, "a": self.a}

    def __repr__(self) -> str:
        """Return a string representation of the DecayModel."""
        return f"DecayModel(d={self.d}, c={self.c}, a={self.a})"


def iota_norm_bound(E: EigenSystem, model: DecayModel) -> IotaNormReport:
    """Compare the norm sup sqrt(lambda_n) of the RKHS embedding with the model bound."""
    positive = np.clip(E.eigenvalues, 0.0, None)
    supremum = float(np.sqrt(positive.max())) if E.size else 0.0
    return IotaNormReport(supremum, model.iota_bound)


def pointwise_bound_check(
    f: RKHSElement, x: Sequence[float], y: Sequence[float], basis: OrthoBasis
) -> PointwiseBoundReport:
    """Check |f(x)| <= ||f|| sqrt(K(x,x)) and |f(x)-f(y)| <= ||f|| sqrt(K(x,x)+K(y,y)-2K(x,y))."""
    E = f.eigen
    kxx, kyy, kxy = (
        kernel_value(E, x, x, basis),
        kernel_value(E, y, y, basis),
        kernel_value(E, x, y, basis),
    )
    norm = f.norm()
    value_x, value_y = f(x, basis), f(y, basis)
    return PointwiseBoundReport(
        value_x,
        norm * math.sqrt(max(kxx, 0.0)),
        value_x - value_y,
        norm * math.sqrt(max(kxx + kyy - 2 * kxy, 0.0)),
    )


def random_points(basis: OrthoBasis, count: int, rng: np.random.Generator) -> List[tuple]:
    """Draw points uniformly from randomly chosen cubes of the basis system."""
    cubes = basis.system.cubes
    points = []
    for _ in range(count):
        lo, hi = cubes[rng.integers(len(cubes))].box.as_arrays()
        points.append(tuple(rng.uniform(lo, hi)))
    return points


def mercer_batch(
    A: KernelCoefficients,
    basis: OrthoBasis,
    seed: Optional[int] = None,
    n_points: int = 16,
    tol: float = DEFAULT_JACOBI_TOL,
) -> MercerReport:
    """Decompose a kernel and run the spectral and RKHS checks at random points."""
    logger.info(f"Started Mercer checks for {A.name}.")
    E = eigendecompose(A, tol)
    reconstruction = float(np.linalg.norm(mercer_reconstruct(E).A - A.A))
    trace_error = abs(float(np.sum(E.eigenvalues) - np.trace(A.A)))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    points = random_points(basis, n_points, rng)
    diagonal_error = max(
        abs(kernel_value(E, x, x, basis) - A.evaluate(x, x, basis)) for x in points
    )
    pd_minimum = min(
        pd_check(E, points, rng.standard_normal(len(points)), basis) for _ in range(8)
    )
    domination = [
        diag_domination_check(E, x, y, basis)
        for x, y in tqdm(list(zip(points, points[1:])), desc="Point pairs", disable=n_points < 32)
    ]
    residual = None
    if not E.negatives_present:
        f = RKHSElement(np.where(E.positive, rng.standard_normal(E.size), 0.0), E)
        residual = max(reproducing_residual(f, x, basis) for x in points)
    logger.info("Done. Mercer checks finished.")
    return MercerReport(
        A.name,
        E.to_dict(),
        E.orthogonality_error,
        reconstruction,
        trace_error,
        diagonal_error,
        residual,
        pd_minimum,
        domination,
        seed,
    )
