"""Kernel fixtures in the kernel spec format {type, data, symmetric}.

Types:
    matrix: data is a nested list of coefficients; entries may be "p/q" strings.
    diagonal: data is the list of diagonal coefficients.
    callable-name: data names a function in KERNEL_FUNCTIONS, called with the
        coordinates x_1..x_d, y_1..y_d of a point of R^d x R^d.
    random-psd: a seeded Gram matrix B B^T / n with data {"size", "seed"}.
"""
from types import MappingProxyType
from typing import List, Tuple

import numpy as np


def _split(coords) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Split 2d coordinate arrays into the x and the y half.

    Raises:
        ValueError: If the number of coordinates is zero or odd.
    """
    if not coords or len(coords) % 2:
        raise ValueError(f"A kernel on R^d x R^d takes 2d coordinates, got {len(coords)}.")
    half = len(coords) // 2
    arrays = [np.asarray(c, dtype=float) for c in coords]
    return arrays[:half], arrays[half:]


def product_kernel(*coords):
    """The inner product x . y."""
    x, y = _split(coords)
    return sum(a * b for a, b in zip(x, y))


def gaussian_kernel(*coords):
    """exp(-|x - y|^2)."""
    x, y = _split(coords)
    return np.exp(-sum((a - b) ** 2 for a, b in zip(x, y)))


def min_kernel(*coords):
    """The product over the axes of min(x_i, y_i), the Brownian sheet covariance."""
    x, y = _split(coords)
    return np.prod([np.minimum(a, b) for a, b in zip(x, y)], axis=0)


KERNEL_FUNCTIONS = MappingProxyType(
    {
        "product": product_kernel,
        "gaussian": gaussian_kernel,
        "min": min_kernel,
    }
)


def _decay_diagonal(d: int, c: float, size: int) -> list:
    return [c**2 * 2.0 ** (-n * (2 * d + 1)) for n in range(1, size + 1)]


KERNEL_FIXTURES = MappingProxyType(
    {
        "diag21": {"type": "diagonal", "data": ["2", "1"], "symmetric": True},
        "textbook2x2": {"type": "matrix", "data": [["2", "1"], ["1", "2"]], "symmetric": True},
        "swap2x2": {"type": "matrix", "data": [["0", "1"], ["1", "0"]], "symmetric": True},
        "rank1": {"type": "matrix", "data": [["1", "0"], ["0", "0"]], "symmetric": True},
        "decay_d1": {
            "type": "diagonal",
            "data": _decay_diagonal(1, 1.0, 8),
            "symmetric": True,
            "model": {"d": 1, "c": 1.0, "a": 1.0},
        },
        "random_psd8": {"type": "random-psd", "data": {"size": 8, "seed": 7}, "symmetric": True},
        "gaussian": {"type": "callable-name", "data": "gaussian", "symmetric": True},
        "brownian": {"type": "callable-name", "data": "min", "symmetric": True},
    }
)


def load_kernel_fixture(name: str) -> dict:
    """Load a kernel spec by name.

    Raises:
        ValueError: If the name is not in the registry.
    """
    if name not in KERNEL_FIXTURES:
        raise ValueError(
            f"Unknown kernel fixture {name}. Available: {', '.join(sorted(KERNEL_FIXTURES))}."
        )
    return dict(KERNEL_FIXTURES[name])
