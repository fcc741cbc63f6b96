"""Registries of named integrands and kernel fixtures."""
from .functions import FUNCTIONS, CorpusFunction, load_function  # noqa
from .kernels import KERNEL_FIXTURES, KERNEL_FUNCTIONS, load_kernel_fixture  # noqa
