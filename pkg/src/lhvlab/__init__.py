"""Local hidden-variable models for entangled states and tools to verify them."""
from . import errors, measurements, qcore, states
from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["errors", "measurements", "qcore", "states", "KERNEL_BACKEND", "__version__"]
