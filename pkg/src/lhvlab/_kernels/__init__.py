"""Hot loops of the Monte-Carlo drivers.

The compiled extension is used when it was built; otherwise, or when
``LHVLAB_PURE_PYTHON`` is set to a non-empty value other than ``0``, the
numpy implementations are used. Both expose the same functions.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

KERNEL_NAMES = (
    "abs2_overlaps",
    "sample_categorical",
    "argext_onehot",
    "joint_histogram",
    "simplex_moments",
)


def _want_pure() -> bool:
    return os.environ.get("LHVLAB_PURE_PYTHON", "") not in ("", "0")


def load_backend(name: str) -> ModuleType:
    """Return the kernel module called ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels  # noqa: PLC0415

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list[str]:
    out = ["python"]
    try:
        load_backend("cython")
    except ImportError:
        pass
    else:
        out.insert(0, "cython")
    return out


if _want_pure():
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        _impl = load_backend("cython")
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

abs2_overlaps = _impl.abs2_overlaps
sample_categorical = _impl.sample_categorical
argext_onehot = _impl.argext_onehot
joint_histogram = _impl.joint_histogram
simplex_moments = _impl.simplex_moments
