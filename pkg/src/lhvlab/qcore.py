"""Dense complex linear algebra on small tensor-product spaces.

Operators carry their factor dimensions so that tensor products, partial
traces and subsystem permutations stay well defined. Everything here is
pure; random draws take an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument, InvalidDimension

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10
NORM_TOL = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)
IDENTITY_2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class Operator:
    """Square complex matrix acting on ``C^dims[0] (x) C^dims[1] (x) ...``."""

    mat: np.ndarray
    dims: tuple = field(default=None)

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidArgument(f"operator must be square, got shape {mat.shape}")
        dims = (mat.shape[0],) if self.dims is None else tuple(int(x) for x in self.dims)
        if int(np.prod(dims)) != mat.shape[0]:
            raise InvalidArgument(f"dims {dims} do not match matrix side {mat.shape[0]}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", dims)

    @property
    def side(self) -> int:
        return self.mat.shape[0]

    @property
    def n_factors(self) -> int:
        return len(self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def dag(self) -> "Operator":
        return Operator(self.mat.conj().T, self.dims)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.mat - self.mat.conj().T)) <= tol)

    def to_json(self) -> str:
        return json.dumps(operator_to_dict(self))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.mat, dtype=dtype)


class DensityMatrix(Operator):
    """Hermitian, unit-trace, positive semidefinite operator."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_hermitian():
            raise InvalidArgument("density matrix is not Hermitian")
        if abs(self.trace() - 1) > TRACE_TOL:
            raise InvalidArgument(f"density matrix has trace {self.trace().real:.3g}")
        if self.eigvalsh().min() < PSD_TOL:
            raise InvalidArgument("density matrix has a negative eigenvalue")

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)


def as_operator(op, dims=None) -> Operator:
    if isinstance(op, Operator):
        return op
    return Operator(np.asarray(op, dtype=complex), dims)


def density(mat, dims=None) -> DensityMatrix:
    """Wrap a matrix as a density matrix, symmetrizing away round-off."""
    mat = np.asarray(getattr(mat, "mat", mat), dtype=complex)
    return DensityMatrix(0.5 * (mat + mat.conj().T), dims)


def ket(entries: Sequence[complex]) -> np.ndarray:
    """Validate and return a unit ket as a 1-d complex array."""
    v = np.asarray(entries, dtype=complex).reshape(-1)
    if v.size < 2:
        raise InvalidDimension("kets need dimension at least 2")
    if abs(np.vdot(v, v).real - 1) > NORM_TOL:
        raise InvalidArgument("ket is not normalized")
    return v


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def pure_state(v: np.ndarray, dims=None) -> DensityMatrix:
    return density(projector(ket(v)), dims)


def basis_ket(d: int, i: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1
    return v


def max_entangled(d: int) -> np.ndarray:
    """``|phi_+^d> = sum_i |ii> / sqrt(d)``."""
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


def singlet() -> np.ndarray:
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def swap_operator(d: int) -> np.ndarray:
    v = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            v[j * d + i, i * d + j] = 1
    return v.astype(complex)


# -- sampling -----------------------------------------------------------------

def haar_kets(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` unitarily invariant unit kets in ``C^d`` as rows of an array."""
    if d < 2:
        raise InvalidDimension(f"haar sampling needs d >= 2, got {d}")
    # interleaved (re, im) pairs viewed as complex without a copy
    z = rng.standard_normal((n, 2 * d))
    z /= np.sqrt(np.einsum("ij,ij->i", z, z))[:, None]
    return z.view(np.complex128)


def haar_sample_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    return haar_kets(d, 1, rng)[0]


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with the phase fix of the R diagonal."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def uniform_sphere(n: int, rng: np.random.Generator, dim: int = 3) -> np.ndarray:
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


# -- tensor structure -----------------------------------------------------------

def tensor(ops: Iterable) -> Operator:
    """Kronecker product with concatenated factor dimensions."""
    ops = [as_operator(o) for o in ops]
    if not ops:
        raise InvalidArgument("tensor of an empty list")
    mat = reduce(np.kron, [o.mat for o in ops])
    dims = sum((o.dims for o in ops), ())
    return Operator(mat, dims)


def kron(*mats) -> np.ndarray:
    return reduce(np.kron, mats)


def partial_trace(rho, keep: Iterable[int], dims=None):
    """Trace out every factor not listed in ``keep``.

    Returns an object of the same kind as ``rho`` (``DensityMatrix`` in,
    ``DensityMatrix`` out) with the kept factors in ascending order.
    """
    op = as_operator(rho, dims)
    dims = op.dims
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise InvalidArgument(f"keep={keep} is not a nonempty subset of {n} factors")
    traced = [i for i in range(n) if i not in keep]
    t = op.mat.reshape(dims + dims)
    # move traced axes to the back and contract row/col pairs
    order = keep + traced
    t = t.transpose(order + [n + i for i in order])
    dk = int(np.prod([dims[i] for i in keep]))
    dt = int(np.prod([dims[i] for i in traced])) if traced else 1
    t = t.reshape(dk, dt, dk, dt)
    out = np.einsum("ajbj->ab", t)
    kdims = tuple(dims[i] for i in keep)
    if isinstance(rho, DensityMatrix):
        return density(out, kdims)
    return Operator(out, kdims)


def permute_factors(op, perm: Sequence[int]):
    """Reorder tensor factors: factor ``perm[k]`` of the input becomes factor ``k``."""
    op_ = as_operator(op)
    n = op_.n_factors
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise InvalidArgument(f"{perm} is not a permutation of {n} factors")
    t = op_.mat.reshape(op_.dims + op_.dims)
    t = t.transpose(perm + [n + p for p in perm])
    dims = tuple(op_.dims[p] for p in perm)
    side = op_.side
    out = t.reshape(side, side)
    if isinstance(op, DensityMatrix):
        return density(out, dims)
    return Operator(out, dims)


def partial_transpose(op, sys: int = 1) -> Operator:
    op = as_operator(op)
    n = op.n_factors
    t = op.mat.reshape(op.dims + op.dims)
    axes = list(range(2 * n))
    axes[sys], axes[n + sys] = axes[n + sys], axes[sys]
    return Operator(t.transpose(axes).reshape(op.side, op.side), op.dims)


def is_ppt(rho, tol: float = 1e-10) -> bool:
    """Sanity utility only: positivity of every single-factor partial transpose."""
    op = as_operator(rho)
    return all(
        np.linalg.eigvalsh(partial_transpose(op, s).mat).min() >= -tol
        for s in range(op.n_factors)
    )


def commutes_with(op, u: np.ndarray, conj_factors: Sequence[bool] | None = None) -> float:
    """Return ``max |U' rho U'^dag - rho|`` for ``U' = U (x) U ...`` (``U*`` where flagged)."""
    op = as_operator(op)
    n = op.n_factors
    flags = conj_factors or [False] * n
    big = kron(*[u.conj() if f else u for f in flags])
    return float(np.max(np.abs(big @ op.mat @ big.conj().T - op.mat)))


# -- Bloch representation ---------------------------------------------------------

def projector_from_bloch(v) -> np.ndarray:
    """``(1 + v.sigma) / 2``; a rank-one projector when ``|v| = 1``."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise InvalidArgument("Bloch vectors have three components")
    if np.linalg.norm(v) > 1 + NORM_TOL:
        raise InvalidArgument(f"Bloch vector norm {np.linalg.norm(v):.6g} exceeds 1")
    return 0.5 * (IDENTITY_2 + v[0] * PAULI_X + v[1] * PAULI_Y + v[2] * PAULI_Z)


def bloch_from_operator(op) -> np.ndarray:
    m = np.asarray(getattr(op, "mat", op), dtype=complex)
    if m.shape != (2, 2):
        raise InvalidArgument("Bloch vectors exist for qubit operators only")
    t = np.trace(m).real
    return np.array([np.trace(m @ s).real for s in PAULIS]) / t


def ket_from_bloch(v) -> np.ndarray:
    """Unit ket whose projector has Bloch vector ``v`` (global phase fixed)."""
    w, vecs = np.linalg.eigh(projector_from_bloch(v))
    k = vecs[:, np.argmax(w)]
    idx = np.argmax(np.abs(k))
    return k * (abs(k[idx]) / k[idx])


def bloch_from_kets(kets: np.ndarray) -> np.ndarray:
    """Bloch vectors of the rows of an ``(n, 2)`` ket array."""
    a, b = kets[:, 0], kets[:, 1]
    ab = np.conj(a) * b
    return np.stack([2 * ab.real, 2 * ab.imag, np.abs(a) ** 2 - np.abs(b) ** 2], axis=1)


# -- JSON -------------------------------------------------------------------------------

def operator_to_dict(op) -> dict:
    op = as_operator(op)
    return {"dims": list(op.dims), "re": op.mat.real.tolist(), "im": op.mat.imag.tolist()}


def operator_from_dict(data: dict, kind=Operator):
    mat = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    if kind is DensityMatrix:
        return density(mat, tuple(data["dims"]))
    return kind(mat, tuple(data["dims"]))


def operator_from_json(text: str, kind=Operator):
    return operator_from_dict(json.loads(text), kind)
