"""Projective and generalized measurements in fine-grained (rank-one) form.

Every measurement is stored as a list of effects ``eta_i |v_i><v_i|`` plus a
grouping map that sends each effect to the coarse outcome it belongs to.
Models act on the effects; statistics are reported per coarse outcome.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import qcore
from .errors import InvalidArgument, InvalidChannel, InvalidDimension, InvalidMeasurement

COMPLETENESS_TOL = 1e-10
EIGEN_CUTOFF = 1e-12


class Effect(NamedTuple):
    weight: float
    vector: np.ndarray
    label: int

    @property
    def projector(self) -> np.ndarray:
        return qcore.projector(self.vector)


@dataclass(frozen=True, eq=False)
class Measurement:
    """Rank-one fine-grained POVM.

    Attributes
    ----------
    vectors : ndarray, shape (k, d)
        Unit kets; row ``i`` spans the range of effect ``i``.
    weights : ndarray, shape (k,)
        Effect weights ``eta_i`` in (0, 1].
    groups : ndarray of int, shape (k,)
        Coarse outcome of each effect.
    projective : bool
        Effects are orthonormal with unit weight.
    """

    vectors: np.ndarray
    weights: np.ndarray
    groups: np.ndarray
    projective: bool

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        w = np.array(self.weights, dtype=float)
        g = np.array(self.groups, dtype=np.int64)
        for arr in (v, w, g):
            arr.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "groups", g)

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    @property
    def n_effects(self) -> int:
        return self.vectors.shape[0]

    @property
    def n_outcomes(self) -> int:
        return int(self.groups.max()) + 1

    @property
    def effects(self) -> list[Effect]:
        return [Effect(float(w), v, int(g)) for w, v, g in zip(self.weights, self.vectors, self.groups)]

    def projectors(self) -> np.ndarray:
        """Rank-one projectors, shape (k, d, d)."""
        return np.einsum("ki,kj->kij", self.vectors, self.vectors.conj())

    def fine_elements(self) -> np.ndarray:
        return self.weights[:, None, None] * self.projectors()

    def elements(self) -> np.ndarray:
        """Coarse POVM elements, shape (n_outcomes, d, d)."""
        out = np.zeros((self.n_outcomes, self.d, self.d), dtype=complex)
        np.add.at(out, self.groups, self.fine_elements())
        return out

    def coarse(self, probs: np.ndarray) -> np.ndarray:
        """Sum the last axis (over effects) into coarse outcomes."""
        probs = np.asarray(probs)
        out = np.zeros(probs.shape[:-1] + (self.n_outcomes,), dtype=probs.dtype)
        for i, g in enumerate(self.groups):
            out[..., g] += probs[..., i]
        return out

    def completeness_residual(self) -> float:
        return float(np.max(np.abs(self.fine_elements().sum(axis=0) - np.eye(self.d))))

    def blochs(self) -> np.ndarray:
        """Bloch vectors of the effect projectors (qubits only)."""
        if self.d != 2:
            raise InvalidDimension("Bloch vectors exist for qubit measurements only")
        return qcore.bloch_from_kets(self.vectors)

    def to_dict(self) -> dict:
        effects = []
        for e in self.effects:
            item = {"eta": e.weight, "outcome": e.label}
            if self.d == 2:
                item["bloch"] = qcore.bloch_from_kets(e.vector[None, :])[0].tolist()
            else:
                item["projector"] = {"re": e.projector.real.tolist(), "im": e.projector.imag.tolist()}
            effects.append(item)
        return {"d": self.d, "projective": self.projective, "effects": effects}

    @classmethod
    def from_dict(cls, data: dict) -> "Measurement":
        weights, vectors, groups = [], [], []
        for i, item in enumerate(data["effects"]):
            if "bloch" in item:
                vec = qcore.ket_from_bloch(item["bloch"])
            else:
                p = np.asarray(item["projector"]["re"]) + 1j * np.asarray(item["projector"]["im"])
                w, u = np.linalg.eigh(p)
                vec = u[:, np.argmax(w)]
            weights.append(item["eta"])
            vectors.append(vec)
            groups.append(item.get("outcome", i))
        return from_effects(weights, vectors, groups)


def _is_projective(vectors: np.ndarray, weights: np.ndarray, tol: float = 1e-10) -> bool:
    k, d = vectors.shape
    if k != d or np.max(np.abs(weights - 1)) > tol:
        return False
    return bool(np.max(np.abs(vectors.conj() @ vectors.T - np.eye(d))) <= tol)


def from_effects(weights, vectors, groups=None, check: bool = True) -> Measurement:
    """Build a measurement from weights and (not necessarily normalized) kets."""
    v = np.atleast_2d(np.asarray(vectors, dtype=complex))
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms == 0):
        raise InvalidMeasurement("zero effect vector")
    v = v / norms[:, None]
    w = np.asarray(weights, dtype=float).reshape(-1)
    if groups is None:
        groups = np.arange(len(w))
    groups = np.asarray(groups, dtype=np.int64)
    if v.shape[0] != w.size or groups.size != w.size:
        raise InvalidMeasurement("weights, vectors and groups disagree in length")
    if np.any(w <= 0) or np.any(w > 1 + COMPLETENESS_TOL):
        raise InvalidMeasurement("effect weights must lie in (0, 1]")
    # relabel coarse outcomes densely in order of first appearance
    _, first = np.unique(groups, return_index=True)
    order = groups[np.sort(first)]
    relabel = {int(g): i for i, g in enumerate(order)}
    groups = np.array([relabel[int(g)] for g in groups], dtype=np.int64)
    m = Measurement(v, np.minimum(w, 1.0), groups, _is_projective(v, w))
    if check and m.completeness_residual() > COMPLETENESS_TOL:
        raise InvalidMeasurement(
            f"effects do not sum to the identity (residual {m.completeness_residual():.2e})"
        )
    return m


def fine_grain(raw: Sequence[np.ndarray]) -> Measurement:
    """Split each POVM element into weighted rank-one eigenprojectors.

    The coarse outcome of every rank-one piece is the index of the raw
    element it came from, so coarse statistics are recovered by
    :meth:`Measurement.coarse`.
    """
    raw = [np.asarray(getattr(r, "mat", r), dtype=complex) for r in raw]
    if not raw:
        raise InvalidMeasurement("empty measurement")
    d = raw[0].shape[0]
    if any(r.shape != (d, d) for r in raw):
        raise InvalidMeasurement("measurement elements differ in shape")
    if np.max(np.abs(sum(raw) - np.eye(d))) > COMPLETENESS_TOL:
        raise InvalidMeasurement("measurement elements do not sum to the identity")
    weights, vectors, groups = [], [], []
    for a, r in enumerate(raw):
        if np.max(np.abs(r - r.conj().T)) > COMPLETENESS_TOL:
            raise InvalidMeasurement(f"element {a} is not Hermitian")
        w, u = np.linalg.eigh(0.5 * (r + r.conj().T))
        if w.min() < -COMPLETENESS_TOL:
            raise InvalidMeasurement(f"element {a} is not positive semidefinite")
        for j in np.flatnonzero(w > EIGEN_CUTOFF):
            weights.append(w[j])
            vectors.append(u[:, j])
            groups.append(a)
    return from_effects(weights, vectors, groups)


def projective(basis: np.ndarray, groups=None) -> Measurement:
    """Projective measurement onto the columns of a unitary ``basis``."""
    basis = np.asarray(basis, dtype=complex)
    return from_effects(np.ones(basis.shape[1]), basis.T, groups)


def computational(d: int) -> Measurement:
    return projective(np.eye(d))


def qubit_pm(bloch) -> Measurement:
    """Two-outcome qubit measurement; outcome 0 (the ``+1`` result) has Bloch vector ``bloch``."""
    b = np.asarray(bloch, dtype=float)
    b = b / np.linalg.norm(b)
    return from_effects([1.0, 1.0], [qcore.ket_from_bloch(b), qcore.ket_from_bloch(-b)])


def qubit_povm(weights, blochs, groups=None) -> Measurement:
    vecs = [qcore.ket_from_bloch(np.asarray(b) / np.linalg.norm(b)) for b in blochs]
    return from_effects(weights, vecs, groups)


def trine() -> Measurement:
    angles = 2 * np.pi * np.arange(3) / 3
    blochs = np.stack([np.sin(angles), np.zeros(3), np.cos(angles)], axis=1)
    return qubit_povm(np.full(3, 2 / 3), blochs)


def dichotomy(m: Measurement, i: int) -> Measurement:
    """The two-outcome PM ``{P_i, 1 - P_i}`` built on effect ``i`` of ``m``."""
    d = m.d
    p = qcore.projector(m.vectors[i])
    w, u = np.linalg.eigh(np.eye(d) - p)
    rest = u[:, w > 0.5].T
    vecs = np.vstack([m.vectors[i][None, :], rest])
    return from_effects(np.ones(d), vecs, [0] + [1] * (d - 1), check=False)


def random_projective(d: int, rng: np.random.Generator) -> Measurement:
    if d < 2:
        raise InvalidDimension(f"need d >= 2, got {d}")
    return projective(qcore.haar_unitary(d, rng))


def random_povm(d: int, k: int, rng: np.random.Generator, n_outcomes: int | None = None) -> Measurement:
    """Random rank-one POVM with ``k`` effects.

    Haar kets with flat-Dirichlet weights are whitened by the inverse square
    root of their frame operator, which makes completeness exact. ``k = d``
    therefore always yields a projective measurement. If ``n_outcomes`` is
    given the effects are grouped at random into that many coarse outcomes.
    """
    if d < 2:
        raise InvalidDimension(f"need d >= 2, got {d}")
    if k < max(2, d):
        raise InvalidArgument(f"a rank-one POVM on C^{d} needs at least {d} effects, got {k}")
    while True:
        v = qcore.haar_kets(d, k, rng)
        w = rng.dirichlet(np.ones(k))
        frame = np.einsum("k,ki,kj->ij", w, v, v.conj())
        ev, u = np.linalg.eigh(frame)
        if ev.min() > 1e-8 * ev.max():
            break
    whiten = (u / np.sqrt(ev)) @ u.conj().T
    x = (whiten @ (v * np.sqrt(w)[:, None]).T).T
    weights = np.sum(np.abs(x) ** 2, axis=1)
    groups = None
    if n_outcomes is not None:
        if not 1 <= n_outcomes <= k:
            raise InvalidArgument("n_outcomes must lie between 1 and k")
        groups = np.concatenate([np.arange(n_outcomes), rng.integers(0, n_outcomes, k - n_outcomes)])
        groups = rng.permutation(groups)
    return from_effects(weights, x, groups)


def transpose_measurement(m: Measurement) -> Measurement:
    # (|v><v|)^T = |v*><v*|
    return Measurement(m.vectors.conj(), m.weights, m.groups, m.projective)


def conjugate_by(m: Measurement, u: np.ndarray) -> Measurement:
    """Effects ``U^dag A U``; ``u`` must be unitary."""
    vecs = (np.asarray(u).conj().T @ m.vectors.T).T
    return Measurement(vecs, m.weights, m.groups, m.projective)


def dual_channel_pullback(m: Measurement, kraus: Sequence[np.ndarray]) -> Measurement:
    """Pull effects back through the dual of the channel with Kraus operators ``kraus``."""
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    if not ks:
        raise InvalidChannel("empty Kraus set")
    d_in = ks[0].shape[1]
    if any(k.shape[0] != m.d or k.shape[1] != d_in for k in ks):
        raise InvalidChannel("Kraus operators do not map onto the measured space")
    if np.max(np.abs(sum(k.conj().T @ k for k in ks) - np.eye(d_in))) > COMPLETENESS_TOL:
        raise InvalidChannel("Kraus operators are not trace preserving")
    pulled = [sum(k.conj().T @ a @ k for k in ks) for a in m.elements()]
    return fine_grain(pulled)


def born_fine(m: Measurement, rho: np.ndarray) -> np.ndarray:
    """Single-system Born probabilities of every effect."""
    rho = np.asarray(getattr(rho, "mat", rho))
    return m.weights * np.einsum("ki,ij,kj->k", m.vectors.conj(), rho, m.vectors).real
