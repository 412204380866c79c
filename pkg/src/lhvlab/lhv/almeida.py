"""Models for isotropic states and for noisy versions of arbitrary pure states.

The noisy-state construction converts the isotropic model with Nielsen's
LOCC protocol. Inside the model both measurements are expressed in the
Schmidt bases of ``psi``, where the state is ``sum_k s_k |k>|k>``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import _kernels as K
from .. import qcore, states
from ..errors import InvalidArgument, InvalidDimension
from ..measurements import Measurement, conjugate_by
from .base import HiddenState, LocalModel, require_dim, require_projective
from .werner import barrett_alice, haar_hidden, overlaps


class AlmeidaIsotropicModel(LocalModel):
    """Isotropic states at the PM threshold (``povm=False``) or the POVM threshold.

    Alice answers the effect of largest overlap (PM) or with the
    thresholded POVM rule; Bob answers ``xi_b <lam|Q_b^T|lam>``.
    """

    name = "almeida-isotropic"

    def __init__(self, d: int, povm: bool = False):
        if d < 2:
            raise InvalidDimension(f"need d >= 2, got {d}")
        self.d = int(d)
        self.povm = bool(povm)

    @property
    def p(self) -> Fraction:
        return states.isotropic_povm(self.d) if self.povm else states.isotropic_pm(self.d)

    def sample(self, rng, n, settings=None):
        return haar_hidden(rng, n, self.d)

    def check(self, party, m):
        require_dim(m, self.d, "the isotropic model")
        if party == 0 and not self.povm:
            require_projective(m, "Alice's isotropic PM response")

    def _respond(self, party, m, hidden):
        if party == 0:
            ov = overlaps(hidden, m)
            if self.povm:
                return barrett_alice(ov, m.weights, self.d)
            return K.argext_onehot(ov, True)
        return overlaps(hidden, m, transpose=True) * m.weights

    def descriptor(self):
        return {"model": self.name, "d": self.d, "povm": self.povm}


@dataclass(frozen=True)
class NielsenOperators:
    """Operators of the LOCC conversion ``phi_+ -> psi`` in the Schmidt basis.

    ``va`` and ``vb`` hold the Schmidt vectors as columns, so that
    ``psi = sum_k s_k va[:, k] (x) vb[:, k]``.
    """

    schmidt: np.ndarray
    va: np.ndarray
    vb: np.ndarray
    S: np.ndarray
    U: np.ndarray  # (d, d, d): cyclic shifts U_k
    X: np.ndarray  # X_k = S U_k
    M: np.ndarray  # M_k = X_k^dag X_k
    N: np.ndarray  # N_k = X_k^T X_k^*

    @property
    def d(self) -> int:
        return self.schmidt.size

    def reconstruct(self, k: int) -> np.ndarray:
        """``sqrt(d) (X_k (x) U_k) |phi_+>`` mapped back to the lab frame."""
        d = self.d
        vec = np.sqrt(d) * np.kron(self.X[k], self.U[k]) @ qcore.max_entangled(d)
        return np.kron(self.va, self.vb) @ vec


def schmidt_decomposition(psi, d: int | None = None):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    side = psi.size
    d = d or int(round(np.sqrt(side)))
    if d * d != side:
        raise InvalidDimension("psi must live on C^d (x) C^d")
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise InvalidArgument("psi is the zero vector")
    mat = (psi / norm).reshape(d, d)
    u, s, wh = np.linalg.svd(mat)
    # mat = sum_k s_k u_k w_k^dag  =>  psi = sum_k s_k u_k (x) conj(w_k)
    return s, u, wh.T


def nielsen_operators(psi, d: int | None = None) -> NielsenOperators:
    s, va, vb = schmidt_decomposition(psi, d)
    d = s.size
    S = np.diag(s).astype(complex)
    eye = np.eye(d)
    # U_k = sum_j |j><j+k|
    U = np.stack([sum(np.outer(eye[j], eye[(j + k) % d]) for j in range(d)) for k in range(d)]).astype(complex)
    X = np.einsum("ij,kjl->kil", S, U)
    M = np.einsum("kji,kjl->kil", X.conj(), X)
    N = np.einsum("kji,kjl->kil", X, X.conj())
    return NielsenOperators(s, va, vb, S, U, X, M, N)


class AlmeidaNoisyModel(LocalModel):
    """Noisy pure state ``p psi + (1 - p) 1/d^2`` at the PM or POVM threshold.

    With probability ``q`` the parties run the isotropic protocol fed
    through Nielsen's conversion; otherwise Bob answers from the averaged
    shifted marginal and Alice answers uniformly (``eta_a / d``).
    """

    name = "almeida-noisy"

    def __init__(self, psi, povm: bool = False, d: int | None = None):
        self.ops = nielsen_operators(psi, d)
        self.d = self.ops.d
        self.povm = bool(povm)
        self.psi = np.asarray(psi, dtype=complex).reshape(-1) / np.linalg.norm(psi)
        self.iso = AlmeidaIsotropicModel(self.d, povm)
        self.q = float(states.admixture_weight(self.iso.p, self.d))
        s2 = self.ops.schmidt**2
        # average of the shifted spectra k = 1..d-1; sums with s2 to the identity
        self.sigma_bar = (1.0 - s2) / (self.d - 1)

    @property
    def p_iso(self) -> Fraction:
        return self.iso.p

    @property
    def p(self) -> Fraction:
        return states.noisy_from_isotropic(self.iso.p, self.d)

    def sample(self, rng, n, settings=None):
        d = self.d
        lam = qcore.haar_kets(d, n, rng)
        flag = rng.random(n) < self.q
        v = np.einsum("kij,nj->nki", self.ops.X.conj(), lam)
        pk = np.sum(np.abs(v) ** 2, axis=2)
        k = np.minimum(K.sample_categorical(np.ascontiguousarray(pk), rng.random(n)), d - 1)
        rows = np.arange(n)
        lam_b = v[rows, k]
        norms = np.linalg.norm(lam_b, axis=1, keepdims=True)
        lam_b = lam_b / np.where(norms > 0, norms, 1.0)
        lam_a = np.einsum("nij,nj->ni", self.ops.U[k], lam)
        return HiddenState("composite", {"flag": flag, "k": k, "lam": lam, "lam_a": lam_a, "lam_b": lam_b})

    def check(self, party, m):
        require_dim(m, self.d, "the noisy-state model")
        if party == 0 and not self.povm:
            require_projective(m, "Alice's noisy-state PM response")

    def local_measurement(self, party, m: Measurement) -> Measurement:
        return conjugate_by(m, self.ops.va if party == 0 else self.ops.vb)

    def _respond(self, party, m, hidden):
        ms = self.local_measurement(party, m)
        flag = hidden["flag"][:, None]
        if party == 0:
            inner = self.iso._respond(0, ms, HiddenState("ket", {"lam": hidden["lam_a"]}))
            noise = np.broadcast_to(ms.weights / self.d, inner.shape)
        else:
            inner = self.iso._respond(1, ms, HiddenState("ket", {"lam": hidden["lam_b"]}))
            diag = np.abs(ms.vectors) ** 2 @ self.sigma_bar
            noise = np.broadcast_to(ms.weights * diag, inner.shape)
        return np.where(flag, inner, noise)

    def descriptor(self):
        return {
            "model": self.name,
            "d": self.d,
            "povm": self.povm,
            "psi": {"re": self.psi.real.tolist(), "im": self.psi.imag.tolist()},
        }


def almeida_iso_pm_model(d: int) -> AlmeidaIsotropicModel:
    return AlmeidaIsotropicModel(d, povm=False)


def almeida_iso_povm_model(d: int) -> AlmeidaIsotropicModel:
    return AlmeidaIsotropicModel(d, povm=True)


def almeida_noisy_pm_model(psi, d: int | None = None) -> AlmeidaNoisyModel:
    return AlmeidaNoisyModel(psi, povm=False, d=d)


def almeida_noisy_povm_model(psi, d: int | None = None) -> AlmeidaNoisyModel:
    return AlmeidaNoisyModel(psi, povm=True, d=d)
