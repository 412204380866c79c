"""From dichotomic projective measurements to arbitrary POVMs, and the three-qubit model."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import qcore
from ..errors import InvalidArgument, InvalidUse
from ..measurements import dichotomy
from .base import HiddenState, LocalModel, require_projective, require_qubit
from .werner import sign_response


class PovmLiftModel(LocalModel):
    """Lift a model for two-outcome PMs to a model for all POVMs.

    Each party picks effect ``i`` with probability ``eta_i / d`` and feeds
    the dichotomy ``{P_i, 1 - P_i}`` to the base model. On the first
    outcome it answers ``i``; otherwise it answers ``a`` with probability
    ``Tr(A_a sigma)``. Branch 0 of :meth:`respond_resolved` is the first
    case and branch 1 the second.
    """

    name = "povm-lift"

    def __init__(self, base: LocalModel, sigmas: Sequence):
        self.base = base
        self.n_parties = base.n_parties
        self.abstain = base.abstain
        sig = [np.asarray(getattr(s, "mat", s), dtype=complex) for s in sigmas]
        if len(sig) != self.n_parties:
            raise InvalidArgument(f"need one local state per party ({self.n_parties})")
        for s in sig:
            qcore.density(s)
        self.sigmas = sig
        if base.abstain:
            raise InvalidUse("the lifting needs a base model that always answers")

    def sample(self, rng, n, settings=None):
        return self.base.sample(rng, n)

    def check(self, party, m):
        d = self.sigmas[party].shape[0]
        if m.d != d:
            raise InvalidUse(f"party {party} measures on C^{d}, got dimension {m.d}")
        try:
            self.base.check(party, dichotomy(m, 0))
        except InvalidUse as exc:
            raise InvalidUse(f"base model does not cover dichotomic PMs: {exc}") from exc

    def respond_resolved(self, party, m, hidden):
        self.check(party, m)
        d = m.d
        n = len(hidden)
        plus = np.empty((n, m.n_effects))
        for i in range(m.n_effects):
            plus[:, i] = self.base.respond(party, dichotomy(m, i), hidden)[:, 0]
        pick = m.weights / d
        direct = plus * pick
        fail = (1.0 - plus) @ pick
        sig = m.weights * np.einsum("ki,ij,kj->k", m.vectors.conj(), self.sigmas[party], m.vectors).real
        return np.stack([direct, fail[:, None] * sig], axis=1)

    def n_branches(self, party):
        return 2

    def _respond(self, party, m, hidden):
        return self.respond_resolved(party, m, hidden).sum(axis=1)

    def descriptor(self):
        return {
            "model": self.name,
            "base": self.base.descriptor(),
            "sigmas": [qcore.operator_to_dict(s) for s in self.sigmas],
        }


def hirsch_povm_model(base: LocalModel, sigma_a, sigma_b) -> PovmLiftModel:
    if base.n_parties != 2:
        raise InvalidArgument("the bipartite lifting needs a two-party base model")
    return PovmLiftModel(base, [sigma_a, sigma_b])


def multipartite_povm_model(base: LocalModel, sigmas: Sequence) -> PovmLiftModel:
    return PovmLiftModel(base, sigmas)


class TothAcinModel(LocalModel):
    """Three-qubit model: Alice deterministic on a sign-flipped hidden vector, Bob and Charlie quantum-like.

    Alice reads ``lam' = s * lam`` where the signs ``s_i = +-1`` are part of
    the hidden state with mean ``a_i``. On average ``lam'`` is ``a * lam``
    and the statistics are those of the class state with parameters ``a``.
    Bob and Charlie answer ``xi <lam|Q|lam>`` and accept POVMs.
    """

    name = "toth-acin"
    n_parties = 3

    def __init__(self, a1: float = 1.0, a2: float = 1.0, a3: float = 1.0):
        a = np.array([a1, a2, a3], dtype=float)
        if np.any(np.abs(a) > 1):
            raise InvalidArgument("parameters must lie in [-1, 1]")
        self.a = a

    def sample(self, rng, n, settings=None):
        lam = qcore.haar_kets(2, n, rng)
        signs = np.where(rng.random((n, 3)) < (1 + self.a) / 2, 1.0, -1.0)
        return HiddenState("composite", {"lam": lam, "bloch": qcore.bloch_from_kets(lam), "signs": signs})

    def check(self, party, m):
        require_qubit(m, "the three-qubit model")
        if party == 0:
            require_projective(m, "Alice's response")

    def _respond(self, party, m, hidden):
        if party == 0:
            return sign_response(m.blochs(), hidden["bloch"] * hidden["signs"])
        return m.weights * (1.0 + hidden["bloch"] @ m.blochs().T) / 2

    def descriptor(self):
        return {"model": self.name, "a": self.a.tolist()}


def toth_acin_model(a1: float = 1.0, a2: float = 1.0, a3: float = 1.0) -> TothAcinModel:
    return TothAcinModel(a1, a2, a3)


__all__ = [
    "PovmLiftModel",
    "TothAcinModel",
    "hirsch_povm_model",
    "multipartite_povm_model",
    "toth_acin_model",
]
