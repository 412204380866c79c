"""Models for Werner states and the qubit variants built on the same idea."""
from __future__ import annotations

import numpy as np

from .. import _kernels as K
from .. import qcore
from ..errors import InvalidArgument, InvalidDimension
from ..measurements import Measurement
from .base import HiddenState, LocalModel, require_dim, require_projective, require_qubit


def haar_hidden(rng, n, d) -> HiddenState:
    return HiddenState("ket", {"lam": qcore.haar_kets(d, n, rng)})


def overlaps(hidden: HiddenState, m: Measurement, transpose: bool = False) -> np.ndarray:
    """``<lam|P_i|lam>`` for every effect (``P_i^T`` when ``transpose``)."""
    vecs = m.vectors.conj() if transpose else m.vectors
    return K.abs2_overlaps(np.ascontiguousarray(hidden["lam"]), np.ascontiguousarray(vecs))


def barrett_alice(ov: np.ndarray, weights: np.ndarray, d: int) -> np.ndarray:
    """Alice's POVM response: weight on effects whose overlap reaches ``1/d``, rest spread as ``eta/d``."""
    first = weights * ov * (ov >= 1.0 / d)
    return first + (1.0 - first.sum(axis=1, keepdims=True)) * (weights / d)


class WernerModel(LocalModel):
    """Projective measurements on the Werner state with ``p = (d-1)/d``.

    Alice outputs the effect with the smallest overlap with ``lam``; Bob
    outputs effect ``b`` with probability ``xi_b <lam|Q_b|lam>``, which also
    covers generalized measurements on his side.
    """

    name = "werner"

    def __init__(self, d: int):
        if d < 2:
            raise InvalidDimension(f"need d >= 2, got {d}")
        self.d = int(d)

    def sample(self, rng, n, settings=None):
        return haar_hidden(rng, n, self.d)

    def check(self, party, m):
        require_dim(m, self.d, "the Werner model")
        if party == 0:
            require_projective(m, "Alice's Werner response")

    def _respond(self, party, m, hidden):
        ov = overlaps(hidden, m)
        if party == 0:
            return K.argext_onehot(ov, False)
        return ov * m.weights

    def descriptor(self):
        return {"model": self.name, "d": self.d}


class BarrettModel(LocalModel):
    """Generalized measurements on the Werner state at the POVM threshold."""

    name = "barrett"

    def __init__(self, d: int):
        if d < 2:
            raise InvalidDimension(f"need d >= 2, got {d}")
        self.d = int(d)

    def sample(self, rng, n, settings=None):
        return haar_hidden(rng, n, self.d)

    def check(self, party, m):
        require_dim(m, self.d, "Barrett's model")

    def _respond(self, party, m, hidden):
        ov = overlaps(hidden, m)
        if party == 0:
            return barrett_alice(ov, m.weights, self.d)
        return m.weights / (self.d - 1) * (1.0 - ov)

    def descriptor(self):
        return {"model": self.name, "d": self.d}


# -- qubit models on the Bloch sphere -----------------------------------------------------

def sphere_hidden(rng, n, tilt: float = 0.0) -> HiddenState:
    """Unit vectors with density ``(1 + tilt * z) / 4 pi``."""
    if tilt == 0.0:
        return HiddenState("bloch", {"lam": qcore.uniform_sphere(n, rng)})
    u = rng.random(n)
    disc = 1.0 - tilt * (2.0 - tilt - 4.0 * u)
    # inverse CDF of the z marginal (1 + tilt z)/2, written to stay stable as tilt -> 0
    z = (4.0 * u + tilt - 2.0) / (1.0 + np.sqrt(disc))
    phi = 2 * np.pi * rng.random(n)
    r = np.sqrt(np.clip(1 - z * z, 0.0, None))
    return HiddenState("bloch", {"lam": np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)})


def sign_response(blochs: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Deterministic answer: the effect whose Bloch vector is most anti-aligned with ``lam``."""
    return K.argext_onehot(np.ascontiguousarray(lam @ blochs.T), False)


class GisinGisinModel(LocalModel):
    """Singlet correlations with Bob allowed to abstain.

    Alice answers deterministically; Bob accepts with probability
    ``|b . lam|`` and then answers the effect aligned with ``lam``.
    """

    name = "gisin-gisin"
    abstain = True

    def sample(self, rng, n, settings=None):
        return sphere_hidden(rng, n)

    def check(self, party, m):
        require_qubit(m, "the Gisin-Gisin model")
        require_projective(m, "the Gisin-Gisin model")

    def _respond(self, party, m, hidden):
        lam = hidden["lam"]
        if party == 0:
            return sign_response(m.blochs(), lam)
        return np.clip(lam @ m.blochs().T, 0.0, None)


class RaimatModel(GisinGisinModel):
    """Gisin-Gisin with Bob answering from ``|eta><eta|`` whenever he would abstain."""

    name = "raimat"
    abstain = False

    def __init__(self, eta):
        eta = qcore.ket(eta)
        if eta.size != 2:
            raise InvalidDimension("eta is a qubit ket")
        self.eta = eta
        self.n_eta = qcore.bloch_from_kets(eta[None, :])[0]

    def _respond(self, party, m, hidden):
        if party == 0:
            return super()._respond(party, m, hidden)
        lam = hidden["lam"]
        proj = lam @ m.blochs().T
        accept = np.clip(proj, 0.0, None)
        reject = 1.0 - np.abs(proj[:, :1])
        return accept + reject * (1.0 + m.blochs() @ self.n_eta) / 2

    def descriptor(self):
        return {"model": self.name, "eta": {"re": self.eta.real.tolist(), "im": self.eta.imag.tolist()}}


class TiltedSphereModel(LocalModel):
    """Qubit model with hidden density ``(1 + tilt * lam_z) / 4 pi``.

    One party (``deterministic``) answers the most anti-aligned effect; the
    other answers with the quantum-like probability ``(1 + v . lam) / 2``.
    """

    name = "tilted"

    def __init__(self, tilt: float, deterministic: int = 0):
        if not -1 <= tilt <= 1:
            raise InvalidArgument("tilt must lie in [-1, 1] for a valid density")
        if deterministic not in (0, 1):
            raise InvalidArgument("deterministic party must be 0 or 1")
        self.tilt = float(tilt)
        self.deterministic = deterministic

    def sample(self, rng, n, settings=None):
        return sphere_hidden(rng, n, self.tilt)

    def check(self, party, m):
        require_qubit(m, "the tilted qubit model")
        if party == self.deterministic:
            require_projective(m, "the deterministic party")

    def _respond(self, party, m, hidden):
        lam = hidden["lam"]
        if party == self.deterministic:
            return sign_response(m.blochs(), lam)
        return m.weights * (1.0 + lam @ m.blochs().T) / 2

    def descriptor(self):
        return {"model": self.name, "tilt": self.tilt, "deterministic": self.deterministic}


def werner_model(d: int) -> WernerModel:
    return WernerModel(d)


def barrett_model(d: int) -> BarrettModel:
    return BarrettModel(d)


def gisin_gisin_model() -> GisinGisinModel:
    return GisinGisinModel()


def raimat_model(eta) -> RaimatModel:
    return RaimatModel(eta)


BVQB_TILT = 0.6


def bvqb_model() -> TiltedSphereModel:
    """Model for ``bvqb_state(1/2)``: tilt 3/5, Bob deterministic, Alice quantum-like."""
    return TiltedSphereModel(BVQB_TILT, deterministic=1)
