"""State families with local models and their critical mixing probabilities."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

from . import qcore
from .errors import InvalidArgument, InvalidDimension
from .qcore import PAULIS, DensityMatrix, density, kron

FAMILIES = (
    "werner",
    "isotropic",
    "noisy",
    "raimat",
    "bvqb",
    "hirsch-lift",
    "toth-acin-class",
    "multipartite-lift",
)


def _check_d(d):
    if int(d) != d or d < 2:
        raise InvalidDimension(f"local dimension must be an integer >= 2, got {d}")
    return int(d)


def _check_p(p, hi=1.0):
    if not 0 <= p <= hi:
        raise InvalidArgument(f"mixing parameter {p} outside [0, {hi}]")
    return float(p)


def antisymmetric_projector(d: int) -> np.ndarray:
    return 0.5 * (np.eye(d * d) - qcore.swap_operator(d))


def werner_state(d: int, p: float) -> DensityMatrix:
    d = _check_d(d)
    p = _check_p(p)
    mat = p * 2 * antisymmetric_projector(d) / (d * (d - 1)) + (1 - p) * np.eye(d * d) / d**2
    return density(mat, (d, d))


def isotropic_state(d: int, p: float) -> DensityMatrix:
    d = _check_d(d)
    p = _check_p(p)
    phi = qcore.max_entangled(d)
    return density(p * np.outer(phi, phi.conj()) + (1 - p) * np.eye(d * d) / d**2, (d, d))


def noisy_state(rho, p: float) -> DensityMatrix:
    """``p rho + (1 - p) 1/d^2`` for a two-qudit ``rho`` (a ket is promoted to its projector)."""
    p = _check_p(p)
    arr = np.asarray(getattr(rho, "mat", rho), dtype=complex)
    if arr.ndim == 1:
        arr = np.outer(arr, arr.conj())
    side = arr.shape[0]
    d = int(round(np.sqrt(side)))
    if d * d != side:
        raise InvalidDimension("noisy states live on C^d (x) C^d")
    return density(p * arr + (1 - p) * np.eye(side) / side, (d, d))


def raimat_state(p: float, eta) -> DensityMatrix:
    p = _check_p(p, 0.5)
    eta = qcore.ket(eta)
    if eta.size != 2:
        raise InvalidDimension("eta is a qubit ket")
    s = qcore.singlet()
    mat = p * np.outer(s, s.conj()) + (1 - p) * np.kron(np.eye(2) / 2, qcore.projector(eta))
    return density(mat, (2, 2))


def bvqb_state(p: float) -> DensityMatrix:
    p = _check_p(p, 0.5)
    s = qcore.singlet()
    zero, one = qcore.projector([1, 0]), qcore.projector([0, 1])
    noise = 2 * np.kron(zero, np.eye(2) / 2) + 3 * np.kron(np.eye(2) / 2, one)
    return density(p * np.outer(s, s.conj()) + (1 - p) / 5 * noise, (2, 2))


def reductions(rho) -> tuple[DensityMatrix, DensityMatrix]:
    rho = qcore.as_operator(rho)
    return (qcore.partial_trace(density(rho.mat, rho.dims), [0]),
            qcore.partial_trace(density(rho.mat, rho.dims), [1]))


def hirsch_lift_state(rho0, sigma_a, sigma_b) -> DensityMatrix:
    """State local for all POVMs built from ``rho0`` local for dichotomic PMs.

    The last term uses ``sigma_A (x) sigma_B``; this is the form whose Born
    probabilities agree with the lifting protocol.
    """
    rho0 = qcore.as_operator(rho0)
    sa = np.asarray(getattr(sigma_a, "mat", sigma_a), dtype=complex)
    sb = np.asarray(getattr(sigma_b, "mat", sigma_b), dtype=complex)
    if len(rho0.dims) != 2 or rho0.dims[0] != rho0.dims[1]:
        raise InvalidArgument("rho0 must be a two-qudit state with equal local dimensions")
    d = rho0.dims[0]
    if sa.shape != (d, d) or sb.shape != (d, d):
        raise InvalidArgument("sigma_A and sigma_B must act on C^d")
    ra, rb = reductions(rho0)
    mat = (rho0.mat + (d - 1) * (np.kron(ra.mat, sb) + np.kron(sa, rb.mat))
           + (d - 1) ** 2 * np.kron(sa, sb)) / d**2
    return density(mat, (d, d))


def multipartite_lift_state(rho, sigmas: Sequence) -> DensityMatrix:
    """``d^-N sum_S (d-1)^|S| rho_(complement of S) (x) (x)_{i in S} sigma_i`` in party order."""
    rho = qcore.as_operator(rho)
    n = len(rho.dims)
    d = rho.dims[0]
    if any(x != d for x in rho.dims):
        raise InvalidArgument("all parties must share the local dimension")
    sig = [np.asarray(getattr(s, "mat", s), dtype=complex) for s in sigmas]
    if len(sig) != n or any(s.shape != (d, d) for s in sig):
        raise InvalidArgument(f"need {n} single-party states on C^{d}")
    total = np.zeros_like(rho.mat)
    for k in range(n + 1):
        for subset in itertools.combinations(range(n), k):
            rest = [i for i in range(n) if i not in subset]
            factors = []
            if rest:
                factors.append(qcore.partial_trace(rho, rest).mat)
            factors.extend(sig[i] for i in subset)
            op = qcore.Operator(kron(*factors), (d,) * n)
            # current factor order is rest + subset; restore party order
            order = rest + list(subset)
            perm = [order.index(i) for i in range(n)]
            total = total + (d - 1) ** k * qcore.permute_factors(op, perm).mat
    return density(total / d**n, rho.dims)


def lift_weight_sum(n: int, d: int) -> Fraction:
    return Fraction(sum(comb(n, k) * (d - 1) ** k for k in range(n + 1)), d**n)


def toth_acin_class(a1: float, a2: float, a3: float) -> DensityMatrix:
    a = (a1, a2, a3)
    if any(not -1 <= x <= 1 for x in a):
        raise InvalidArgument("Toth-Acin parameters must lie in [-1, 1]")
    i2 = np.eye(2)
    mat = np.eye(8) / 8
    for ai, s in zip(a, PAULIS):
        mat = mat - ai / 16 * (kron(s, s, i2) + kron(s, i2, s))
        mat = mat + kron(i2, s, s) / 24
    return density(mat, (2, 2, 2))


def toth_acin_gme(a1: float, a2: float, a3: float) -> bool:
    """GME certificate for the class: ``2 < a1 + a2 + a3 <= 3``."""
    s = a1 + a2 + a3
    return bool(2 < s <= 3 + 1e-12)


# -- critical probabilities ------------------------------------------------------------

def harmonic(d: int) -> Fraction:
    return sum((Fraction(1, k) for k in range(1, d + 1)), Fraction(0))


def werner_sep(d: int) -> Fraction:
    return Fraction(1, d + 1)


def werner_pm(d: int) -> Fraction:
    return Fraction(d - 1, d)


def povm_threshold(d: int) -> Fraction:
    """``(3d-1)/(d(d+1)) ((d-1)/d)^(d-1)``, shared by the Werner and isotropic families."""
    return Fraction(3 * d - 1, d * (d + 1)) * Fraction(d - 1, d) ** (d - 1)


def isotropic_pm(d: int) -> Fraction:
    return (harmonic(d) - 1) / (d - 1)


def isotropic_povm(d: int) -> Fraction:
    # printed as (3d-1)(d-1)^(d-1) / ((d+1) d^d)
    return Fraction((3 * d - 1) * (d - 1) ** (d - 1), (d + 1) * d**d)


def noisy_from_isotropic(p_iso: Fraction, d: int) -> Fraction:
    return p_iso / ((1 - p_iso) * (d - 1) + 1)


def admixture_weight(p_iso, d: int):
    """Weight ``q`` of the isotropic-type protocol solving ``q(1-p) = (1-q)/(d-1)``."""
    return 1 / (1 + (1 - p_iso) * (d - 1))


@dataclass(frozen=True)
class ThresholdTable:
    family: str
    d: int
    p_sep: Fraction | None
    p_pm: Fraction
    p_povm: Fraction
    p_sep_interval: tuple | None = None

    def as_floats(self) -> dict:
        out = {"family": self.family, "d": self.d}
        for key in ("p_sep", "p_pm", "p_povm"):
            val = getattr(self, key)
            out[key] = None if val is None else float(val)
        if self.p_sep_interval is not None:
            out["p_sep_lower"], out["p_sep_upper"] = (float(x) for x in self.p_sep_interval)
        return out


def thresholds(family: str, d: int) -> ThresholdTable:
    d = _check_d(d)
    if family == "werner":
        return ThresholdTable("werner", d, werner_sep(d), werner_pm(d), povm_threshold(d))
    if family == "isotropic":
        return ThresholdTable("isotropic", d, Fraction(1, d + 1), isotropic_pm(d), isotropic_povm(d))
    if family == "noisy":
        return ThresholdTable(
            "noisy", d, None,
            noisy_from_isotropic(isotropic_pm(d), d),
            noisy_from_isotropic(isotropic_povm(d), d),
            (Fraction(1, d * d - 1), Fraction(2, d * d + 2)),
        )
    raise InvalidArgument(f"no threshold table for family {family!r}")


# -- serialisable family descriptors ---------------------------------------------------

@dataclass(frozen=True)
class StateFamily:
    tag: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in FAMILIES:
            raise InvalidArgument(f"unknown state family {self.tag!r}")

    def build(self) -> DensityMatrix:
        p = self.params
        if self.tag == "werner":
            return werner_state(p["d"], p["p"])
        if self.tag == "isotropic":
            return isotropic_state(p["d"], p["p"])
        if self.tag == "noisy":
            return noisy_state(_complex(p["psi"]), p["p"])
        if self.tag == "raimat":
            return raimat_state(p["p"], _complex(p.get("eta", [1, 0])))
        if self.tag == "bvqb":
            return bvqb_state(p["p"])
        if self.tag == "toth-acin-class":
            return toth_acin_class(*p.get("a", (1, 1, 1)))
        if self.tag == "hirsch-lift":
            return hirsch_lift_state(self._sub("rho0"), _complex(p["sigma_a"]), _complex(p["sigma_b"]))
        return multipartite_lift_state(self._sub("rho"), [_complex(s) for s in p["sigmas"]])

    def _sub(self, key):
        val = self.params[key]
        if isinstance(val, dict) and "family" in val:
            return family_from_dict(val).build()
        return _complex(val)

    def to_dict(self) -> dict:
        return {"family": self.tag, **self.params}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _complex(val):
    if isinstance(val, dict):
        return np.asarray(val["re"], dtype=float) + 1j * np.asarray(val.get("im", 0.0), dtype=float)
    return np.asarray(val, dtype=complex)


def family_from_dict(data: dict) -> StateFamily:
    data = dict(data)
    tag = data.pop("family")
    return StateFamily(tag, data)
