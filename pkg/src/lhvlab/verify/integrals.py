"""Brute-force oracles for the simplex and half-sphere integrals, with their closed forms.

Simplex integrals are reported as ratios to the simplex volume ``N``,
i.e. as expectations under the flat Dirichlet distribution; the Dirac
delta in their definition then never has to be smoothed.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .. import _kernels as K
from .. import qcore
from ..errors import InvalidArgument, InvalidDimension

SIMPLEX_KINDS = ("J_u1", "Jt_u1", "Jt_u1sq", "Jcal_u1")
CHUNK = 1 << 18


def _harmonic(d: int) -> Fraction:
    return sum((Fraction(1, k) for k in range(1, d + 1)), Fraction(0))


def simplex_closed_form(kind: str, d: int) -> Fraction:
    """Exact value of the integral divided by ``N``.

    * ``J_u1``: ``u1`` over the region where ``u1`` is smallest, ``1/d^3``.
    * ``Jt_u1``: ``u1`` over ``u1 >= 1/d``, ``((2d-1)/d^2)((d-1)/d)^(d-1)``.
    * ``Jt_u1sq``: ``u1^2`` over ``u1 >= 1/d``, ``(1/d^2)((5d-3)/(d+1))((d-1)/d)^(d-1)``.
    * ``Jcal_u1``: ``u1`` over the region where ``u1`` is largest, ``H_d / d^2``.
    """
    if d < 2:
        raise InvalidDimension(f"need d >= 2, got {d}")
    tail = Fraction(d - 1, d) ** (d - 1)
    if kind == "J_u1":
        return Fraction(1, d**3)
    if kind == "Jt_u1":
        return Fraction(2 * d - 1, d * d) * tail
    if kind == "Jt_u1sq":
        return Fraction(5 * d - 3, d * d * (d + 1)) * tail
    if kind == "Jcal_u1":
        return _harmonic(d) / d**2
    raise InvalidArgument(f"unknown simplex integral {kind!r}")


@dataclass(frozen=True)
class Estimate:
    kind: str
    d: int
    estimate: float
    std_error: float
    exact: float
    samples: int
    seed: int

    @property
    def rel_error(self) -> float:
        return abs(self.estimate - self.exact) / abs(self.exact) if self.exact else abs(self.estimate)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rel_error"] = self.rel_error
        return out


def simplex_moments(d: int, samples: int, seed: int, chunk: int = CHUNK) -> np.ndarray:
    """Sums and sums of squares of all four integrands over ``samples`` flat-Dirichlet points."""
    if d < 2:
        raise InvalidDimension(f"need d >= 2, got {d}")
    rng = np.random.default_rng(seed)
    acc = np.zeros((4, 2))
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        acc += K.simplex_moments(rng.standard_exponential((n, d)))
        done += n
    return acc


def simplex_integral_oracle(kind: str, d: int, samples: int, seed: int) -> Estimate:
    if kind not in SIMPLEX_KINDS:
        raise InvalidArgument(f"unknown simplex integral {kind!r}")
    return simplex_integral_oracles(d, samples, seed)[kind]


def simplex_integral_oracles(d: int, samples: int, seed: int) -> dict:
    """All four simplex estimates from one shared sample."""
    acc = simplex_moments(d, samples, seed)
    out = {}
    for i, kind in enumerate(SIMPLEX_KINDS):
        mean = acc[i, 0] / samples
        var = max(acc[i, 1] / samples - mean**2, 0.0)
        out[kind] = Estimate(kind, d, float(mean), float(np.sqrt(var / samples)),
                             float(simplex_closed_form(kind, d)), samples, seed)
    return out


def halfsphere_closed_forms(x, y, z) -> tuple[float, float]:
    """``int_{x.l<0} y.l dl = -pi x.y`` and ``int_{x.l<0} (y.l)(z.l) dl = (2 pi / 3) y.z``."""
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    return float(-np.pi * x @ y), float(2 * np.pi / 3 * y @ z)


def bloch_halfsphere_oracle(x, y, z, samples: int, seed: int, chunk: int = CHUNK) -> dict:
    """Monte-Carlo estimates (area-weighted, total area ``4 pi``) of both half-sphere integrals."""
    vecs = [np.asarray(v, dtype=float) for v in (x, y, z)]
    for v in vecs:
        if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > 1e-12:
            raise InvalidArgument("half-sphere integrals take unit vectors in R^3")
    x, y, z = vecs
    rng = np.random.default_rng(seed)
    s = np.zeros((2, 2))
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        lam = qcore.uniform_sphere(n, rng)
        mask = (lam @ x) < 0
        ly, lz = lam @ y, lam @ z
        vals = np.stack([ly * mask, ly * lz * mask]) * (4 * np.pi)
        s[:, 0] += vals.sum(axis=1)
        s[:, 1] += (vals**2).sum(axis=1)
        done += n
    mean = s[:, 0] / samples
    se = np.sqrt(np.maximum(s[:, 1] / samples - mean**2, 0.0) / samples)
    exact = halfsphere_closed_forms(x, y, z)
    return {
        "linear": {"estimate": float(mean[0]), "std_error": float(se[0]), "exact": exact[0]},
        "quadratic": {"estimate": float(mean[1]), "std_error": float(se[1]), "exact": exact[1]},
        "samples": samples,
        "seed": seed,
    }
