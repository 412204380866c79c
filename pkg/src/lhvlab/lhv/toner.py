"""Toner's model for two-qubit Werner states built on the optimal constant c3.

Unit vectors ``a`` and ``b`` are embedded in a large real space by maps
``f`` and ``g`` built from odd-degree spherical harmonics weighted by
half-integer Bessel functions at ``c3``. Both images are unit vectors with
``f(a) . g(b) = -sin(c3 a . b)``; signs of projections onto a shared
Gaussian vector then give ``<AB> = -(2 c3 / pi) a . b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from ..errors import InvalidArgument, TruncationInsufficient
from .base import HiddenState, LocalModel, require_projective, require_qubit, settings_per_party

NORM_TOL = 1e-8
C3_BRACKET = (0.1, np.pi / 2)


def c3_equation(c: float) -> float:
    """``sqrt(c) int_0^c x^(-3/2) sin x dx - 2``.

    With ``x = t^2`` the integrand becomes ``2 sin(t^2) / t^2``, which is
    smooth at the origin.
    """

    def integrand(t):
        return 2.0 if t == 0 else 2.0 * np.sin(t * t) / (t * t)

    val, _ = integrate.quad(integrand, 0.0, np.sqrt(c), epsabs=1e-13, epsrel=1e-13, limit=200)
    return np.sqrt(c) * val - 2.0


@lru_cache(maxsize=1)
def solve_c3() -> float:
    """Root of :func:`c3_equation` in ``[0.1, pi/2]`` by bisection."""
    return float(optimize.bisect(c3_equation, *C3_BRACKET, xtol=1e-15, rtol=1e-15, maxiter=200))


def spherical_jn(nmax: int, x: float) -> np.ndarray:
    """``j_0(x) .. j_nmax(x)`` by Miller's downward recurrence.

    The recurrence is started well above ``nmax`` and normalized with
    ``j_0 = sin(x)/x``; it is stable where upward recurrence is not.
    """
    if x <= 0:
        raise InvalidArgument("spherical Bessel evaluation needs x > 0")
    start = nmax + 30 + int(2 * x)
    vals = np.zeros(start + 2)
    vals[start] = 1e-300
    for n in range(start, 0, -1):
        vals[n - 1] = (2 * n + 1) / x * vals[n] - vals[n + 1]
        if abs(vals[n - 1]) > 1e250:
            vals[n - 1 :] *= 1e-250
    return vals[: nmax + 1] * (np.sin(x) / x) / vals[0]


def bessel_half(nmax: int, x: float) -> np.ndarray:
    """``J_{n+1/2}(x)`` for ``n = 0..nmax`` via ``J_{n+1/2}(x) = sqrt(2x/pi) j_n(x)``."""
    return np.sqrt(2 * x / np.pi) * spherical_jn(nmax, x)


def legendre_normalized(lmax: int, x: np.ndarray) -> np.ndarray:
    """Orthonormalized associated Legendre functions ``Pbar_l^m(x)`` for ``0 <= m <= l <= lmax``.

    Normalized so that ``Y_lm = Pbar_l^m(cos theta) e^{i m phi}`` is unit
    on the sphere (Condon-Shortley phase included). Shape
    ``(lmax + 1, lmax + 1) + x.shape``, zero for ``m > l``.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros((lmax + 1, lmax + 1) + x.shape)
    s = np.sqrt(np.clip(1 - x * x, 0.0, None))
    out[0, 0] = np.sqrt(1 / (4 * np.pi))
    for m in range(1, lmax + 1):
        out[m, m] = -np.sqrt((2 * m + 1) / (2 * m)) * s * out[m - 1, m - 1]
    for m in range(0, lmax):
        out[m + 1, m] = np.sqrt(2 * m + 3) * x * out[m, m]
    for m in range(0, lmax + 1):
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = np.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
            out[l, m] = a * (x * out[l - 1, m] - b * out[l - 2, m])
    return out


def spherical_harmonics(lmax: int, vecs: np.ndarray) -> np.ndarray:
    """Complex ``Y_lm`` of unit vectors, shape ``(n, lmax + 1, 2 lmax + 1)``; column ``m + lmax``."""
    vecs = np.atleast_2d(np.asarray(vecs, dtype=float))
    z = np.clip(vecs[:, 2], -1.0, 1.0)
    phi = np.arctan2(vecs[:, 1], vecs[:, 0])
    p = legendre_normalized(lmax, z)  # (l, m, n)
    y = np.zeros((vecs.shape[0], lmax + 1, 2 * lmax + 1), dtype=complex)
    for m in range(0, lmax + 1):
        pos = p[:, m, :].T * np.exp(1j * m * phi)[:, None]
        y[:, :, lmax + m] = pos
        if m:
            y[:, :, lmax - m] = (-1) ** m * pos.conj()
    return y


@dataclass(frozen=True)
class TonerMaps:
    """Truncated embeddings ``f`` (Alice) and ``g`` (Bob)."""

    K: int
    c3: float
    coeffs: np.ndarray  # sqrt(4 pi^{3/2} J_{2k+3/2}(c3) / sqrt(2 c3)), k = 0..K

    @property
    def dim(self) -> int:
        return 2 * (self.K + 1) * (2 * self.K + 3)

    @property
    def degrees(self) -> np.ndarray:
        return 2 * np.arange(self.K + 1) + 1

    def _embed(self, vecs, signed: bool) -> np.ndarray:
        vecs = np.atleast_2d(np.asarray(vecs, dtype=float))
        vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
        lmax = int(self.degrees[-1])
        y = spherical_harmonics(lmax, vecs)
        parts = []
        for k, l in enumerate(self.degrees):
            c = self.coeffs[k] * ((-1) ** (k + 1) if signed else 1.0)
            block = y[:, l, lmax - l : lmax + l + 1]
            parts.append(c * block.real)
            parts.append(c * block.imag)
        return np.concatenate(parts, axis=1)

    def f(self, a) -> np.ndarray:
        return self._embed(a, signed=True)

    def g(self, b) -> np.ndarray:
        return self._embed(b, signed=False)

    def norm_residual(self) -> float:
        """``|sum_k (4k+3) sqrt(pi/(2 c3)) J_{2k+3/2}(c3) - 1|``, the value of ``|f|^2 - 1``."""
        total = np.sum(self.coeffs**2 * (2 * self.degrees + 1) / (4 * np.pi))
        return abs(float(total) - 1.0)


def toner_maps(K: int = 25) -> TonerMaps:
    if K < 0:
        raise InvalidArgument("truncation must be nonnegative")
    c3 = solve_c3()
    jh = bessel_half(2 * K + 2, c3)
    bess = jh[2 * np.arange(K + 1) + 1]  # J_{2k+3/2} = J_{(2k+1)+1/2}
    coeffs = np.sqrt(4 * np.pi**1.5 * bess / np.sqrt(2 * c3))
    maps = TonerMaps(K, c3, coeffs)
    if maps.norm_residual() > NORM_TOL:
        raise TruncationInsufficient(
            f"truncation K={K} leaves |f|^2 - 1 = {maps.norm_residual():.2e} above {NORM_TOL}"
        )
    return maps


class TonerModel(LocalModel):
    """Answers are signs of projections of ``f(a)`` and ``g(b)`` onto a Gaussian vector.

    :meth:`sample` draws the Gaussian vector in full when no settings are
    given. When the settings are known up front it draws only the
    coordinates along an orthonormal basis of the span of the images that
    will be queried; the joint law of all queried projections is the same.
    """

    name = "toner"
    MIN_K = 10

    def __init__(self, K: int = 25):
        if K < self.MIN_K:
            raise TruncationInsufficient(f"need K >= {self.MIN_K}, got {K}")
        self.maps = toner_maps(K)
        self.K = K
        self._images: dict = {}

    def _image(self, party, m):
        bloch = m.blochs()[0]
        key = (party, bloch.tobytes())
        img = self._images.get(key)
        if img is None:
            img = (self.maps.f(bloch) if party == 0 else self.maps.g(bloch))[0]
            self._images[key] = img
        return img

    def sample(self, rng, n, settings=None):
        if settings is None:
            return HiddenState("gaussian-stream", {"z": rng.standard_normal((n, self.maps.dim))})
        images = [self._image(p, m) for p in (0, 1) for m in settings_per_party(settings, p)]
        # any orthonormal set containing the span will do, dependent columns included
        basis, _ = np.linalg.qr(np.stack(images, axis=1))
        z = rng.standard_normal((n, basis.shape[1]))
        return HiddenState("gaussian-stream", {"z": z}, {"basis": basis})

    def check(self, party, m):
        require_qubit(m, "Toner's model")
        require_projective(m, "Toner's model")

    def _respond(self, party, m, hidden):
        v = self._image(party, m)
        z = hidden["z"]
        if "basis" in hidden.meta:
            v = hidden.meta["basis"].T @ v
        proj = z @ v
        plus = (proj >= 0).astype(float)
        return np.stack([plus, 1.0 - plus], axis=1)

    def descriptor(self):
        return {"model": self.name, "K": self.K}


def toner_model(K: int = 25) -> TonerModel:
    return TonerModel(K)
