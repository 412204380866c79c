"""Bell inequalities, deterministic local bounds, CHSH values and stored constants."""
from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .. import qcore
from ..errors import CapacityExceeded, InvalidArgument
from .behavior import Behavior, Scenario

MAX_VERTICES = 10**6


def dof_count(scenario: Scenario) -> int:
    """Independent probabilities once normalization and no-signalling are used: ``[m(d-1)+1]^N - 1``."""
    return (scenario.m * (scenario.d - 1) + 1) ** scenario.N - 1


@dataclass(frozen=True)
class BellInequality:
    """``sum T[x_1..x_N, a_1..a_N] p(a|x) <= beta_L``."""

    scenario: Scenario
    coefficients: np.ndarray

    def __post_init__(self):
        s = self.scenario
        t = np.asarray(self.coefficients, dtype=float)
        if t.shape != (s.m,) * s.N + (s.d,) * s.N:
            raise InvalidArgument(f"coefficient tensor must have shape {(s.m,) * s.N + (s.d,) * s.N}")
        object.__setattr__(self, "coefficients", t)

    def value(self, b: Behavior) -> float:
        """Bell expression on a behavior whose keys are per-party setting indices."""
        total = 0.0
        for key, tab in zip(b.keys, b.tables):
            total += float(np.sum(self.coefficients[tuple(key)] * tab))
        return total


def deterministic_strategies(m: int, d: int) -> np.ndarray:
    """All maps ``settings -> outcomes`` as one-hot arrays, shape ``(d^m, m, d)``."""
    idx = np.indices((d,) * m).reshape(m, -1).T
    out = np.zeros((idx.shape[0], m, d))
    for x in range(m):
        out[np.arange(idx.shape[0]), x, idx[:, x]] = 1.0
    return out


def local_bound(ineq: BellInequality, max_vertices: int = MAX_VERTICES) -> float:
    """Maximum of the expression over deterministic local strategies."""
    s = ineq.scenario
    per_party = s.d**s.m
    if per_party**s.N > max_vertices:
        raise CapacityExceeded(f"{per_party**s.N} deterministic vertices exceed the cap {max_vertices}")
    strat = deterministic_strategies(s.m, s.d)
    letters = string.ascii_letters
    n = s.N
    sv, xv, av = letters[:n], letters[n : 2 * n], letters[2 * n : 3 * n]
    expr = f"{xv}{av}," + ",".join(f"{sv[i]}{xv[i]}{av[i]}" for i in range(n)) + f"->{sv}"
    vals = np.einsum(expr, ineq.coefficients, *([strat] * n), optimize=True)
    return float(vals.max())


CHSH_SIGNS = np.array([[1.0, 1.0], [1.0, -1.0]])


def chsh_correlator_form() -> BellInequality:
    """``<A1B1> + <A1B2> + <A2B1> - <A2B2> <= 2`` as a tensor on probabilities."""
    parity = np.array([[1.0, -1.0], [-1.0, 1.0]])
    t = CHSH_SIGNS[:, :, None, None] * parity[None, None, :, :]
    return BellInequality(Scenario(2, 2, 2), t)


def chsh_probability_form() -> BellInequality:
    """``sum_{xy} p(a xor b = x y | x y) <= 3`` with settings and outcomes labelled 0, 1."""
    t = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                t[x, y, a, (a + x * y) % 2] = 1.0
    return BellInequality(Scenario(2, 2, 2), t)


def correlation_tensor(rho) -> np.ndarray:
    """``T_ij = Tr(rho sigma_i (x) sigma_j)`` of a two-qubit state."""
    mat = np.asarray(getattr(rho, "mat", rho), dtype=complex)
    if mat.shape != (4, 4):
        raise InvalidArgument("CHSH tools act on two-qubit states")
    return np.array([[np.trace(mat @ np.kron(a, b)).real for b in qcore.PAULIS] for a in qcore.PAULIS])


def chsh_value(rho, a1, a2, b1, b2) -> float:
    """``|E11 + E12 + E21 - E22|`` with ``E_xy = a_x^T T b_y``."""
    t = correlation_tensor(rho)
    a = [np.asarray(v, dtype=float) for v in (a1, a2)]
    b = [np.asarray(v, dtype=float) for v in (b1, b2)]
    e = np.array([[a[x] @ t @ b[y] for y in range(2)] for x in range(2)])
    return float(abs(np.sum(CHSH_SIGNS * e)))


def _unit(v):
    n = np.linalg.norm(v)
    return v / n if n > 1e-300 else None


def maximize_chsh(rho, restarts: int = 20, seed: int = 0, tol: float = 1e-12, max_iter: int = 1000) -> dict:
    """Best CHSH value over qubit settings by alternating exact maximization.

    For fixed Alice settings the best Bob settings are the normalized
    ``T^T(a1 + a2)`` and ``T^T(a1 - a2)``, and symmetrically for Alice.
    Each sweep never decreases the value; the best of ``restarts``
    random starts is returned.
    """
    t = correlation_tensor(rho)
    rng = np.random.default_rng(seed)
    best = {"max_value": 0.0, "settings": None}
    if np.max(np.abs(t)) < 1e-15:
        z = [0.0, 0.0, 1.0]
        best["settings"] = {"a1": z, "a2": z, "b1": z, "b2": z}
        return best
    for _ in range(restarts):
        a1, a2 = qcore.uniform_sphere(2, rng)
        value = -np.inf
        for _ in range(max_iter):
            b1, b2 = _unit(t.T @ (a1 + a2)), _unit(t.T @ (a1 - a2))
            if b1 is None or b2 is None:
                break
            na1, na2 = _unit(t @ (b1 + b2)), _unit(t @ (b1 - b2))
            if na1 is None or na2 is None:
                break
            a1, a2 = na1, na2
            new = (a1 + a2) @ t @ b1 + (a1 - a2) @ t @ b2
            if new - value < tol:
                value = new
                break
            value = new
        if b1 is None or b2 is None or not np.isfinite(value):
            continue
        if value > best["max_value"]:
            best = {
                "max_value": float(value),
                "settings": {"a1": a1.tolist(), "a2": a2.tolist(), "b1": b1.tolist(), "b2": b2.tolist()},
            }
    return best


def kg_constants() -> dict:
    """Stored Grothendieck-constant bounds and Werner-state thresholds tied to them."""
    return {
        "K_G_lower": 1.6770,
        "K_G_upper": 1.7822,
        "K_G3_upper": 1.5163,
        "K_G8_upper": 1.6641,
        "K_G2": float(np.sqrt(2.0)),
        "werner_local_from_K_G3": 0.6595,
        "werner_local_from_K_G8": 1 / 1.6641,
        "werner_chsh_threshold": float(1 / np.sqrt(2.0)),
        "werner_nonlocal_known": 0.7056,
    }


def werner_region_chain() -> list:
    """Ordered thresholds for two-qubit Werner states, smallest first."""
    k = kg_constants()
    return [
        ("separable", 1 / 3),
        ("povm-local", 5 / 12),
        ("pm-local-werner", 1 / 2),
        ("pm-local-toner", k["werner_local_from_K_G3"]),
        ("nonlocal-known", k["werner_nonlocal_known"]),
        ("chsh", k["werner_chsh_threshold"]),
    ]
