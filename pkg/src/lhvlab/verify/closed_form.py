"""Closed-form outcome probabilities of the state families, evaluated without the Born rule."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidArgument
from ..measurements import Measurement
from .behavior import Behavior, Settings, born_table


def _gram(m1: Measurement, m2: Measurement) -> np.ndarray:
    """``Tr(P_i Q_j) = |<p_i|q_j>|^2`` for all effect pairs."""
    return np.abs(m1.vectors.conj() @ m2.vectors.T) ** 2


def _coarse2(m1: Measurement, m2: Measurement, fine: np.ndarray) -> np.ndarray:
    return m2.coarse(m1.coarse(fine.T).T)


def werner_pm_table(m1: Measurement, m2: Measurement) -> np.ndarray:
    """``(1/d^2)[(d+1)/d - Tr(P_a Q_b)]`` at ``p = (d-1)/d``; Bob's effects carry their weight."""
    d = m1.d
    fine = (m2.weights[None, :] / d**2) * ((d + 1) / d - _gram(m1, m2))
    fine = fine * m1.weights[:, None]
    return _coarse2(m1, m2, fine)


def werner_table(m1: Measurement, m2: Measurement, p: float) -> np.ndarray:
    """``eta_a xi_b / (d(d-1)) [(d-1+p)/d - p Tr(P_a Q_b)]`` for any ``p``."""
    d = m1.d
    w = np.outer(m1.weights, m2.weights) / (d * (d - 1))
    return _coarse2(m1, m2, w * ((d - 1 + p) / d - p * _gram(m1, m2)))


def isotropic_table(m1: Measurement, m2: Measurement, p: float) -> np.ndarray:
    """``eta_a xi_b [p |<p_a*|q_b>|^2 / d + (1-p)/d^2]``."""
    d = m1.d
    overlap = np.abs(m1.vectors @ m2.vectors.T) ** 2  # |sum_i p_i q_i|^2 = |<p*|q>|^2
    w = np.outer(m1.weights, m2.weights)
    return _coarse2(m1, m2, w * (p * overlap / d + (1 - p) / d**2))


def toth_acin_table(ms, a=(1.0, 1.0, 1.0)) -> np.ndarray:
    """``1/8 - (1/16)(p'.q + p'.r) + (1/24) q.r`` with ``p' = a * p`` (qubit PMs)."""
    ma, mb, mc = ms
    a = np.asarray(a, dtype=float)
    p, q, r = (m.blochs() for m in ms)
    pp = p * a
    fine = (
        1 / 8
        - (1 / 16) * ((pp @ q.T)[:, :, None] + (pp @ r.T)[:, None, :])
        + (1 / 24) * (q @ r.T)[None, :, :]
    )
    fine = fine * np.einsum("i,j,k->ijk", ma.weights, mb.weights, mc.weights)
    out = np.zeros((ma.n_outcomes, mb.n_outcomes, mc.n_outcomes))
    np.add.at(out, np.ix_(ma.groups, mb.groups, mc.groups), fine)
    return out


def hirsch_table(rho0, sigma_a, sigma_b, m1: Measurement, m2: Measurement, terms: bool = False):
    """Four-term probability of the lifted state from statistics of ``rho0``.

    ``(1/d^2)[Tr(A (x) B rho0) + (d-1)(Tr(A rho_A)Tr(B sigma_B) + Tr(A sigma_A)Tr(B rho_B))
    + (d-1)^2 Tr(A sigma_A)Tr(B sigma_B)]``. With ``terms`` the four summands
    are returned separately in the order (both direct, A direct, B direct, neither).
    """
    from ..states import reductions

    d = m1.d
    joint = born_table(rho0, (m1, m2))
    ra, rb = reductions(rho0)
    ea, eb = m1.elements(), m2.elements()
    tr = lambda els, s: np.einsum("kij,ji->k", els, np.asarray(getattr(s, "mat", s))).real  # noqa: E731
    a_rho, b_rho = tr(ea, ra), tr(eb, rb)
    a_sig, b_sig = tr(ea, sigma_a), tr(eb, sigma_b)
    parts = np.stack([
        joint,
        (d - 1) * np.outer(a_rho, b_sig),
        (d - 1) * np.outer(a_sig, b_rho),
        (d - 1) ** 2 * np.outer(a_sig, b_sig),
    ]) / d**2
    return parts if terms else parts.sum(axis=0)


FAMILIES = ("werner-pm", "werner", "isotropic", "toth-acin", "hirsch")


def closed_form_behavior(family: str, settings: Settings, **params) -> Behavior:
    """Evaluate a family's closed form on every setting tuple.

    ``werner`` and ``isotropic`` take ``p``; ``toth-acin`` takes ``a``;
    ``hirsch`` takes ``rho0``, ``sigma_a`` and ``sigma_b``.
    """
    if family not in FAMILIES:
        raise InvalidArgument(f"no closed form for family {family!r}")
    tables = []
    for key in settings.keys:
        ms = settings.measurements(key)
        if family == "toth-acin":
            if len(ms) != 3:
                raise InvalidArgument("the three-qubit closed form needs three parties")
            tables.append(toth_acin_table(ms, params.get("a", (1.0, 1.0, 1.0))))
            continue
        if len(ms) != 2:
            raise InvalidArgument(f"family {family!r} is bipartite")
        m1, m2 = ms
        if family == "werner-pm":
            tables.append(werner_pm_table(m1, m2))
        elif family == "werner":
            tables.append(werner_table(m1, m2, params["p"]))
        elif family == "isotropic":
            tables.append(isotropic_table(m1, m2, params["p"]))
        else:
            tables.append(hirsch_table(params["rho0"], params["sigma_a"], params["sigma_b"], m1, m2))
    return Behavior([tuple(k) for k in settings.keys], tables, None, {"kind": "exact", "source": family})
