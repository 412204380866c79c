"""Behaviors (conditional outcome tables), the Born rule, comparison and no-signalling."""
from __future__ import annotations

import itertools
import json
import string
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .. import qcore
from ..errors import InvalidArgument
from ..measurements import Measurement

MATCH_FLOOR = 1e-3
N_SIGMA = 4.0
EXACT_TOL = 1e-10


@dataclass(frozen=True)
class Scenario:
    """``N`` parties, at most ``m`` settings each, at most ``d`` outcomes per setting."""

    N: int
    m: int
    d: int

    def __post_init__(self):
        if min(self.N, self.m, self.d) < 1:
            raise InvalidArgument("scenario sizes must be positive")


@dataclass(frozen=True)
class Settings:
    """Measurements available to each party and the setting tuples that are used.

    ``keys[j]`` lists, per party, the index into ``per_party`` of the
    measurement used in setting tuple ``j``.
    """

    per_party: tuple
    keys: tuple

    @classmethod
    def product(cls, per_party: Sequence[Sequence[Measurement]]) -> "Settings":
        lists = tuple(tuple(ms) for ms in per_party)
        keys = tuple(itertools.product(*[range(len(ms)) for ms in lists]))
        return cls(lists, keys)

    @classmethod
    def paired(cls, per_party: Sequence[Sequence[Measurement]]) -> "Settings":
        """Setting tuple ``j`` uses measurement ``j`` of every party."""
        lists = tuple(tuple(ms) for ms in per_party)
        n = {len(ms) for ms in lists}
        if len(n) != 1:
            raise InvalidArgument("paired settings need equally many measurements per party")
        return cls(lists, tuple((j,) * len(lists) for j in range(n.pop())))

    @property
    def n_parties(self) -> int:
        return len(self.per_party)

    def measurements(self, key) -> tuple:
        return tuple(self.per_party[p][i] for p, i in enumerate(key))

    def tuples(self) -> list[tuple]:
        return [self.measurements(k) for k in self.keys]

    def shape(self, key) -> tuple:
        return tuple(m.n_outcomes for m in self.measurements(key))

    def scenario(self) -> Scenario:
        m = max(len(ms) for ms in self.per_party)
        d = max(x.n_outcomes for ms in self.per_party for x in ms)
        return Scenario(self.n_parties, m, d)


@dataclass
class Behavior:
    """Table ``p(a_1..a_N | x_1..x_N)`` for a list of setting tuples.

    ``tables[j]`` has one axis per party. When ``abstain`` is set each axis
    carries one extra trailing entry for "no answer". ``std_errors`` is
    ``None`` for exact behaviors.
    """

    keys: list
    tables: list
    std_errors: list | None = None
    provenance: dict = field(default_factory=lambda: {"kind": "exact"})
    abstain: bool = False

    @property
    def n_parties(self) -> int:
        return len(self.keys[0])

    @property
    def is_exact(self) -> bool:
        return self.std_errors is None

    def table(self, key) -> np.ndarray:
        return self.tables[self.keys.index(tuple(key))]

    def accepted(self) -> "Behavior":
        """Condition on every party answering; SEs are rescaled to first order."""
        if not self.abstain:
            return self
        tabs, ses = [], []
        for j, t in enumerate(self.tables):
            core = t[tuple(slice(0, s - 1) for s in t.shape)]
            acc = core.sum()
            tabs.append(core / acc)
            if self.std_errors is not None:
                n = self.provenance.get("samples", 1) * acc
                ses.append(np.sqrt(tabs[-1] * (1 - tabs[-1]) / max(n, 1)))
        return Behavior(list(self.keys), tabs, ses if self.std_errors is not None else None,
                        dict(self.provenance, conditioned="accepted"), False)

    def marginal(self, parties: Sequence[int]) -> "Behavior":
        parties = sorted(parties)
        drop = tuple(i for i in range(self.n_parties) if i not in parties)
        keys = [tuple(k) for k in self.keys]
        tabs = [t.sum(axis=drop) for t in self.tables]
        ses = None
        if self.std_errors is not None:
            n = self.provenance.get("samples", 1)
            ses = [np.sqrt(np.clip(t * (1 - t), 0, None) / n) for t in tabs]
        return Behavior(keys, tabs, ses, dict(self.provenance), self.abstain)

    def correlator(self, key) -> float:
        """``<A_1 ... A_N>`` with outcome 0 read as +1 and 1 as -1 (two-outcome settings)."""
        t = self.table(key)
        if self.abstain:
            t = t[tuple(slice(0, s - 1) for s in t.shape)]
            t = t / t.sum()
        if any(s != 2 for s in t.shape):
            raise InvalidArgument("correlators need two outcomes per party")
        sign = np.array([1.0, -1.0])
        out = t
        for _ in range(t.ndim):
            out = np.tensordot(out, sign, axes=([0], [0]))
        return float(out)

    def normalization_residual(self) -> float:
        return max(abs(float(t.sum()) - 1.0) for t in self.tables)

    def to_dict(self) -> dict:
        out = {
            "keys": [list(k) for k in self.keys],
            "tables": [np.round(t, 12).tolist() for t in self.tables],
            "provenance": self.provenance,
            "abstain": self.abstain,
        }
        if self.std_errors is not None:
            out["std_errors"] = [np.round(s, 12).tolist() for s in self.std_errors]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# -- Born rule ----------------------------------------------------------------------------

def born_table(rho, measurements: Sequence[Measurement]) -> np.ndarray:
    """``Tr[(A_a1 (x) ... (x) A_aN) rho]`` for all coarse outcomes."""
    op = qcore.as_operator(rho)
    n = len(measurements)
    dims = tuple(m.d for m in measurements)
    if int(np.prod(dims)) != op.side:
        raise InvalidArgument(f"measurement dimensions {dims} do not fit the state {op.dims}")
    t = op.mat.reshape(dims + dims)
    letters = string.ascii_letters
    rows, cols, outs = letters[:n], letters[n : 2 * n], letters[2 * n : 3 * n]
    # sum_{ij} A[a]_{ji} rho_{ij}: element axes (out, col-of-rho, row-of-rho)
    terms = [f"{outs[p]}{cols[p]}{rows[p]}" for p in range(n)]
    expr = f"{rows}{cols}," + ",".join(terms) + f"->{outs}"
    val = np.einsum(expr, t, *[m.elements() for m in measurements], optimize=True)
    return val.real


def born_behavior(rho, settings: Settings) -> Behavior:
    tables = [born_table(rho, settings.measurements(k)) for k in settings.keys]
    return Behavior([tuple(k) for k in settings.keys], tables, None, {"kind": "exact", "source": "born"})


# -- comparison ---------------------------------------------------------------------------

def _std(b: Behavior, j: int) -> np.ndarray:
    if b.std_errors is None:
        return np.zeros_like(b.tables[j])
    return b.std_errors[j]


def compare(b1: Behavior, b2: Behavior, n_sigma: float = N_SIGMA, floor: float = MATCH_FLOOR,
            with_cells: bool = False) -> dict:
    """Cellwise agreement test: pass iff every ``|delta| < max(n_sigma * SE, floor)``.

    ``SE`` combines the standard errors of both behaviors (zero for exact ones).
    """
    if [tuple(k) for k in b1.keys] != [tuple(k) for k in b2.keys]:
        raise InvalidArgument("behaviors cover different setting tuples")
    max_dev, max_z, n_fail, n_cells = 0.0, 0.0, 0, 0
    worst = None
    cells = []
    for j, key in enumerate(b1.keys):
        t1, t2 = b1.tables[j], b2.tables[j]
        if t1.shape != t2.shape:
            raise InvalidArgument(f"tables for setting {key} differ in shape")
        se = np.sqrt(_std(b1, j) ** 2 + _std(b2, j) ** 2)
        dev = np.abs(t1 - t2)
        tol = np.maximum(n_sigma * se, floor)
        z = np.divide(dev, se, out=np.zeros_like(dev), where=se > 0)
        fails = dev >= tol
        n_fail += int(fails.sum())
        n_cells += dev.size
        if dev.max() >= max_dev:
            idx = np.unravel_index(np.argmax(dev), dev.shape)
            max_dev = float(dev.max())
            worst = {"setting": list(map(int, key)), "outcome": list(map(int, idx))}
        max_z = max(max_z, float(z.max()))
        if with_cells:
            for idx in np.ndindex(dev.shape):
                cells.append({
                    "setting": list(map(int, key)),
                    "outcome": list(map(int, idx)),
                    "estimate": round(float(t1[idx]), 10),
                    "reference": round(float(t2[idx]), 10),
                    "std_error": round(float(se[idx]), 10),
                    "z": round(float(z[idx]), 4),
                })
    report = {
        "pass": n_fail == 0,
        "max_abs_dev": max_dev,
        "max_z": max_z,
        "n_cells": n_cells,
        "n_fail": n_fail,
        "worst": worst,
        "rule": f"|delta| < max({n_sigma:g} SE, {floor:g})",
    }
    if with_cells:
        report["cells"] = cells
    return report


# -- no-signalling ------------------------------------------------------------------------

def no_signalling_check(b: Behavior, n_sigma: float = N_SIGMA, floor: float = MATCH_FLOOR) -> dict:
    """Marginal of every proper party subset must not depend on the others' settings.

    Exact behaviors are held to ``1e-10``; Monte-Carlo ones to
    ``max(n_sigma * SE, floor)`` on the difference of two marginals.
    The first violation found is returned as the witness.
    """
    n = b.n_parties
    base = b.accepted() if b.abstain else b
    samples = base.provenance.get("samples")
    worst = 0.0
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            drop = tuple(i for i in range(n) if i not in subset)
            groups: dict = {}
            for j, key in enumerate(base.keys):
                sub = tuple(key[i] for i in subset)
                groups.setdefault(sub, []).append((key, base.tables[j].sum(axis=drop)))
            for sub, items in groups.items():
                key0, m0 = items[0]
                for key1, m1 in items[1:]:
                    diff = np.abs(m0 - m1)
                    if base.is_exact:
                        tol = np.full(diff.shape, EXACT_TOL)
                    else:
                        se = np.sqrt((m0 * (1 - m0) + m1 * (1 - m1)) / samples)
                        tol = np.maximum(n_sigma * se, floor)
                    worst = max(worst, float(diff.max()))
                    if np.any(diff >= tol):
                        idx = np.unravel_index(np.argmax(diff - tol), diff.shape)
                        return {
                            "pass": False,
                            "max_abs_dev": float(diff.max()),
                            "witness": {
                                "parties": list(subset),
                                "outcome": list(map(int, idx)),
                                "settings": [list(map(int, key0)), list(map(int, key1))],
                                "marginals": [float(m0[idx]), float(m1[idx])],
                            },
                        }
    return {"pass": True, "max_abs_dev": worst, "witness": None}
