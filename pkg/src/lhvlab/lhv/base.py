"""Common interface of all local hidden-variable models.

A model draws a batch of hidden states and answers, for each party and
measurement, with a matrix of response probabilities over the fine-grained
effects of that measurement (one row per hidden state). Responses of one
party never look at another party's measurement.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import InvalidArgument, InvalidUse
from ..measurements import Measurement

RESPONSE_TOL = 1e-12


@dataclass(frozen=True)
class HiddenState:
    """A batch of hidden states.

    ``kind`` is one of ``ket``, ``bloch``, ``gaussian-stream`` or
    ``composite``; ``data`` maps field names to arrays whose first axis
    runs over the batch, ``meta`` holds batch-independent values.
    """

    kind: str
    data: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(next(iter(self.data.values())))

    def __getitem__(self, key: str) -> np.ndarray:
        return self.data[key]

    def take(self, rows) -> "HiddenState":
        return HiddenState(self.kind, {k: v[rows] for k, v in self.data.items()}, self.meta)


class LocalModel:
    """Base class: subclasses implement :meth:`sample` and :meth:`_respond`."""

    name = "local-model"
    n_parties = 2
    abstain = False

    def sample(self, rng: np.random.Generator, n: int, settings=None) -> HiddenState:
        raise NotImplementedError

    def _respond(self, party: int, m: Measurement, hidden: HiddenState) -> np.ndarray:
        raise NotImplementedError

    def check(self, party: int, m: Measurement) -> None:
        """Raise :class:`InvalidUse` if ``m`` lies outside the model's scope."""

    def respond(self, party: int, m: Measurement, hidden: HiddenState) -> np.ndarray:
        """Response probabilities, shape ``(len(hidden), m.n_effects)``."""
        if not 0 <= party < self.n_parties:
            raise InvalidArgument(f"party {party} out of range for {self.n_parties} parties")
        self.check(party, m)
        return self._respond(party, m, hidden)

    def respond_resolved(self, party: int, m: Measurement, hidden: HiddenState) -> np.ndarray:
        """Responses split by protocol branch, shape ``(n, branches, n_effects)``.

        Models without internal branching have a single branch.
        """
        return self.respond(party, m, hidden)[:, None, :]

    def n_branches(self, party: int) -> int:
        return 1

    def descriptor(self) -> dict:
        return {"model": self.name}

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)


def require_projective(m: Measurement, who: str) -> None:
    if not m.projective:
        raise InvalidUse(f"{who} is only defined for projective measurements")


def require_qubit(m: Measurement, who: str) -> None:
    if m.d != 2:
        raise InvalidUse(f"{who} acts on qubits, got dimension {m.d}")


def require_dim(m: Measurement, d: int, who: str) -> None:
    if m.d != d:
        raise InvalidUse(f"{who} expects dimension {d}, got {m.d}")


def check_responses(probs: np.ndarray, abstain: bool = False, tol: float = RESPONSE_TOL) -> float:
    """Largest violation of the response-vector conditions (0 when valid)."""
    neg = max(0.0, -float(probs.min()))
    sums = probs.sum(axis=-1)
    if abstain:
        over = max(0.0, float(sums.max()) - 1)
        return max(neg, over)
    return max(neg, float(np.max(np.abs(sums - 1))))


def settings_per_party(settings: Sequence[Sequence[Measurement]] | None, party: int):
    """Distinct measurements of one party in a list of setting tuples."""
    if settings is None:
        return []
    seen, out = set(), []
    for tup in settings:
        m = tup[party]
        if id(m) not in seen:
            seen.add(id(m))
            out.append(m)
    return out
