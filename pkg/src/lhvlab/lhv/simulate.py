"""Seeded Monte-Carlo simulation of a local model on a list of setting tuples."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import _kernels as K
from ..errors import InvalidArgument
from ..verify.behavior import Behavior, Settings
from .base import LocalModel

DEFAULT_CHUNK = 1 << 17
MIN_SAMPLES = 1


def worker_count() -> int:
    """Worker cap from ``LHVLAB_THREADS`` (default: all CPUs)."""
    env = os.environ.get("LHVLAB_THREADS")
    cpus = os.cpu_count() or 1
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise InvalidArgument(f"LHVLAB_THREADS must be an integer, got {env!r}") from exc
        return max(1, min(n, cpus))
    return cpus


@dataclass
class SimulationResult:
    """Raw counts per setting tuple.

    ``counts[j]`` has one axis per party over coarse outcomes (plus abstain
    when the model can abstain) followed by one axis per party over
    protocol branches.
    """

    settings: Settings
    counts: list
    samples: int
    seed: int
    abstain: bool
    branches: tuple

    def behavior(self) -> Behavior:
        n = self.samples
        npart = self.settings.n_parties
        tabs = [c.sum(axis=tuple(range(npart, 2 * npart))) / n for c in self.counts]
        ses = [np.sqrt(t * (1 - t) / n) for t in tabs]
        prov = {"kind": "mc", "samples": n, "seed": self.seed}
        return Behavior([tuple(k) for k in self.settings.keys], tabs, ses, prov, self.abstain)

    def branch_tables(self) -> list:
        """Frequencies per (outcomes..., branches...) cell."""
        return [c / self.samples for c in self.counts]


def _simulate_one(model: LocalModel, ms, samples, rng, chunk, resolve):
    npart = len(ms)
    out_dims = [m.n_outcomes + (1 if model.abstain else 0) for m in ms]
    br = [model.n_branches(p) if resolve else 1 for p in range(npart)]
    shape = tuple(out_dims) + tuple(br)
    counts = np.zeros(shape, dtype=np.int64)
    # lookup from flat (branch, effect) index to (outcome, branch); the last row is "abstain"
    lookups = []
    for p, m in enumerate(ms):
        k = m.n_effects
        outc = np.concatenate([np.tile(m.groups, br[p]), [m.n_outcomes]])
        brn = np.concatenate([np.repeat(np.arange(br[p]), k), [0]])
        lookups.append((outc.astype(np.int64), brn.astype(np.int64)))
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        hidden = model.sample(rng, n, settings=[ms])
        idx = np.empty((n, 2 * npart), dtype=np.int64)
        for p, m in enumerate(ms):
            if resolve:
                probs = model.respond_resolved(p, m, hidden).reshape(n, -1)
            else:
                probs = model.respond(p, m, hidden)
            pick = K.sample_categorical(np.ascontiguousarray(probs, dtype=float), rng.random(n))
            outc, brn = lookups[p]
            idx[:, p] = outc[pick]
            idx[:, npart + p] = brn[pick]
        counts += K.joint_histogram(idx, shape)
        done += n
    return counts


def simulate(
    model: LocalModel,
    settings: Settings,
    samples: int,
    seed: int,
    *,
    chunk: int = DEFAULT_CHUNK,
    resolve_branches: bool = False,
    workers: int | None = None,
) -> SimulationResult:
    """Run ``samples`` rounds of ``model`` for every setting tuple.

    Setting tuple ``j`` draws from its own stream spawned from ``seed``,
    so results do not depend on the number of workers or on chunking
    across tuples.
    """
    if samples < MIN_SAMPLES:
        raise InvalidArgument("need at least one sample")
    if settings.n_parties != model.n_parties:
        raise InvalidArgument(f"model has {model.n_parties} parties, settings have {settings.n_parties}")
    tuples = settings.tuples()
    for ms in tuples:
        for p, m in enumerate(ms):
            model.check(p, m)
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(len(tuples))]
    workers = workers or worker_count()

    def run(j):
        return _simulate_one(model, tuples[j], samples, streams[j], chunk, resolve_branches)

    if workers > 1 and len(tuples) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, range(len(tuples))))
    else:
        counts = [run(j) for j in range(len(tuples))]
    branches = tuple(model.n_branches(p) if resolve_branches else 1 for p in range(model.n_parties))
    return SimulationResult(settings, counts, samples, seed, model.abstain, branches)


def simulate_behavior(model: LocalModel, settings: Settings, samples: int, seed: int, **kw) -> Behavior:
    return simulate(model, settings, samples, seed, **kw).behavior()
