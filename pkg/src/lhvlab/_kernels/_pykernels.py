"""Pure-numpy reference implementations of the sampling kernels."""
from __future__ import annotations

import numpy as np


def abs2_overlaps(lam: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """``|<v_k|lam_n>|^2`` for every row of ``lam`` (n, d) and ``vecs`` (k, d)."""
    amp = lam @ vecs.conj().T
    return amp.real**2 + amp.imag**2


def sample_categorical(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index of the first cumulative probability exceeding ``u``.

    Rows summing to less than one leave room for an abstain outcome, reported
    as index ``k`` (the number of columns).
    """
    cum = np.cumsum(probs, axis=1)
    return np.sum(cum <= u[:, None], axis=1).astype(np.int64)


def argext_onehot(x: np.ndarray, maximize: bool) -> np.ndarray:
    idx = np.argmax(x, axis=1) if maximize else np.argmin(x, axis=1)
    out = np.zeros(x.shape, dtype=float)
    out[np.arange(x.shape[0]), idx] = 1.0
    return out


def joint_histogram(idx: np.ndarray, shape) -> np.ndarray:
    """Counts of the rows of ``idx`` (n, N) over a grid of the given shape."""
    flat = np.ravel_multi_index(tuple(idx.T), tuple(shape))
    return np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape).astype(np.int64)


def simplex_moments(e: np.ndarray) -> np.ndarray:
    """Sums and sums of squares of the four simplex integrands.

    Rows of ``e`` are iid exponentials; normalizing them gives flat-Dirichlet
    points ``u``. Rows of the result: u1 [u1 minimal], u1 [u1 >= 1/d],
    u1^2 [u1 >= 1/d], u1 [u1 maximal]; columns: sum, sum of squares.
    """
    d = e.shape[1]
    u = e / e.sum(axis=1, keepdims=True)
    u1 = u[:, 0]
    rest = u[:, 1:]
    vals = np.stack([
        u1 * (u1 <= rest.min(axis=1)),
        u1 * (u1 >= 1.0 / d),
        u1**2 * (u1 >= 1.0 / d),
        u1 * (u1 >= rest.max(axis=1)),
    ])
    return np.stack([vals.sum(axis=1), (vals**2).sum(axis=1)], axis=1)
