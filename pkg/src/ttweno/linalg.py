"""Truncated SVD with an absolute Frobenius tail bound.

Small matrices go straight to LAPACK.  Large ones use a randomized range
finder with power iterations; the discarded tail is controlled exactly via
||A||_F^2 - sum(kept sigma^2), so the rank choice never relies on unseen
singular values.  The sketch size doubles until the tolerance is met with
an oversampling margin.
"""

from __future__ import annotations

import numpy as np

from .tt_core import _rank_chop

_DIRECT_CUTOFF = 160
_OVERSAMPLE = 8


def truncated_svd(a: np.ndarray, delta: float, rmax: int | None = None):
    """Factors (u, s, vt) with ||a - u s vt||_F <= delta (ranks capped at rmax)."""
    m, n = a.shape
    if min(m, n) <= _DIRECT_CUTOFF:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
        r = _rank_chop(s, delta, rmax)
        return u[:, :r], s[:r], vt[:r]

    fro2 = float(np.sum(a * a))
    if fro2 == 0.0:
        return (np.zeros((m, 1)), np.zeros(1), np.zeros((1, n)))

    rng = np.random.default_rng(12345)
    k = 32
    while True:
        k = min(k, min(m, n))
        u, s, vt = _randomized_svd(a, k, rng)
        tail2 = fro2 - np.cumsum(s * s)
        tail = np.sqrt(np.maximum(tail2, 0.0))
        r = None
        for i in range(s.size):
            if tail[i] <= delta:
                r = i + 1
                break
        exhausted = k >= min(m, n)
        if r is not None and (exhausted or r <= k - _OVERSAMPLE):
            r = max(1, min(r, rmax or r))
            return u[:, :r], s[:r], vt[:r]
        if exhausted or (rmax is not None and k >= rmax + _OVERSAMPLE):
            r = _rank_chop(s, delta, rmax)
            return u[:, :r], s[:r], vt[:r]
        k *= 2


def _randomized_svd(a: np.ndarray, k: int, rng, n_power: int = 2):
    m, n = a.shape
    transpose = m < n
    if transpose:
        a = a.T
        m, n = n, m
    # range finder on the tall orientation
    q = np.linalg.qr(a @ rng.standard_normal((n, k)))[0]
    for _ in range(n_power):
        q = np.linalg.qr(a.T @ q)[0]
        q = np.linalg.qr(a @ q)[0]
    b = q.T @ a
    ub, s, vt = np.linalg.svd(b, full_matrices=False)
    u = q @ ub
    if transpose:
        return vt.T, s, u.T
    return u, s, vt
