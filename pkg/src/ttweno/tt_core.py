"""Three-core tensor-train representation of 3D fields.

A field X(i,j,k) is stored as three cores G1 (1, n1, r1), G2 (r1, n2, r2),
G3 (r2, n3, m) so that X(i,j,k) = G1[0,i,:] @ G2[:,j,:] @ G3[:,k,:].  The
trailing size m is 1 for scalar fields and >1 for stacked fields (several
outputs sharing the spatial factors).  All operations are pure: they return
new values and never mutate their inputs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

GHOST = 3  # padding layers per side used by the finite-difference stencils


class TTError(ValueError):
    pass


@dataclass
class TensorTrain3:
    core1: np.ndarray  # (1, n1, r1)
    core2: np.ndarray  # (r1, n2, r2)
    core3: np.ndarray  # (r2, n3, m)

    def __post_init__(self):
        self.core1 = np.ascontiguousarray(self.core1, dtype=np.float64)
        self.core2 = np.ascontiguousarray(self.core2, dtype=np.float64)
        self.core3 = np.ascontiguousarray(self.core3, dtype=np.float64)
        if self.core1.ndim != 3 or self.core2.ndim != 3 or self.core3.ndim != 3:
            raise TTError("cores must be 3-index arrays")
        if self.core1.shape[0] != 1:
            raise TTError("core1 must have leading size 1")
        if self.core1.shape[2] != self.core2.shape[0]:
            raise TTError("rank mismatch between core1 and core2")
        if self.core2.shape[2] != self.core3.shape[0]:
            raise TTError("rank mismatch between core2 and core3")

    @property
    def mode_sizes(self) -> tuple[int, int, int]:
        return (self.core1.shape[1], self.core2.shape[1], self.core3.shape[1])

    @property
    def ranks(self) -> tuple[int, int]:
        return (self.core1.shape[2], self.core2.shape[2])

    @property
    def trailing(self) -> int:
        return self.core3.shape[2]

    @property
    def storage_size(self) -> int:
        """Number of stored elements across the three cores."""
        return self.core1.size + self.core2.size + self.core3.size

    def validate(self) -> None:
        """Check the finiteness invariant (O(storage) cost)."""
        for c in (self.core1, self.core2, self.core3):
            if not np.all(np.isfinite(c)):
                raise TTError("non-finite entries in TT core")

    def copy(self) -> "TensorTrain3":
        return TensorTrain3(self.core1.copy(), self.core2.copy(), self.core3.copy())


# ---------------------------------------------------------------------------
# constructors

def tt_zeros(shape, m: int = 1) -> TensorTrain3:
    n1, n2, n3 = shape
    return TensorTrain3(
        np.zeros((1, n1, 1)), np.zeros((1, n2, 1)), np.zeros((1, n3, m))
    )


def tt_ones(shape, m: int = 1) -> TensorTrain3:
    n1, n2, n3 = shape
    return TensorTrain3(
        np.ones((1, n1, 1)), np.ones((1, n2, 1)), np.ones((1, n3, m))
    )


def tt_rank1(a, b, c) -> TensorTrain3:
    """Rank-(1,1) TT of the outer product a(i) b(j) c(k).

    ``c`` may be 2-D (n3, m) to produce a stacked field.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if c.ndim == 1:
        c = c[:, None]
    return TensorTrain3(a[None, :, None], b[None, :, None], c[None, :, :])


def _rank_chop(s: np.ndarray, delta: float, rmax: int | None = None) -> int:
    """Smallest kept rank such that the discarded singular-value tail is <= delta."""
    if s.size == 0:
        return 1
    tail = np.sqrt(np.cumsum(s[::-1] ** 2))[::-1]  # tail[r] = ||s[r:]||
    r = s.size
    for k in range(s.size):
        if tail[k] <= delta:
            r = k
            break
    r = max(1, r)
    if rmax is not None:
        r = min(r, rmax)
    return min(r, s.size)


def tt_from_full(full: np.ndarray, eps: float) -> TensorTrain3:
    """TT-SVD of a dense array with relative Frobenius tolerance ``eps``.

    ``full`` has shape (n1, n2, n3) or (n1, n2, n3, m).  The tolerance is
    distributed as eps/sqrt(2) per unfolding.  Used for oracles and tests;
    the solver path never materializes dense tensors.
    """
    full = np.asarray(full, dtype=np.float64)
    if not np.all(np.isfinite(full)):
        raise TTError("tt_from_full: input contains non-finite values")
    if full.ndim == 3:
        full = full[..., None]
    n1, n2, n3, m = full.shape
    delta = eps * np.linalg.norm(full) / np.sqrt(2.0)

    mat = full.reshape(n1, n2 * n3 * m)
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    r1 = _rank_chop(s, delta)
    core1 = u[:, :r1].reshape(1, n1, r1)
    rest = (s[:r1, None] * vt[:r1]).reshape(r1 * n2, n3 * m)

    u, s, vt = np.linalg.svd(rest, full_matrices=False)
    r2 = _rank_chop(s, delta)
    core2 = u[:, :r2].reshape(r1, n2, r2)
    core3 = (s[:r2, None] * vt[:r2]).reshape(r2, n3, m)
    return TensorTrain3(core1, core2, core3)


# ---------------------------------------------------------------------------
# evaluation

def tt_eval(tt: TensorTrain3, i: int, j: int, k: int) -> float | np.ndarray:
    """Single element (a length-m vector when the trailing size is not 1)."""
    n1, n2, n3 = tt.mode_sizes
    if not (0 <= i < n1 and 0 <= j < n2 and 0 <= k < n3):
        raise IndexError(f"index {(i, j, k)} out of range for modes {(n1, n2, n3)}")
    v = tt.core1[0, i, :] @ tt.core2[:, j, :] @ tt.core3[:, k, :]
    return float(v[0]) if tt.trailing == 1 else v


def tt_eval_batch(tt: TensorTrain3, idx: np.ndarray, chunk: int = 65536) -> np.ndarray:
    """Evaluate at a batch of (i,j,k) triples; returns (p,) or (p, m)."""
    idx = np.asarray(idx)
    p = idx.shape[0]
    m = tt.trailing
    out = np.empty((p, m))
    for lo in range(0, p, chunk):
        hi = min(lo + chunk, p)
        g1 = tt.core1[0, idx[lo:hi, 0], :]            # (c, r1)
        g2 = tt.core2[:, idx[lo:hi, 1], :]            # (r1, c, r2)
        g3 = tt.core3[:, idx[lo:hi, 2], :]            # (r2, c, m)
        tmp = (g1[:, :, None] * g2.transpose(1, 0, 2)).sum(axis=1)  # (c, r2)
        out[lo:hi] = (tmp[:, :, None] * g3.transpose(1, 0, 2)).sum(axis=1)
    return out[:, 0] if m == 1 else out


def tt_eval_grid(tt: TensorTrain3, idx1, idx2, idx3) -> np.ndarray:
    """Evaluate on the Cartesian product of index lists.

    Returns (len(idx1), len(idx2), len(idx3)) for scalar fields, with a
    trailing m axis otherwise.  This is the fast path for the structured
    index sets of cross interpolation.
    """
    g1 = tt.core1[0, idx1, :]                         # (p1, r1)
    g2 = tt.core2[:, idx2, :]                         # (r1, p2, r2)
    g3 = tt.core3[:, idx3, :]                         # (r2, p3, m)
    r1, p2, r2 = g2.shape
    p3 = g3.shape[1]
    m = tt.trailing
    x = g1 @ g2.reshape(r1, p2 * r2)                  # (p1, p2*r2)
    x = x.reshape(-1, r2) @ g3.reshape(r2, p3 * m)    # (p1*p2, p3*m)
    x = x.reshape(len(g1), p2, p3, m)
    return x[..., 0] if m == 1 else x


def tt_full(tt: TensorTrain3) -> np.ndarray:
    """Dense reconstruction (oracle/test use only)."""
    n1, n2, n3 = tt.mode_sizes
    return tt_eval_grid(tt, np.arange(n1), np.arange(n2), np.arange(n3))


# ---------------------------------------------------------------------------
# orthogonalization, norm, rounding

def _mode_matmul_right(core: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """Contract the right rank axis of a core with a matrix."""
    a, n, b = core.shape
    return (core.reshape(a * n, b) @ mat).reshape(a, n, -1)


def _mode_matmul_left(mat: np.ndarray, core: np.ndarray) -> np.ndarray:
    """Contract a matrix with the left rank axis of a core."""
    a, n, b = core.shape
    return (mat @ core.reshape(a, n * b)).reshape(-1, n, b)


def _right_orthogonalize(tt: TensorTrain3):
    """Return cores with core2, core3 right-orthogonal (norm carried into core1)."""
    c1, c2, c3 = tt.core1, tt.core2, tt.core3
    r2, n3, m = c3.shape
    q, r = np.linalg.qr(c3.reshape(r2, n3 * m).T)
    c3n = np.ascontiguousarray(q.T.reshape(-1, n3, m))
    c2n = _mode_matmul_right(c2, r.T)

    r1, n2, r2n = c2n.shape
    q, r = np.linalg.qr(c2n.reshape(r1, n2 * r2n).T)
    c2n = np.ascontiguousarray(q.T.reshape(-1, n2, r2n))
    c1n = _mode_matmul_right(c1, r.T)
    return c1n, c2n, c3n


def tt_norm(tt: TensorTrain3) -> float:
    """Frobenius norm of the represented tensor, via orthogonalization."""
    c1, _, _ = _right_orthogonalize(tt)
    return float(np.linalg.norm(c1))


def tt_round(tt: TensorTrain3, eps: float, rmax: int | None = None) -> TensorTrain3:
    """Recompress to smaller ranks with relative Frobenius error <= eps.

    One right-to-left orthogonalization sweep followed by one left-to-right
    truncation sweep; ranks never increase.
    """
    if eps < 0:
        raise TTError("rounding tolerance must be nonnegative")
    c1, c2, c3 = _right_orthogonalize(tt)
    norm = np.linalg.norm(c1)
    if norm == 0.0:
        return tt_zeros(tt.mode_sizes, tt.trailing)
    delta = eps * norm / np.sqrt(2.0)

    n1 = c1.shape[1]
    u, s, vt = np.linalg.svd(c1.reshape(n1, -1), full_matrices=False)
    r1 = _rank_chop(s, delta, rmax)
    c1 = np.ascontiguousarray(u[:, :r1].reshape(1, n1, r1))
    c2 = _mode_matmul_left(s[:r1, None] * vt[:r1], c2)

    r1n, n2, r2o = c2.shape
    u, s, vt = np.linalg.svd(c2.reshape(r1n * n2, r2o), full_matrices=False)
    r2 = _rank_chop(s, delta, rmax)
    c2 = np.ascontiguousarray(u[:, :r2].reshape(r1n, n2, r2))
    c3 = _mode_matmul_left(s[:r2, None] * vt[:r2], c3)
    return TensorTrain3(c1, c2, c3)


# ---------------------------------------------------------------------------
# arithmetic

def tt_add(a: TensorTrain3, b: TensorTrain3) -> TensorTrain3:
    """Exact elementwise sum; ranks add (round afterwards to recompress)."""
    if a.mode_sizes != b.mode_sizes or a.trailing != b.trailing:
        raise TTError(f"shape mismatch: {a.mode_sizes}x{a.trailing} vs "
                      f"{b.mode_sizes}x{b.trailing}")
    n1, n2, n3 = a.mode_sizes
    r1a, r2a = a.ranks
    r1b, r2b = b.ranks
    c1 = np.concatenate([a.core1, b.core1], axis=2)
    c2 = np.zeros((r1a + r1b, n2, r2a + r2b))
    c2[:r1a, :, :r2a] = a.core2
    c2[r1a:, :, r2a:] = b.core2
    c3 = np.concatenate([a.core3, b.core3], axis=0)
    return TensorTrain3(c1, c2, c3)


def tt_scale(a: TensorTrain3, s: float) -> TensorTrain3:
    """Multiply by a scalar (applied to core1; ranks unchanged)."""
    return TensorTrain3(a.core1 * float(s), a.core2, a.core3)


def tt_hadamard(a: TensorTrain3, b: TensorTrain3) -> TensorTrain3:
    """Exact elementwise product; ranks multiply."""
    if a.mode_sizes != b.mode_sizes:
        raise TTError(f"shape mismatch: {a.mode_sizes} vs {b.mode_sizes}")
    if a.trailing != 1 or b.trailing != 1:
        raise TTError("hadamard supports scalar fields only (trailing size 1)")

    def slicewise_kron(ca, cb):
        ra, n, rb = ca.shape[0] * cb.shape[0], ca.shape[1], ca.shape[2] * cb.shape[2]
        out = np.einsum("anb,cnd->acnbd", ca, cb).reshape(ra, n, rb)
        return out

    return TensorTrain3(
        slicewise_kron(a.core1, b.core1),
        slicewise_kron(a.core2, b.core2),
        slicewise_kron(a.core3, b.core3),
    )


def tt_shift(tt: TensorTrain3, axis: int, offset: int) -> TensorTrain3:
    """Translate along one axis: result(i,j,k) = tt at index + offset on ``axis``.

    Only the core of that axis changes; slots shifted in from beyond the
    array are zero-filled (the stencils never read them because boundary
    conditions populate three ghost layers first).
    """
    if abs(offset) > GHOST:
        raise TTError(f"shift offset {offset} exceeds ghost width {GHOST}")
    cores = [tt.core1, tt.core2, tt.core3]
    c = cores[axis]
    n = c.shape[1]
    nc = np.zeros_like(c)
    if offset >= 0:
        nc[:, : n - offset, :] = c[:, offset:, :]
    else:
        nc[:, -offset:, :] = c[:, : n + offset, :]
    cores[axis] = nc
    return TensorTrain3(*cores)


def tt_slice_modes(tt: TensorTrain3, sl1, sl2, sl3) -> TensorTrain3:
    """Restrict the mode indices (e.g. to the interior of a padded grid)."""
    return TensorTrain3(
        tt.core1[:, sl1, :], tt.core2[:, sl2, :], tt.core3[:, sl3, :]
    )


# ---------------------------------------------------------------------------
# max-abs estimation

def _fiber_ascent(tt: TensorTrain3, j: int, k: int, rounds: int = 6):
    """Coordinate ascent on |element| starting from column (j, k).

    Each step scans a whole fiber through the current pivot.  Returns the
    best (value, pivot) found; exact for rank-(1,1) fields.
    """
    n1, n2, n3 = tt.mode_sizes
    m = tt.trailing
    i = 0
    s = 0
    for _ in range(rounds):
        prev = (i, j, k, s)
        f = tt_eval_grid(tt, np.arange(n1), [j], [k])    # (n1, 1, 1[, m])
        f = f.reshape(n1, m)
        i, s = np.unravel_index(np.argmax(np.abs(f)), f.shape)
        f = tt_eval_grid(tt, [i], np.arange(n2), [k]).reshape(n2, m)
        j, s = np.unravel_index(np.argmax(np.abs(f)), f.shape)
        f = tt_eval_grid(tt, [i], [j], np.arange(n3)).reshape(n3, m)
        k, s = np.unravel_index(np.argmax(np.abs(f)), f.shape)
        if (i, j, k, s) == prev:
            break
    val = np.abs(tt_eval_grid(tt, [i], [j], [k])).max()
    return float(val), (int(i), int(j), int(k))


def tt_max_abs(tt: TensorTrain3, rng=None, n_starts: int = 12,
               power_iters: int = 50, stag_tol: float = 1e-10) -> float:
    """Estimate max |element| without dense reconstruction.

    Power iteration on the elementwise square concentrates a probe field on
    the dominant entry; multi-start fiber ascent then refines the pivot.
    The result is a sampled lower bound of the true maximum (exact on
    rank-(1,1) fields).  The power-iteration phase is skipped when the
    squared ranks would not fit a small memory budget.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    n1, n2, n3 = tt.mode_sizes
    r1, r2 = tt.ranks

    best = 0.0
    seeds = [(int(rng.integers(n2)), int(rng.integers(n3)))
             for _ in range(n_starts)]
    seeds.append((n2 // 2, n3 // 2))

    # power iteration on x*x (squared ranks: only run where that stays cheap;
    # the fiber-ascent phase below carries the general case)
    if tt.trailing == 1 and r1 * r2 <= 4:
        x2 = tt_round(tt_hadamard(tt, tt), 1e-14, rmax=64)
        y = tt_ones(tt.mode_sizes)
        prev = 0.0
        for _ in range(power_iters):
            y = tt_round(tt_hadamard(x2, y), 1e-8, rmax=8)
            nrm = tt_norm(y)
            if nrm == 0.0:
                break
            y = tt_scale(y, 1.0 / nrm)
            val, piv = _fiber_ascent(y, n2 // 2, n3 // 2, rounds=3)
            seeds.append((piv[1], piv[2]))
            cur = np.abs(tt_eval(tt, *piv))
            best = max(best, float(np.max(cur)))
            if abs(best - prev) <= stag_tol * max(best, 1e-300):
                break
            prev = best

    for j0, k0 in seeds:
        val, _ = _fiber_ascent(tt, j0, k0)
        best = max(best, val)
    return best


# ---------------------------------------------------------------------------
# checkpoint format "TT3B v1"

_TT3B_MAGIC = b"TT3B"


def save_tt3b(tt: TensorTrain3, path) -> None:
    """Write the little-endian binary checkpoint format TT3B v1."""
    n1, n2, n3 = tt.mode_sizes
    r1, r2 = tt.ranks
    m = tt.trailing
    with open(path, "wb") as fh:
        fh.write(_TT3B_MAGIC)
        fh.write(struct.pack("<I", 1))
        fh.write(struct.pack("<6Q", n1, n2, n3, r1, r2, m))
        for core in (tt.core1, tt.core2, tt.core3):
            fh.write(np.ascontiguousarray(core, dtype="<f8").tobytes())


def load_tt3b(path) -> TensorTrain3:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _TT3B_MAGIC:
            raise TTError(f"bad magic {magic!r}; not a TT3B file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != 1:
            raise TTError(f"unsupported TT3B version {version}")
        n1, n2, n3, r1, r2, m = struct.unpack("<6Q", fh.read(48))
        shapes = [(1, n1, r1), (r1, n2, r2), (r2, n3, m)]
        cores = []
        for shp in shapes:
            count = int(np.prod(shp))
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise TTError("truncated TT3B file")
            cores.append(np.frombuffer(buf, dtype="<f8").astype(np.float64).reshape(shp))
    return TensorTrain3(*cores)
