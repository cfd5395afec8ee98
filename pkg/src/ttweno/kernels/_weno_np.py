"""Pure-NumPy WENO5-JS reconstruction kernels (fallback backend)."""

import numpy as np

IMPL = "numpy"

# optimal linear weights for the three candidate stencils
_D0, _D1, _D2 = 0.3, 0.6, 0.1


def _reconstruct(a, b, c, d, e, eps):
    """Left-biased WENO5-JS value at the interface right of the window center.

    ``a..e`` are the five stencil values (any matching shapes), ``eps`` the
    smoothness regularization (grid spacing squared).
    """
    p0 = (2.0 * c + 5.0 * d - e) / 6.0
    p1 = (-b + 5.0 * c + 2.0 * d) / 6.0
    p2 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0

    b0 = (13.0 / 12.0) * (c - 2.0 * d + e) ** 2 + 0.25 * (3.0 * c - 4.0 * d + e) ** 2
    b1 = (13.0 / 12.0) * (b - 2.0 * c + d) ** 2 + 0.25 * (b - d) ** 2
    b2 = (13.0 / 12.0) * (a - 2.0 * b + c) ** 2 + 0.25 * (a - 4.0 * b + 3.0 * c) ** 2

    a0 = _D0 / (b0 + eps) ** 2
    a1 = _D1 / (b1 + eps) ** 2
    a2 = _D2 / (b2 + eps) ** 2
    s = a0 + a1 + a2
    return (a0 * p0 + a1 * p1 + a2 * p2) / s


def weno5_lines(v, eps, side):
    """Reconstruct interface values along the last axis of a 2-D array.

    ``v`` has shape (nlines, L) with L = N + 6 (three ghost slots per side);
    the result has shape (nlines, L - 5), one value per interface between
    slots p and p+1 for p = 2 .. L-4.  ``side=+1`` gives the left-biased
    reconstruction, ``side=-1`` the mirrored right-biased one.
    """
    v = np.ascontiguousarray(v, dtype=np.float64)
    if side > 0:
        a, b, c, d, e = (v[:, q : q + v.shape[1] - 5] for q in range(5))
    else:
        e, d, c, b, a = (v[:, q + 1 : q + 1 + v.shape[1] - 5] for q in range(5))
    return _reconstruct(a, b, c, d, e, eps)


def weno5_points(s, eps, side):
    """Pointwise reconstruction from explicit 5-value stencils.

    ``s`` has shape (npoints, 5) holding v_{i-2}..v_{i+2} per point; returns
    the value at interface i+1/2 for ``side=+1`` and at i-1/2 for ``side=-1``.
    """
    s = np.asarray(s, dtype=np.float64)
    if side > 0:
        a, b, c, d, e = (s[:, q] for q in range(5))
    else:
        e, d, c, b, a = (s[:, q] for q in range(5))
    return _reconstruct(a, b, c, d, e, eps)
