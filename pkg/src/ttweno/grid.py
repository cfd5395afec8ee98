"""Uniform cell-centered grid with three ghost layers per side."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GHOST = 3
INTERIOR = slice(GHOST, -GHOST)


@dataclass(frozen=True)
class Grid3:
    """Interior extents (nx, ny, nz) over the box ``bounds``.

    Interior point i (0-based) along an axis sits at a + (i + 1/2) h; ghost
    slots continue the same spacing beyond both ends.  Padded arrays have
    shape (nx+6, ny+6, nz+6).
    """

    bounds: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]
    shape: tuple[int, int, int]

    @property
    def spacing(self) -> tuple[float, float, float]:
        return tuple((b - a) / n for (a, b), n in zip(self.bounds, self.shape))

    @property
    def h(self) -> float:
        """Representative spacing (the finest axis when anisotropic)."""
        return min(self.spacing)

    @property
    def volume(self) -> float:
        return float(np.prod([b - a for a, b in self.bounds]))

    @property
    def padded_shape(self) -> tuple[int, int, int]:
        return tuple(n + 2 * GHOST for n in self.shape)

    def coords(self, axis: int) -> np.ndarray:
        """Padded coordinate array along one axis (ghost slots included)."""
        (a, _), n, h = self.bounds[axis], self.shape[axis], self.spacing[axis]
        return a + (np.arange(-GHOST, n + GHOST) + 0.5) * h

    def mesh(self):
        """Broadcastable padded coordinate arrays (X, Y, Z)."""
        x = self.coords(0)[:, None, None]
        y = self.coords(1)[None, :, None]
        z = self.coords(2)[None, None, :]
        return x, y, z

    def interior(self, arr: np.ndarray) -> np.ndarray:
        """View of the interior cells (last three axes are the grid axes)."""
        return arr[..., INTERIOR, INTERIOR, INTERIOR]

    def l2_norm(self, arr: np.ndarray) -> float:
        """Discrete L2 norm: sqrt(cell volume) times the Frobenius norm."""
        w = float(np.sqrt(np.prod(self.spacing)))
        return w * float(np.linalg.norm(arr))
