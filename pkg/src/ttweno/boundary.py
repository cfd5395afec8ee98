"""Boundary conditions on the 3-ghost padded grid, dense and TT forms.

Weak enforcement: each condition only populates ghost slots, and the
numerical flux does the rest.  The TT forms touch nothing but the core of
the face's axis, except where ghost values must be assembled from
primitives (inflow, Dirichlet slabs), which uses rank-1 construction,
Hadamard products, TT addition, and rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import GHOST, Grid3
from .tt_core import (
    TensorTrain3,
    tt_add,
    tt_hadamard,
    tt_rank1,
    tt_round,
    tt_scale,
)
from .tt_cross import CrossConfig, cross_interpolate
from .weno_ft import prim_to_cons


@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class Dirichlet:
    """Ghosts set from ``func(X, Y, Z, t) -> (ncomp,) + shape`` conserved values."""

    func: Callable


@dataclass(frozen=True)
class InflowConst:
    """Ghosts assembled from fixed primitive values (rho, u, v, w, p)."""

    primitives: tuple[float, float, float, float, float]
    gamma: float


@dataclass(frozen=True)
class Outflow:
    """Zeroth-order extrapolation: the adjacent interior plane is replicated."""


@dataclass(frozen=True)
class Symmetry:
    """Mirror ghosts about the face; one component may flip sign."""

    flip_component: int | None


@dataclass(frozen=True)
class DMRWall:
    """Reflecting wall for x >= split, prescribed post-shock state before it."""

    post_shock: tuple[float, float, float, float, float]
    gamma: float
    split: float


# application phases: value-prescribing conditions first, extrapolation next,
# mirrors last (their donors then include filled transverse ghosts)
_PHASE = {Periodic: 0, Dirichlet: 0, InflowConst: 0, Outflow: 1,
          Symmetry: 2, DMRWall: 2}


def _ghost_slots(n: int, side: int) -> slice:
    return slice(0, GHOST) if side == 0 else slice(n + GHOST, n + 2 * GHOST)


def _mirror_pairs(n: int, side: int):
    """(ghost slot, donor slot) pairs for a mirror about the face."""
    if side == 0:
        return [(l, 2 * GHOST - 1 - l) for l in range(GHOST)]
    lo = n + GHOST
    return [(lo + l, lo - 1 - l) for l in range(GHOST)]


@dataclass
class BCSet:
    """One condition per face, keyed by (axis, side); periodic faces pair up."""

    faces: dict[tuple[int, int], object]

    def __post_init__(self):
        for (axis, side), bc in self.faces.items():
            if isinstance(bc, Periodic):
                other = self.faces.get((axis, 1 - side))
                if not isinstance(other, Periodic):
                    raise ValueError(f"periodic axis {axis} must pair both faces")

    def ordered(self):
        return sorted(self.faces.items(), key=lambda kv: _PHASE[type(kv[1])])

    # -- dense ------------------------------------------------------------
    def apply_dense(self, grid: Grid3, U: np.ndarray, t: float) -> None:
        """Fill ghost slots of the padded (ncomp, ...) array in place."""
        done_periodic = set()
        for (axis, side), bc in self.ordered():
            if isinstance(bc, Periodic):
                if axis not in done_periodic:
                    _dense_periodic(U, axis, grid.shape[axis])
                    done_periodic.add(axis)
            elif isinstance(bc, Dirichlet):
                _dense_dirichlet(U, grid, axis, side, bc.func, t)
            elif isinstance(bc, InflowConst):
                vals = prim_to_cons(*bc.primitives, bc.gamma)
                _dense_fill_const(U, grid, axis, side, vals)
            elif isinstance(bc, Outflow):
                _dense_outflow(U, grid, axis, side)
            elif isinstance(bc, Symmetry):
                _dense_symmetry(U, grid, axis, side, bc.flip_component)
            elif isinstance(bc, DMRWall):
                _dense_symmetry(U, grid, axis, side, 1 + axis)
                _dense_dmr_fix(U, grid, axis, side, bc)
            else:
                raise TypeError(f"unknown BC {bc!r}")

    # -- tensor train -------------------------------------------------------
    def apply_tt(self, tts: list[TensorTrain3], grid: Grid3, t: float,
                 eps: float, rng=None) -> list[TensorTrain3]:
        out = list(tts)
        done_periodic = set()
        for (axis, side), bc in self.ordered():
            if isinstance(bc, Periodic):
                if axis not in done_periodic:
                    out = [tt_bc_periodic(q, axis, grid.shape[axis]) for q in out]
                    done_periodic.add(axis)
            elif isinstance(bc, Dirichlet):
                out = tt_bc_dirichlet(out, grid, axis, side, bc.func, t, eps, rng)
            elif isinstance(bc, InflowConst):
                out = tt_bc_inflow_const(out, grid, axis, side, bc.primitives,
                                         bc.gamma, eps)
            elif isinstance(bc, Outflow):
                out = [tt_bc_outflow(q, axis, side, grid.shape[axis]) for q in out]
            elif isinstance(bc, Symmetry):
                out = [
                    tt_bc_symmetry(q, axis, side, grid.shape[axis],
                                   flip=(c == bc.flip_component))
                    for c, q in enumerate(out)
                ]
            elif isinstance(bc, DMRWall):
                out = tt_bc_dmr_wall(out, grid, axis, side, bc, eps)
            else:
                raise TypeError(f"unknown BC {bc!r}")
        return out


# ---------------------------------------------------------------------------
# dense implementations

def _dense_periodic(U: np.ndarray, axis: int, n: int) -> None:
    A = np.moveaxis(U, 1 + axis, -1)
    A[..., 0:GHOST] = A[..., n : n + GHOST]
    A[..., n + GHOST :] = A[..., GHOST : 2 * GHOST]


def _slab_mesh(grid: Grid3, axis: int, side: int):
    xs = [grid.coords(a) for a in range(3)]
    xs[axis] = xs[axis][_ghost_slots(grid.shape[axis], side)]
    return (xs[0][:, None, None], xs[1][None, :, None], xs[2][None, None, :])


def _stack_components(func, x, y, z, t) -> np.ndarray:
    """Evaluate a per-component BC/IC function and broadcast to a full stack."""
    ref = np.asarray(x + y + z)  # broadcast target for constant components
    comps = func(x, y, z, t)
    return np.stack([np.broadcast_to(np.asarray(c, dtype=np.float64), ref.shape)
                     for c in comps])


def _dense_dirichlet(U, grid, axis, side, func, t) -> None:
    X, Y, Z = _slab_mesh(grid, axis, side)
    vals = _stack_components(func, X, Y, Z, t)
    A = np.moveaxis(U, 1 + axis, -1)
    A[..., _ghost_slots(grid.shape[axis], side)] = np.moveaxis(vals, 1 + axis, -1)


def _dense_fill_const(U, grid, axis, side, vals) -> None:
    A = np.moveaxis(U, 1 + axis, -1)
    A[..., _ghost_slots(grid.shape[axis], side)] = np.asarray(vals).reshape(
        U.shape[0], 1, 1, 1)


def _dense_outflow(U, grid, axis, side) -> None:
    n = grid.shape[axis]
    A = np.moveaxis(U, 1 + axis, -1)
    donor = A[..., GHOST : GHOST + 1] if side == 0 else A[..., n + GHOST - 1 : n + GHOST]
    A[..., _ghost_slots(n, side)] = donor


def _dense_symmetry(U, grid, axis, side, flip_component) -> None:
    n = grid.shape[axis]
    A = np.moveaxis(U, 1 + axis, -1)
    for ghost, donor in _mirror_pairs(n, side):
        A[..., ghost] = A[..., donor]
        if flip_component is not None:
            A[flip_component, ..., ghost] *= -1.0


def _dense_dmr_fix(U, grid, axis, side, bc: DMRWall) -> None:
    if axis == 0:
        raise ValueError("DMRWall splits along x; it cannot sit on an x face")
    vals = prim_to_cons(*bc.post_shock, bc.gamma)
    mask = grid.coords(0) < bc.split
    A = np.moveaxis(U, 1 + axis, -1)  # x stays the leading spatial axis
    sl = _ghost_slots(grid.shape[axis], side)
    for c in range(U.shape[0]):
        A[c, mask, :, sl] = vals[c]


# ---------------------------------------------------------------------------
# TT implementations

def _replace_axis_core(tt: TensorTrain3, axis: int, core: np.ndarray) -> TensorTrain3:
    cores = [tt.core1, tt.core2, tt.core3]
    cores[axis] = core
    return TensorTrain3(*cores)


def tt_bc_periodic(tt: TensorTrain3, axis: int, n: int) -> TensorTrain3:
    """Copy interior core slices into the ghosts of the axis core."""
    c = tt.core1 if axis == 0 else tt.core2 if axis == 1 else tt.core3
    c = c.copy()
    c[:, 0:GHOST, :] = c[:, n : n + GHOST, :]
    c[:, n + GHOST :, :] = c[:, GHOST : 2 * GHOST, :]
    return _replace_axis_core(tt, axis, c)


def tt_bc_outflow(tt: TensorTrain3, axis: int, side: int, n: int) -> TensorTrain3:
    c = (tt.core1, tt.core2, tt.core3)[axis].copy()
    donor = GHOST if side == 0 else n + GHOST - 1
    c[:, _ghost_slots(n, side), :] = c[:, donor : donor + 1, :]
    return _replace_axis_core(tt, axis, c)


def tt_bc_symmetry(tt: TensorTrain3, axis: int, side: int, n: int,
                   flip: bool = False) -> TensorTrain3:
    c = (tt.core1, tt.core2, tt.core3)[axis].copy()
    sign = -1.0 if flip else 1.0
    for ghost, donor in _mirror_pairs(n, side):
        c[:, ghost, :] = sign * c[:, donor, :]
    return _replace_axis_core(tt, axis, c)


def _zero_ghost_core(tt: TensorTrain3, axis: int, side: int, n: int) -> TensorTrain3:
    c = (tt.core1, tt.core2, tt.core3)[axis].copy()
    c[:, _ghost_slots(n, side), :] = 0.0
    return _replace_axis_core(tt, axis, c)


def _ghost_rank1(grid: Grid3, axis: int, side: int, value: float) -> TensorTrain3:
    """Rank-1 field equal to ``value`` on the face's ghost slab, 0 elsewhere."""
    profiles = [np.ones(n + 2 * GHOST) for n in grid.shape]
    prof = np.zeros(grid.shape[axis] + 2 * GHOST)
    prof[_ghost_slots(grid.shape[axis], side)] = value
    profiles[axis] = prof
    return tt_rank1(*profiles)


def tt_bc_inflow_const(tts, grid: Grid3, axis: int, side: int, primitives,
                       gamma: float, eps: float):
    """Prescribed-primitive inflow: zero the face ghosts, add assembled BC TTs."""
    n = grid.shape[axis]
    zeroed = [_zero_ghost_core(q, axis, side, n) for q in tts]

    rho_in, u_in, v_in, w_in, p_in = primitives
    rho = _ghost_rank1(grid, axis, side, rho_in)
    uvw = [_ghost_rank1(grid, axis, side, comp) for comp in (u_in, v_in, w_in)]
    pbc = _ghost_rank1(grid, axis, side, p_in)

    mom = [tt_round(tt_hadamard(rho, q), eps) for q in uvw]
    kin = tt_round(
        tt_add(tt_add(tt_hadamard(mom[0], uvw[0]), tt_hadamard(mom[1], uvw[1])),
               tt_hadamard(mom[2], uvw[2])), eps)
    energy = tt_round(tt_add(tt_scale(pbc, 1.0 / (gamma - 1.0)),
                             tt_scale(kin, 0.5)), eps)
    bc_fields = [rho, mom[0], mom[1], mom[2], energy]
    return [tt_round(tt_add(q, b), eps) for q, b in zip(zeroed, bc_fields)]


def _embed_slab(slab: TensorTrain3, axis: int, side: int, n: int,
                component: int) -> TensorTrain3:
    """Zero-pad a 3-layer slab TT to full axis length; slice one channel."""
    cores = [slab.core1, slab.core2, slab.core3]
    c = cores[axis]
    full = np.zeros((c.shape[0], n + 2 * GHOST, c.shape[2]))
    full[:, _ghost_slots(n, side), :] = c
    cores[axis] = full
    cores[2] = cores[2][:, :, component : component + 1]
    return TensorTrain3(*cores)


def tt_bc_dirichlet(tts, grid: Grid3, axis: int, side: int, func, t: float,
                    eps: float, rng=None):
    """Time-dependent prescribed ghosts, rank-computed by cross interpolation.

    One stacked cross over the 3-layer slab covers all components; the
    resulting slices are embedded into zeroed ghosts and added.
    """
    n = grid.shape[axis]
    ncomp = len(tts)
    coords = [grid.coords(a) for a in range(3)]
    gsl = _ghost_slots(n, side)
    coords[axis] = coords[axis][gsl]
    slab_shape = tuple(len(c) for c in coords)

    def f(idx, aux):
        x = coords[0][idx[:, 0]]
        y = coords[1][idx[:, 1]]
        z = coords[2][idx[:, 2]]
        return _stack_components(func, x, y, z, t).T

    from .tt_core import tt_ones

    cfg = CrossConfig(eps=eps, rng=rng)
    slab = cross_interpolate(f, slab_shape + (ncomp,),
                             guess=tt_ones(slab_shape), cfg=cfg)
    out = []
    for c, q in enumerate(tts):
        zq = _zero_ghost_core(q, axis, side, n)
        out.append(tt_round(tt_add(zq, _embed_slab(slab, axis, side, n, c)), eps))
    return out


def tt_bc_dmr_wall(tts, grid: Grid3, axis: int, side: int, bc: DMRWall,
                   eps: float):
    """Mirror wall with a prescribed post-shock patch for x < split."""
    n = grid.shape[axis]
    mirrored = [
        tt_bc_symmetry(q, axis, side, n, flip=(c == 1 + axis))
        for c, q in enumerate(tts)
    ]
    # mask over x cells ahead of the wall start
    xprof = (grid.coords(0) < bc.split).astype(np.float64)
    mask = tt_rank1(xprof, np.ones(grid.shape[1] + 2 * GHOST),
                    np.ones(grid.shape[2] + 2 * GHOST))
    vals = prim_to_cons(*bc.post_shock, bc.gamma)
    out = []
    for c, q in enumerate(mirrored):
        ghosts_only = _zero_all_but_ghosts(q, axis, side, n)
        patch = tt_add(_ghost_rank1(grid, axis, side, float(vals[c])),
                       tt_scale(ghosts_only, -1.0))
        out.append(tt_round(tt_add(q, tt_hadamard(mask, patch)), eps))
    return out


def _zero_all_but_ghosts(tt: TensorTrain3, axis: int, side: int,
                         n: int) -> TensorTrain3:
    c = (tt.core1, tt.core2, tt.core3)[axis]
    kept = np.zeros_like(c)
    sl = _ghost_slots(n, side)
    kept[:, sl, :] = c[:, sl, :]
    return _replace_axis_core(tt, axis, kept)
