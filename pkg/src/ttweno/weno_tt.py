"""Tensor-train WENO5 solver.

The semi-discrete update mirrors the dense backend, but every field lives
in TT format and every elementwise nonlinearity (flux splitting, WENO
reconstruction, wave speeds) is pushed through cross interpolation of
black-box functions that reuse the dense kernels pointwise.  Rounding at a
dynamically chosen tolerance keeps ranks from growing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .boundary import BCSet
from .grid import GHOST, Grid3
from .tt_core import (
    TensorTrain3,
    tt_add,
    tt_max_abs,
    tt_norm,
    tt_rank1,
    tt_round,
    tt_scale,
    tt_shift,
    tt_slice_modes,
)
from .tt_cross import CrossConfig, cross_interpolate
from .weno_ft import PositivityError, ScalarFluxLaw


@dataclass
class TTConservedState:
    """Conserved fields as one TT per component, on the padded grid."""

    fields: list[TensorTrain3]
    grid: Grid3

    @property
    def ncomp(self) -> int:
        return len(self.fields)

    def ranks(self) -> list[tuple[int, int]]:
        return [f.ranks for f in self.fields]


@dataclass
class EpsController:
    """Rounding/cross tolerance policy: dynamic from the state, or fixed.

    Dynamic mode evaluates c_eps * sqrt(V) * h^{7/2} / max_q ||q||_F over
    the interior of the conserved fields.  ``cross_floor`` optionally
    bounds the cross tolerance from below (opt-in; costs convergence rate).
    """

    c_eps: float = 10.0
    volume: float = 1.0
    fixed_eps: float | None = None
    cross_floor: float | None = None

    def __post_init__(self):
        if self.c_eps <= 0 or self.volume <= 0:
            raise ValueError("c_eps and volume must be positive")

    @property
    def mode(self) -> str:
        return "fixed" if self.fixed_eps is not None else "dynamic"


def interior_norm(tt: TensorTrain3, grid: Grid3) -> float:
    sls = [slice(GHOST, GHOST + n) for n in grid.shape]
    return tt_norm(tt_slice_modes(tt, *sls))


def eps_tt(state: TTConservedState, h: float, ctrl: EpsController) -> float:
    """Rounding tolerance for the current state (also used as eps_cross)."""
    if ctrl.fixed_eps is not None:
        return ctrl.fixed_eps
    norms = [interior_norm(f, state.grid) for f in state.fields]
    peak = max(norms)
    if peak == 0.0:
        raise ValueError("cannot set dynamic tolerance for a zero state")
    return ctrl.c_eps * np.sqrt(ctrl.volume) * h ** 3.5 / peak


def cross_eps(eps: float, ctrl: EpsController) -> float:
    return max(eps, ctrl.cross_floor) if ctrl.cross_floor is not None else eps


# ---------------------------------------------------------------------------
# black-box element functions (pointwise physics on sampled fibers)

class EulerTTModel:
    """Element functions for the 3D Euler system."""

    ncomp = 5

    def __init__(self, gamma: float):
        self.gamma = gamma

    def _primitives(self, idx, q):
        rho = q[:, 0]
        if np.any(rho <= 0.0):
            bad = int(np.argmax(rho <= 0.0))
            raise PositivityError(
                f"nonpositive density {rho[bad]:.6g} sampled at "
                f"{tuple(int(v) for v in idx[bad])}")
        ke = 0.5 * (q[:, 1] ** 2 + q[:, 2] ** 2 + q[:, 3] ** 2) / rho
        p = (self.gamma - 1.0) * (q[:, 4] - ke)
        if np.any(p <= 0.0):
            bad = int(np.argmax(p <= 0.0))
            raise PositivityError(
                f"nonpositive pressure {p[bad]:.6g} sampled at "
                f"{tuple(int(v) for v in idx[bad])}")
        return rho, q[:, 1] / rho, q[:, 2] / rho, q[:, 3] / rho, p

    def lf_fn(self, axis: int, alpha: float):
        def f(idx, q):
            rho, u, v, w, p = self._primitives(idx, q)
            vel = (u, v, w)[axis]
            out = np.empty((q.shape[0], 10))
            F = out[:, :5]
            F[:, 0] = q[:, 1 + axis]
            F[:, 1] = q[:, 1] * vel
            F[:, 2] = q[:, 2] * vel
            F[:, 3] = q[:, 3] * vel
            F[:, 1 + axis] += p
            F[:, 4] = vel * (q[:, 4] + p)
            au = alpha * q
            out[:, 5:] = 0.5 * (F - au)
            F += au
            F *= 0.5
            return out

        return f

    def eigen_fn(self, axis: int):
        def f(idx, q):
            rho, u, v, w, p = self._primitives(idx, q)
            a = np.sqrt(self.gamma * p / rho)
            return np.abs((u, v, w)[axis]) + a

        return f

    def speed_fn(self):
        def f(idx, q):
            rho, u, v, w, p = self._primitives(idx, q)
            a = np.sqrt(self.gamma * p / rho)
            return np.sqrt(u * u + v * v + w * w) + a

        return f


class ScalarTTModel:
    """Element functions for scalar conservation laws (same flux per axis)."""

    ncomp = 1

    def __init__(self, law: ScalarFluxLaw):
        self.law = law

    def lf_fn(self, axis: int, alpha: float):
        def f(idx, q):
            u = q[:, 0]
            fu = self.law.flux(u)
            return np.stack(
                [0.5 * (fu + alpha * u), 0.5 * (fu - alpha * u)], axis=1)

        return f

    def eigen_fn(self, axis: int):
        def f(idx, q):
            return np.abs(self.law.wave_speed(q[:, 0]))

        return f

    def speed_fn(self):
        return self.eigen_fn(0)


def make_model(gamma: float | None, flux: ScalarFluxLaw | None):
    if flux is not None:
        return ScalarTTModel(flux)
    return EulerTTModel(gamma)


# ---------------------------------------------------------------------------
# cross-interpolated flux pipeline

def _max_rank_component(fields: list[TensorTrain3]) -> int:
    keys = [(max(f.ranks), sum(f.ranks)) for f in fields]
    return int(np.argmax([k[0] * 10_000 + k[1] for k in keys]))


def _unfold_stacked(stacked: TensorTrain3, eps: float) -> list[TensorTrain3]:
    """Split the trailing axis of the last core into scalar TTs, recompressed.

    Slices below the stacked field's accuracy floor are exactly zero fields
    dressed in sampling noise; they are snapped to zero (still within the
    stacked eps bound) so later stages skip them.
    """
    from .tt_core import tt_zeros

    floor = eps * tt_norm(stacked)
    out = []
    for c in range(stacked.trailing):
        sl = TensorTrain3(stacked.core1, stacked.core2,
                          stacked.core3[:, :, c : c + 1])
        out.append(tt_zeros(stacked.mode_sizes) if tt_norm(sl) <= floor else sl)
    return out


def zero_ghost_shell(tt: TensorTrain3) -> TensorTrain3:
    """Zero every element with any index in a ghost slot (all three cores)."""
    cores = []
    for c in (tt.core1, tt.core2, tt.core3):
        c = c.copy()
        c[:, :GHOST, :] = 0.0
        c[:, -GHOST:, :] = 0.0
        cores.append(c)
    return TensorTrain3(*cores)


def axis_wavespeed(state: TTConservedState, axis: int, eps: float, model,
                   rng=None, stats: dict | None = None) -> float:
    """Directional LF coefficient: max |u_axis| + a via cross + max-abs."""
    guess_c = _max_rank_component(state.fields)
    shape = state.grid.padded_shape + (1,)
    eig = cross_interpolate(model.eigen_fn(axis), shape,
                            guess=state.fields[guess_c],
                            cfg=CrossConfig(eps=eps, rng=rng),
                            aux=state.fields)
    alpha = tt_max_abs(eig, rng=rng)
    if stats is not None:
        stats[f"alpha_axis{axis}"] = alpha
    return alpha


def lf_cross(state: TTConservedState, axis: int, eps: float, model,
             alpha: float | None = None, rng=None,
             stats: dict | None = None):
    """Stacked flux splitting: one cross produces all 2*ncomp split fluxes.

    The initial guess is the state component with the largest ranks; the
    stacked result is unfolded into scalar TTs (plus parts first), each
    recompressed at ``eps``.
    """
    if alpha is None:
        alpha = axis_wavespeed(state, axis, eps, model, rng, stats)
    guess_c = _max_rank_component(state.fields)
    if stats is not None:
        stats["guess_component"] = guess_c
        stats.setdefault("crosses", 0)
    m = 2 * model.ncomp
    shape = state.grid.padded_shape + (m,)
    cstats: dict = {}
    stacked = cross_interpolate(model.lf_fn(axis, alpha), shape,
                                guess=state.fields[guess_c],
                                cfg=CrossConfig(eps=eps, rng=rng),
                                aux=state.fields, stats=cstats)
    if stats is not None:
        stats["crosses"] += 1
        stats["lf_evals"] = cstats.get("n_evals", 0)
    parts = _unfold_stacked(stacked, eps)
    return parts[: model.ncomp], parts[model.ncomp :], alpha


def weno_cross(v: TensorTrain3, grid: Grid3, axis: int, eps: float,
               side: int | None = None, rng=None):
    """Interface reconstruction of one flux component in TT form.

    The 5-point stencil is assembled with shift operators; the element
    function applies the dense WENO5 kernel to the sampled stencil values.
    ``side=None`` returns (plus, minus); otherwise the requested one.
    Output index i holds the value at interface i+1/2 for the plus side and
    at i-1/2 for the minus side.
    """
    eps_w = grid.spacing[axis] ** 2
    stencil = [tt_shift(v, axis, o) for o in (-2, -1, 0, 1, 2)]
    shape = v.mode_sizes + (1,)

    def run(s):
        def f(idx, vals):
            return kernels.weno5_points(vals, eps_w, s)

        return cross_interpolate(f, shape, guess=v,
                                 cfg=CrossConfig(eps=eps, rng=rng),
                                 aux=stencil)

    if side is not None:
        return run(side)
    return run(+1), run(-1)


def rhs_tt(state: TTConservedState, bcs: BCSet | None, eps: float, model,
           t: float = 0.0, source=None, rng=None,
           stats: dict | None = None) -> list[TensorTrain3]:
    """Semi-discrete TT right-hand side (ghost slots carry no meaning).

    Ghost layers must be populated; pass ``bcs`` to apply them here, or
    None when the caller already keeps the state boundary-consistent (the
    SSPRK3 stepper does, so stage states stay low rank).

    Per axis: stacked LF cross, per-component WENO crosses, then the
    interface difference via shift operators; contributions are TT-added
    with rounding after each addition.
    """
    grid = state.grid
    fields = state.fields
    if bcs is not None:
        fields = bcs.apply_tt(fields, grid, t, eps, rng)
    bstate = TTConservedState(fields, grid)

    total: list[TensorTrain3 | None] = [None] * model.ncomp
    for axis in range(3):
        plus, minus, _ = lf_cross(bstate, axis, eps, model, rng=rng, stats=stats)
        h = grid.spacing[axis]
        for c in range(model.ncomp):
            if tt_norm(plus[c]) == 0.0 and tt_norm(minus[c]) == 0.0:
                continue
            vp = weno_cross(plus[c], grid, axis, eps, side=+1, rng=rng)
            vm = weno_cross(minus[c], grid, axis, eps, side=-1, rng=rng)
            # interface flux at i-1/2 lives at index i: T^{-1} f+ plus f-
            w = tt_round(tt_add(tt_shift(vp, axis, -1), vm), eps)
            diff = tt_round(tt_add(tt_shift(w, axis, +1), tt_scale(w, -1.0)), eps)
            # shift fill-ins make ghost slots meaningless; drop them so they
            # cannot leak into the state through the time update
            contrib = zero_ghost_shell(tt_scale(diff, -1.0 / h))
            total[c] = contrib if total[c] is None else tt_round(
                tt_add(total[c], contrib), eps)

    if source is not None:
        src = source.tt(grid, t, fields, eps, rng)
        for c, s in enumerate(src):
            if s is not None:
                s = zero_ghost_shell(s)
                total[c] = s if total[c] is None else tt_round(
                    tt_add(total[c], s), eps)

    from .tt_core import tt_zeros

    return [tt_zeros(grid.padded_shape) if tc is None else tc for tc in total]


def _snap_tiny(fields: list[TensorTrain3]) -> list[TensorTrain3]:
    """Zero out components that are pure machine noise (quiescent directions).

    Without this, exactly-zero momentum components accumulate 1e-15-level
    sampling noise whose ranks grow without bound and whose crosses never
    converge in a relative sense.
    """
    from .tt_core import tt_zeros

    norms = [tt_norm(f) for f in fields]
    peak = max(norms)
    return [tt_zeros(f.mode_sizes) if n <= 1e-13 * peak else f
            for f, n in zip(fields, norms)]


def tt_ssprk3_step(state: TTConservedState, dt: float, eps: float, rhs,
                   t: float = 0.0, bcs: BCSet | None = None,
                   rng=None) -> TTConservedState:
    """Three-stage SSPRK3 with rounding after every stage combination.

    ``rhs(state, t_stage)`` returns the TT right-hand side per component
    and may assume boundary-consistent ghosts: when ``bcs`` is given, each
    stage state is re-conditioned at its stage time before rounding (ghost
    slots then never carry stale-time mixtures, which would inflate ranks).
    The incoming state must already be boundary-consistent.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    grid = state.grid

    def forward(s: TTConservedState, t_stage: float) -> list[TensorTrain3]:
        L = rhs(s, t_stage)
        return [tt_round(tt_add(f, tt_scale(l, dt)), eps)
                for f, l in zip(s.fields, L)]

    def condition(fields: list[TensorTrain3], t_stage: float,
                  rounded: bool) -> TTConservedState:
        # combinations get their stage rounding here; forward-Euler results
        # arrive already rounded and only need boundary-consistent ghosts
        if bcs is not None:
            fields = bcs.apply_tt(fields, grid, t_stage, eps, rng)
        if not rounded:
            fields = [tt_round(f, eps) for f in fields]
        return TTConservedState(_snap_tiny(fields), grid)

    u1 = condition(forward(state, t), t + dt, rounded=True)
    f1 = forward(u1, t + dt)
    u2 = condition(
        [tt_add(tt_scale(a, 0.75), tt_scale(b, 0.25))
         for a, b in zip(state.fields, f1)], t + 0.5 * dt, rounded=False)
    f2 = forward(u2, t + 0.5 * dt)
    return condition(
        [tt_add(tt_scale(a, 1.0 / 3.0), tt_scale(b, 2.0 / 3.0))
         for a, b in zip(state.fields, f2)], t + dt, rounded=False)


def timestep_cfl(state: TTConservedState, lam: float, h: float, model,
                 eps: float, rng=None) -> float:
    """dt = lam * h / max wavespeed, the speed field sampled by cross."""
    guess_c = _max_rank_component(state.fields)
    shape = state.grid.padded_shape + (1,)
    speed = cross_interpolate(model.speed_fn(), shape,
                              guess=state.fields[guess_c],
                              cfg=CrossConfig(eps=eps, rng=rng),
                              aux=state.fields)
    alpha = tt_max_abs(speed, rng=rng)
    if alpha <= 0.0:
        raise ValueError("zero wave speed; CFL timestep undefined")
    return lam * h / alpha


# ---------------------------------------------------------------------------
# initial conditions

def rank1_superposition_ic(profiles, nz_padded: int, eps: float):
    """Sum one rank-1 train per y plane, rounding after each addition.

    ``profiles[j]`` holds the (ncomp, nx_padded) conserved x-profiles of
    plane j.  Used when cross interpolation cannot build a tilted
    discontinuity directly.
    """
    n2 = len(profiles)
    ncomp = profiles[0].shape[0]
    ones_z = np.ones(nz_padded)
    out = []
    for c in range(ncomp):
        acc = None
        for j in range(n2):
            ej = np.zeros(n2)
            ej[j] = 1.0
            term = tt_rank1(profiles[j][c], ej, ones_z)
            acc = term if acc is None else tt_round(tt_add(acc, term), eps)
        out.append(acc)
    return out


def build_tt_ic(spec, grid: Grid3, eps: float, rng=None) -> TTConservedState:
    """TT initial state: the problem's direct builder, or an IC cross."""
    if spec.tt_ic is not None:
        fields = [tt_round(f, min(eps, 1e-13)) for f in spec.tt_ic(grid, eps)]
        return TTConservedState(fields, grid)

    coords = [grid.coords(a) for a in range(3)]
    ncomp = spec.ncomp

    def f(idx, aux):
        comps = spec.ic(coords[0][idx[:, 0]], coords[1][idx[:, 1]],
                        coords[2][idx[:, 2]])
        ref = coords[0][idx[:, 0]] + coords[1][idx[:, 1]] + coords[2][idx[:, 2]]
        cols = [np.broadcast_to(np.asarray(c, dtype=np.float64), ref.shape)
                for c in comps]
        return np.stack(cols, axis=1)

    from .tt_core import tt_ones

    shape = grid.padded_shape
    stacked = cross_interpolate(f, shape + (ncomp,), guess=tt_ones(shape),
                                cfg=CrossConfig(eps=eps, rng=rng))
    return TTConservedState(_unfold_stacked(stacked, eps), grid)


def estimate_ic_eps(spec, grid: Grid3, ctrl: EpsController, rng=None) -> float:
    """Dynamic tolerance before a TT state exists: sample the IC's norms."""
    if ctrl.fixed_eps is not None:
        return ctrl.fixed_eps
    rng = np.random.default_rng(0) if rng is None else rng
    n = 512
    pts = [rng.uniform(lo, hi, n) for lo, hi in spec.bounds]
    comps = spec.ic(pts[0], pts[1], pts[2])
    ncells = float(np.prod(grid.shape))
    peak = max(
        float(np.sqrt(np.mean(np.broadcast_to(np.asarray(c, float), (n,)) ** 2)
                      * ncells))
        for c in comps)
    if peak == 0.0:
        raise ValueError("zero-norm initial condition")
    return ctrl.c_eps * np.sqrt(ctrl.volume) * grid.h ** 3.5 / peak
