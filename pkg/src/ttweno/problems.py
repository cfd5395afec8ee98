"""Test-problem catalog: domains, initial conditions, exact solutions,
boundary assignments, source terms, and per-problem solver defaults.

Every evaluator is a pure function of coordinates (and time), safe for
concurrent sampling by cross interpolation.  Problems are addressable by
name through ``get_problem``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .boundary import (
    BCSet,
    Dirichlet,
    DMRWall,
    InflowConst,
    Outflow,
    Periodic,
    Symmetry,
)
from .grid import GHOST, Grid3
from .tt_core import TensorTrain3, tt_add, tt_rank1, tt_round
from .weno_ft import ADVECTION_FLUX, BURGERS_FLUX, ScalarFluxLaw, prim_to_cons


@dataclass(frozen=True)
class DtRule:
    """Either dt = coeff * h**power, or CFL dt = coeff * h / max wavespeed."""

    kind: str  # "power_law" | "cfl"
    coeff: float
    power: float = 5.0 / 3.0

    def __post_init__(self):
        if self.kind not in ("power_law", "cfl"):
            raise ValueError(f"unknown dt rule {self.kind}")
        if self.coeff <= 0:
            raise ValueError("dt coefficient must be positive")


@dataclass
class ProblemSpec:
    name: str
    bounds: tuple
    ncomp: int
    t_final: float
    dt_rule: DtRule
    c_eps: float
    bcs: BCSet
    ic: Callable  # ic(x, y, z) -> tuple of ncomp conserved arrays
    exact: Callable | None = None  # exact(x, y, z, t) -> same tuple
    gamma: float | None = None
    flux: ScalarFluxLaw | None = None  # scalar problems only
    source: object | None = None
    tt_ic: Callable | None = None  # tt_ic(grid, eps) -> list[TensorTrain3]

    def __post_init__(self):
        if self.t_final <= 0:
            raise ValueError("final time must be positive")
        if self.ncomp not in (1, 5):
            raise ValueError("ncomp must be 1 (scalar) or 5 (Euler)")


def _periodic_all() -> BCSet:
    return BCSet({(a, s): Periodic() for a in range(3) for s in range(2)})


# ---------------------------------------------------------------------------
# smooth scalar problems

def linear_advection_3d() -> ProblemSpec:
    """u_t + u_x + u_y + u_z = 0 with a diagonal sine wave."""

    def ic(x, y, z):
        return (np.sin(2 * np.pi * (x + y + z)),)

    def exact(x, y, z, t):
        return (np.sin(2 * np.pi * (x + y + z - 3 * t)),)

    return ProblemSpec(
        name="advection", bounds=((0.0, 1.0),) * 3, ncomp=1, t_final=0.1,
        dt_rule=DtRule("power_law", 1.0), c_eps=500.0, bcs=_periodic_all(),
        ic=ic, exact=exact, flux=ADVECTION_FLUX)


def burgers_3d() -> ProblemSpec:
    """u_t + u u_x + u u_y + u u_z = 0, evaluated before wave breaking.

    The exact solution solves u = u0(x + y + z - 3 u t) per point by Newton
    iteration on the characteristic equation.
    """

    def u0_of(xi):
        return 0.5 + 0.5 * np.sin(2 * np.pi * xi)

    def ic(x, y, z):
        return (u0_of(x + y + z),)

    def exact(x, y, z, t):
        xi = np.asarray(x + y + z, dtype=np.float64)
        u = u0_of(xi)
        for _ in range(100):
            arg = 2 * np.pi * (xi - 3 * u * t)
            g = u - 0.5 - 0.5 * np.sin(arg)
            gp = 1.0 + 3.0 * np.pi * t * np.cos(arg)
            du = g / gp
            u = u - du
            if np.max(np.abs(du)) < 1e-14:
                break
        else:
            raise RuntimeError("characteristic Newton iteration stalled")
        return (u,)

    return ProblemSpec(
        name="burgers", bounds=((0.0, 1.0),) * 3, ncomp=1,
        t_final=1.0 / (12.0 * np.pi), dt_rule=DtRule("power_law", 1.0),
        c_eps=10.0, bcs=_periodic_all(), ic=ic, exact=exact, flux=BURGERS_FLUX)


# ---------------------------------------------------------------------------
# smooth Euler problems

VORTEX_BETA = 5.0


def isentropic_vortex() -> ProblemSpec:
    """Isentropic vortex advecting diagonally through [0,10]^3.

    Freestream (rho, u, v, w, p) = (1, 1, 1, 0, 1), vortex strength beta = 5
    centered at (5, 5):

        du = -beta/(2 pi) e^{(1-r^2)/2} (y - y0 - t)
        dv = +beta/(2 pi) e^{(1-r^2)/2} (x - x0 - t)
        dT = -(gamma-1) beta^2 / (8 gamma pi^2) e^{1-r^2}

    with rho = T^{1/(gamma-1)}, p = T^{gamma/(gamma-1)} (unit entropy).
    The solution is not periodic, so ghost values are prescribed from the
    exact state at the current time on the x and y faces.
    """
    gamma = 1.4
    x0 = y0 = 5.0
    beta = VORTEX_BETA

    def fields(x, y, z, t):
        dx = x - x0 - t
        dy = y - y0 - t
        r2 = dx * dx + dy * dy
        ex = np.exp(0.5 * (1.0 - r2))
        du = -beta / (2 * np.pi) * ex * dy
        dv = beta / (2 * np.pi) * ex * dx
        dT = -(gamma - 1) * beta**2 / (8 * gamma * np.pi**2) * ex * ex
        T = 1.0 + dT
        rho = T ** (1.0 / (gamma - 1))
        p = T ** (gamma / (gamma - 1))
        return rho, 1.0 + du, 1.0 + dv, np.zeros_like(rho), p

    def exact(x, y, z, t):
        return tuple(prim_to_cons(*fields(x, y, z, t), gamma))

    def ic(x, y, z):
        return exact(x, y, z, 0.0)

    bcs = BCSet({
        (0, 0): Dirichlet(exact), (0, 1): Dirichlet(exact),
        (1, 0): Dirichlet(exact), (1, 1): Dirichlet(exact),
        (2, 0): Periodic(), (2, 1): Periodic(),
    })
    volume = 1000.0
    return ProblemSpec(
        name="vortex", bounds=((0.0, 10.0),) * 3, ncomp=5, t_final=1.0,
        dt_rule=DtRule("power_law", 0.5), c_eps=2.0 / np.sqrt(volume),
        bcs=bcs, ic=ic, exact=exact, gamma=gamma)


def _manufactured_primitives(x, y, z, t):
    s = np.sin(2 * np.pi * (x + y + z - t))
    c = np.cos(2 * np.pi * (x + y + z - t))
    rho = 1.0 + 0.1 * s
    u = 1.0 + 0.1 * s
    v = 1.0 + 0.1 * c
    w = 1.0 + 0.1 * c
    e = 1.0 + 0.1 * c  # specific internal energy
    return rho, u, v, w, e


@functools.lru_cache(maxsize=2)
def _mms_source_lambdas(gamma: float):
    """Divergence-of-flux source for the manufactured fields, via sympy."""
    import sympy as sp

    x, y, z, t = sp.symbols("x y z t")
    g = sp.nsimplify(gamma, rational=True)
    phi = 2 * sp.pi * (x + y + z - t)
    tenth = sp.Rational(1, 10)
    rho = 1 + tenth * sp.sin(phi)
    u = 1 + tenth * sp.sin(phi)
    v = 1 + tenth * sp.cos(phi)
    w = 1 + tenth * sp.cos(phi)
    e = 1 + tenth * sp.cos(phi)
    p = (g - 1) * rho * e
    rE = rho * e + rho * (u**2 + v**2 + w**2) / 2

    U = [rho, rho * u, rho * v, rho * w, rE]
    F = [rho * u, rho * u**2 + p, rho * u * v, rho * u * w, u * (rE + p)]
    G = [rho * v, rho * u * v, rho * v**2 + p, rho * v * w, v * (rE + p)]
    H = [rho * w, rho * u * w, rho * v * w, rho * w**2 + p, w * (rE + p)]

    out = []
    for c in range(5):
        expr = (sp.diff(U[c], t) + sp.diff(F[c], x) + sp.diff(G[c], y)
                + sp.diff(H[c], z))
        out.append(sp.lambdify((x, y, z, t), sp.expand(expr), modules="numpy"))
    return out


class MMSSource:
    """Forcing that makes the manufactured fields solve the Euler system."""

    def __init__(self, gamma: float):
        self.gamma = gamma

    def components(self, x, y, z, t):
        lams = _mms_source_lambdas(self.gamma)
        ref = np.asarray(x + y + z, dtype=np.float64)
        return [np.broadcast_to(np.asarray(f(x, y, z, t), dtype=np.float64),
                                ref.shape) for f in lams]

    def dense(self, grid: Grid3, t: float, U) -> np.ndarray:
        x, y, z = grid.mesh()
        return np.stack([np.broadcast_to(c, grid.padded_shape)
                         for c in self.components(x, y, z, t)])

    def tt(self, grid: Grid3, t: float, tts, eps: float, rng=None):
        from .tt_core import tt_ones
        from .tt_cross import CrossConfig, cross_interpolate

        coords = [grid.coords(a) for a in range(3)]

        def f(idx, aux):
            comps = self.components(coords[0][idx[:, 0]], coords[1][idx[:, 1]],
                                    coords[2][idx[:, 2]], t)
            return np.stack(comps, axis=1)

        shape = grid.padded_shape
        stacked = cross_interpolate(f, shape + (5,), guess=tt_ones(shape),
                                    cfg=CrossConfig(eps=eps, rng=rng))
        return [TensorTrain3(stacked.core1, stacked.core2,
                             stacked.core3[:, :, c : c + 1]) for c in range(5)]


def manufactured_solution() -> ProblemSpec:
    """Forced Euler system whose exact fields are low-rank trigonometric waves."""
    gamma = 1.4

    def exact(x, y, z, t):
        rho, u, v, w, e = _manufactured_primitives(x, y, z, t)
        p = (gamma - 1.0) * rho * e
        return tuple(prim_to_cons(rho, u, v, w, p, gamma))

    def ic(x, y, z):
        return exact(x, y, z, 0.0)

    return ProblemSpec(
        name="manufactured", bounds=((0.0, 1.0),) * 3, ncomp=5, t_final=0.1,
        dt_rule=DtRule("power_law", 0.5), c_eps=10.0, bcs=_periodic_all(),
        ic=ic, exact=exact, gamma=gamma, source=MMSSource(gamma))


# ---------------------------------------------------------------------------
# exact Riemann solver (oracle for the shock-tube runs)

def _fk(p, rho_k, p_k, a_k, g):
    """Toro's f_K(p) and its derivative for one side of the star region."""
    p = np.asarray(p, dtype=np.float64)
    ak_coef = 2.0 / ((g + 1) * rho_k)
    bk = (g - 1) / (g + 1) * p_k
    shock = p > p_k
    f_shock = (p - p_k) * np.sqrt(ak_coef / (p + bk))
    fd_shock = np.sqrt(ak_coef / (p + bk)) * (1 - (p - p_k) / (2 * (p + bk)))
    pr = np.maximum(p, 1e-300) / p_k
    f_rare = 2 * a_k / (g - 1) * (pr ** ((g - 1) / (2 * g)) - 1)
    fd_rare = pr ** (-(g + 1) / (2 * g)) / (rho_k * a_k)
    return np.where(shock, f_shock, f_rare), np.where(shock, fd_shock, fd_rare)


def riemann_star_state(left, right, gamma: float):
    """Star-region pressure and velocity for primitive states (rho, u, p)."""
    rho_l, u_l, p_l = left
    rho_r, u_r, p_r = right
    a_l = np.sqrt(gamma * p_l / rho_l)
    a_r = np.sqrt(gamma * p_r / rho_r)
    if 2 * (a_l + a_r) / (gamma - 1) <= u_r - u_l:
        raise ValueError("states generate vacuum")

    # two-rarefaction initial guess
    zp = (gamma - 1) / (2 * gamma)
    p = ((a_l + a_r - 0.5 * (gamma - 1) * (u_r - u_l))
         / (a_l / p_l**zp + a_r / p_r**zp)) ** (1 / zp)
    p = max(float(p), 1e-12)
    for _ in range(100):
        fl, fld = _fk(p, rho_l, p_l, a_l, gamma)
        fr, frd = _fk(p, rho_r, p_r, a_r, gamma)
        dp = (fl + fr + (u_r - u_l)) / (fld + frd)
        p_new = p - float(dp)
        if p_new <= 0:
            p_new = 0.5 * p
        if abs(p_new - p) < 1e-14 * p_new:
            p = p_new
            break
        p = p_new
    fl, _ = _fk(p, rho_l, p_l, a_l, gamma)
    fr, _ = _fk(p, rho_r, p_r, a_r, gamma)
    u = 0.5 * (u_l + u_r) + 0.5 * (float(fr) - float(fl))
    return p, u


def exact_riemann(left, right, gamma: float, xi):
    """Self-similar solution sampled at xi = x/t.

    ``left``/``right`` are primitive 5-tuples (rho, u, v, w, p); transverse
    velocities ride passively with the contact.  Returns the primitive
    arrays (rho, u, v, w, p) at each xi.
    """
    rho_l, u_l, v_l, w_l, p_l = left
    rho_r, u_r, v_r, w_r, p_r = right
    ps, us = riemann_star_state((rho_l, u_l, p_l), (rho_r, u_r, p_r), gamma)
    a_l = np.sqrt(gamma * p_l / rho_l)
    a_r = np.sqrt(gamma * p_r / rho_r)
    g = gamma
    xi = np.asarray(xi, dtype=np.float64)

    rho = np.empty_like(xi)
    u = np.empty_like(xi)
    p = np.empty_like(xi)

    lside = xi < us
    # left wave
    if ps > p_l:  # shock
        sl = u_l - a_l * np.sqrt((g + 1) / (2 * g) * ps / p_l + (g - 1) / (2 * g))
        rho_sl = rho_l * ((ps / p_l + (g - 1) / (g + 1))
                          / ((g - 1) / (g + 1) * ps / p_l + 1))
        m = lside & (xi < sl)
        rho[m], u[m], p[m] = rho_l, u_l, p_l
        m = lside & (xi >= sl)
        rho[m], u[m], p[m] = rho_sl, us, ps
    else:  # rarefaction
        a_sl = a_l * (ps / p_l) ** ((g - 1) / (2 * g))
        head, tail = u_l - a_l, us - a_sl
        m = lside & (xi < head)
        rho[m], u[m], p[m] = rho_l, u_l, p_l
        m = lside & (xi >= head) & (xi < tail)
        af = 2 / (g + 1) * (a_l + 0.5 * (g - 1) * (u_l - xi[m]))
        u[m] = 2 / (g + 1) * (a_l + 0.5 * (g - 1) * u_l + xi[m])
        rho[m] = rho_l * (af / a_l) ** (2 / (g - 1))
        p[m] = p_l * (af / a_l) ** (2 * g / (g - 1))
        m = lside & (xi >= tail)
        rho[m] = rho_l * (ps / p_l) ** (1 / g)
        u[m], p[m] = us, ps

    rside = ~lside
    if ps > p_r:  # shock
        sr = u_r + a_r * np.sqrt((g + 1) / (2 * g) * ps / p_r + (g - 1) / (2 * g))
        rho_sr = rho_r * ((ps / p_r + (g - 1) / (g + 1))
                          / ((g - 1) / (g + 1) * ps / p_r + 1))
        m = rside & (xi > sr)
        rho[m], u[m], p[m] = rho_r, u_r, p_r
        m = rside & (xi <= sr)
        rho[m], u[m], p[m] = rho_sr, us, ps
    else:
        a_sr = a_r * (ps / p_r) ** ((g - 1) / (2 * g))
        head, tail = u_r + a_r, us + a_sr
        m = rside & (xi > head)
        rho[m], u[m], p[m] = rho_r, u_r, p_r
        m = rside & (xi <= head) & (xi > tail)
        af = 2 / (g + 1) * (a_r - 0.5 * (g - 1) * (u_r - xi[m]))
        u[m] = 2 / (g + 1) * (-a_r + 0.5 * (g - 1) * u_r + xi[m])
        rho[m] = rho_r * (af / a_r) ** (2 / (g - 1))
        p[m] = p_r * (af / a_r) ** (2 * g / (g - 1))
        m = rside & (xi <= tail)
        rho[m] = rho_r * (ps / p_r) ** (1 / g)
        u[m], p[m] = us, ps

    v = np.where(lside, v_l, v_r)
    w = np.where(lside, w_l, w_r)
    return rho, u, v, w, p


# ---------------------------------------------------------------------------
# shock problems

SOD_LEFT = (1.0, 0.0, 0.0, 0.0, 1.0)
SOD_RIGHT = (0.125, 0.0, 0.0, 0.0, 0.1)


def _x_profile_tt(grid: Grid3, values_of_x: Callable) -> TensorTrain3:
    prof = values_of_x(grid.coords(0))
    ones_y = np.ones(grid.shape[1] + 2 * GHOST)
    ones_z = np.ones(grid.shape[2] + 2 * GHOST)
    return tt_rank1(prof, ones_y, ones_z)


def sod_shock_tube() -> ProblemSpec:
    """Sod tube along x on a 3D mesh; outflow in x, periodic transverse."""
    gamma = 1.4

    def prim_profile(x):
        mask = x < 0.5
        out = [np.where(mask, l, r) for l, r in zip(SOD_LEFT, SOD_RIGHT)]
        return out

    def ic(x, y, z):
        x, _, _ = np.broadcast_arrays(x, y, z)
        return tuple(prim_to_cons(*prim_profile(x), gamma))

    def exact(x, y, z, t):
        x, _, _ = np.broadcast_arrays(x, y, z)
        if t <= 0:
            return ic(x, y, z)
        prim = exact_riemann(SOD_LEFT, SOD_RIGHT, gamma, (x - 0.5) / t)
        return tuple(prim_to_cons(*prim, gamma))

    def tt_ic(grid: Grid3, eps: float):
        cons_of_x = lambda x: prim_to_cons(*prim_profile(x), gamma)
        return [_x_profile_tt(grid, lambda x, c=c: cons_of_x(x)[c])
                for c in range(5)]

    bcs = BCSet({
        (0, 0): Outflow(), (0, 1): Outflow(),
        (1, 0): Periodic(), (1, 1): Periodic(),
        (2, 0): Periodic(), (2, 1): Periodic(),
    })
    return ProblemSpec(
        name="sod", bounds=((0.0, 1.0),) * 3, ncomp=5, t_final=0.2,
        dt_rule=DtRule("cfl", 0.5), c_eps=10.0, bcs=bcs, ic=ic, exact=exact,
        gamma=gamma, tt_ic=tt_ic)


SHU_OSHER_LEFT = (3.857143, 2.629369, 0.0, 0.0, 10.33333)


def shu_osher() -> ProblemSpec:
    """Mach-3 shock running into a sinusoidal density field (1D, extruded)."""
    gamma = 1.4

    def prim_profile(x):
        mask = x < -4.0
        rho = np.where(mask, SHU_OSHER_LEFT[0], 1.0 + 0.2 * np.sin(5.0 * x))
        u = np.where(mask, SHU_OSHER_LEFT[1], 0.0)
        p = np.where(mask, SHU_OSHER_LEFT[4], 1.0)
        zero = np.zeros_like(rho)
        return rho, u, zero, zero, p

    def ic(x, y, z):
        x, _, _ = np.broadcast_arrays(x, y, z)
        return tuple(prim_to_cons(*prim_profile(x), gamma))

    def tt_ic(grid: Grid3, eps: float):
        cons_of_x = lambda x: prim_to_cons(*prim_profile(x), gamma)
        return [_x_profile_tt(grid, lambda x, c=c: cons_of_x(x)[c])
                for c in range(5)]

    bcs = BCSet({
        (0, 0): InflowConst(SHU_OSHER_LEFT, gamma), (0, 1): Outflow(),
        (1, 0): Periodic(), (1, 1): Periodic(),
        (2, 0): Periodic(), (2, 1): Periodic(),
    })
    return ProblemSpec(
        name="shu_osher", bounds=((-5.0, 5.0), (0.0, 1.0), (0.0, 1.0)),
        ncomp=5, t_final=1.8, dt_rule=DtRule("cfl", 0.5), c_eps=10.0,
        bcs=bcs, ic=ic, gamma=gamma, tt_ic=tt_ic)


DMR_THETA = np.pi / 3.0
DMR_POST = (8.0, 8.25 * np.sin(DMR_THETA), -8.25 * np.cos(DMR_THETA), 0.0, 116.5)
DMR_PRE = (1.4, 0.0, 0.0, 0.0, 1.0)


def dmr_shock_x(y, t):
    """Oblique shock locus: contact at (1/6, 0) at t=0, 60 deg, Mach 10."""
    return 1.0 / 6.0 + (y + 20.0 * t) / np.sqrt(3.0)


def double_mach_reflection(c_eps: float = 1000.0) -> ProblemSpec:
    """Mach-10 oblique shock over a wall starting at x = 1/6.

    Cross interpolation cannot build the tilted-discontinuity initial state,
    so the TT initial condition is a superposition of one rank-1 train per
    y plane, rounded as it accumulates.
    """
    gamma = 1.4

    def ic(x, y, z):
        x, y, _ = np.broadcast_arrays(x, y, z)
        mask = x < dmr_shock_x(y, 0.0)
        prim = [np.where(mask, p, q) for p, q in zip(DMR_POST, DMR_PRE)]
        return tuple(prim_to_cons(*prim, gamma))

    def top_bc(x, y, z, t):
        x, y, _ = np.broadcast_arrays(x, y, z)
        mask = x < dmr_shock_x(y, t)
        prim = [np.where(mask, p, q) for p, q in zip(DMR_POST, DMR_PRE)]
        return tuple(prim_to_cons(*prim, gamma))

    def tt_ic(grid: Grid3, eps: float):
        from .weno_tt import rank1_superposition_ic

        ys = grid.coords(1)
        xs = grid.coords(0)
        profiles = []
        for yj in ys:
            mask = xs < dmr_shock_x(yj, 0.0)
            prim = [np.where(mask, p, q) for p, q in zip(DMR_POST, DMR_PRE)]
            profiles.append(np.stack(prim_to_cons(*prim, gamma)))
        return rank1_superposition_ic(profiles, grid.shape[2] + 2 * GHOST, eps)

    bcs = BCSet({
        (0, 0): Outflow(), (0, 1): InflowConst(DMR_PRE, gamma),
        (1, 0): DMRWall(DMR_POST, gamma, split=1.0 / 6.0),
        (1, 1): Dirichlet(top_bc),
        (2, 0): Periodic(), (2, 1): Periodic(),
    })
    return ProblemSpec(
        name="double_mach", bounds=((0.0, 4.0), (0.0, 1.0), (0.0, 1.0)),
        ncomp=5, t_final=0.2, dt_rule=DtRule("cfl", 0.5), c_eps=c_eps,
        bcs=bcs, ic=ic, gamma=gamma, tt_ic=tt_ic)


class GravitySource:
    """Unit gravity along +y: adds (0, 0, rho, 0, rho v) to the RHS."""

    def dense(self, grid: Grid3, t: float, U) -> np.ndarray:
        out = np.zeros_like(U)
        out[2] = U[0]
        out[4] = U[2]
        return out

    def tt(self, grid: Grid3, t: float, tts, eps: float, rng=None):
        return [None, None, tts[0], None, tts[2]]


def rayleigh_taylor(c_eps: float = 1.0, perturbed: bool = True) -> ProblemSpec:
    """Heavy-over-light interface driven by gravity, gamma = 5/3.

    The base pressure is hydrostatic (dp/dy = rho); a single-mode velocity
    perturbation proportional to cos(8 pi x) seeds the instability, mirror
    symmetric about x = 0.125.
    """
    gamma = 5.0 / 3.0
    amp = 0.025 if perturbed else 0.0

    def prim(x, y):
        heavy = y <= 0.5
        rho = np.where(heavy, 2.0, 1.0)
        p = np.where(heavy, 2.0 * y + 1.0, y + 1.5)
        v = -amp * np.sqrt(gamma * p / rho) * np.cos(8 * np.pi * x)
        zero = np.zeros_like(rho)
        return rho, zero, v, zero, p

    def ic(x, y, z):
        x, y, _ = np.broadcast_arrays(x, y, z)
        return tuple(prim_to_cons(*prim(x, y), gamma))

    def y_bc(x, y, z, t):
        return ic(x, y, z)

    def tt_ic(grid: Grid3, eps: float):
        xs, ys = grid.coords(0), grid.coords(1)
        ones_z = np.ones(grid.shape[2] + 2 * GHOST)
        heavy = ys <= 0.5
        rho_y = np.where(heavy, 2.0, 1.0)
        p_y = np.where(heavy, 2.0 * ys + 1.0, ys + 1.5)
        cosx = np.cos(8 * np.pi * xs)
        ones_x = np.ones_like(xs)

        rho = tt_rank1(ones_x, rho_y, ones_z)
        rho_u = tt_rank1(0.0 * ones_x, 0.0 * rho_y, ones_z)
        rho_v = tt_rank1(cosx, -amp * np.sqrt(gamma * p_y * rho_y), ones_z)
        rho_w = tt_rank1(0.0 * ones_x, 0.0 * rho_y, ones_z)
        # rho E = p/(g-1) + amp^2 g p cos^2(8 pi x) / 2, cos^2 = (1+cos 16pix)/2
        base = tt_rank1(ones_x, p_y / (gamma - 1.0), ones_z)
        ke_mean = tt_rank1(ones_x, 0.25 * amp**2 * gamma * p_y, ones_z)
        ke_wave = tt_rank1(np.cos(16 * np.pi * xs),
                           0.25 * amp**2 * gamma * p_y, ones_z)
        rho_e = tt_round(tt_add(tt_add(base, ke_mean), ke_wave), 1e-14)
        return [rho, rho_u, rho_v, rho_w, rho_e]

    bcs = BCSet({
        (0, 0): Symmetry(flip_component=1), (0, 1): Symmetry(flip_component=1),
        (1, 0): Dirichlet(y_bc), (1, 1): Dirichlet(y_bc),
        (2, 0): Periodic(), (2, 1): Periodic(),
    })
    return ProblemSpec(
        name="rayleigh_taylor",
        bounds=((0.0, 0.25), (0.0, 1.0), (0.0, 0.25)), ncomp=5, t_final=1.95,
        dt_rule=DtRule("cfl", 0.5), c_eps=c_eps, bcs=bcs, ic=ic, gamma=gamma,
        source=GravitySource(), tt_ic=tt_ic)


# ---------------------------------------------------------------------------
# catalog

PROBLEMS: dict[str, Callable[[], ProblemSpec]] = {
    "advection": linear_advection_3d,
    "burgers": burgers_3d,
    "vortex": isentropic_vortex,
    "manufactured": manufactured_solution,
    "sod": sod_shock_tube,
    "shu_osher": shu_osher,
    "double_mach": double_mach_reflection,
    "rayleigh_taylor": rayleigh_taylor,
}


def get_problem(name: str) -> ProblemSpec:
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; "
                       f"available: {sorted(PROBLEMS)}") from None
