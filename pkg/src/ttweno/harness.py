"""Run drivers, study loops, and report plumbing.

A run executes one problem on one grid with one backend and produces a
RunReport: per-component L2 errors against the exact solution where one
exists, final TT ranks, wall time of the stepping loop (setup and I/O
excluded), compression ratios, and per-step telemetry records.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import weno_tt as wt
from .grid import GHOST, INTERIOR, Grid3
from .problems import DtRule, ProblemSpec, get_problem
from .weno_ft import max_wavespeed, rhs_euler, rhs_scalar, ssprk3_step

EULER_COMPONENTS = ("rho", "rho_u", "rho_v", "rho_w", "rho_E")
SCALAR_COMPONENTS = ("u",)


@dataclass
class RunConfig:
    problem: str
    grid: tuple[int, int, int]
    backend: str  # "full" | "tt"
    c_eps: float | None = None
    fixed_eps: float | None = None
    dt_rule: DtRule | None = None
    t_final: float | None = None
    out_dir: str | None = None
    seed: int = 0
    cross_floor: float | None = None

    def __post_init__(self):
        if self.backend not in ("full", "tt"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if any(n < 8 for n in self.grid):
            raise ValueError("grid must be at least 8 per axis "
                             "(WENO stencil plus ghosts)")
        if self.c_eps is not None and self.fixed_eps is not None:
            raise ValueError("choose exactly one tolerance policy "
                             "(c_eps or fixed_eps)")


@dataclass
class TelemetryRecord:
    step: int
    t: float
    dt: float
    eps_tt: float
    ranks: list[tuple[int, int]]
    wall_ms: float


@dataclass
class RunReport:
    problem: str
    backend: str
    grid: tuple[int, int, int]
    components: tuple[str, ...]
    l2_errors: list[float] | None
    final_ranks: list[tuple[int, int]]
    compression: list[float]
    wall_time_s: float
    seed: int
    telemetry: list[TelemetryRecord] = field(default_factory=list)

    @property
    def l2_error(self) -> float | None:
        """Scalar headline error: the density (first-component) error."""
        return None if self.l2_errors is None else self.l2_errors[0]

    # -- CSV round trip -----------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["problem", "backend", "nx", "ny", "nz", "seed",
                    "component", "l2_error", "r1", "r2", "compression",
                    "wall_s"])
        for i, name in enumerate(self.components):
            err = "" if self.l2_errors is None else repr(self.l2_errors[i])
            r1, r2 = self.final_ranks[i] if self.final_ranks else (0, 0)
            w.writerow([self.problem, self.backend, *self.grid, self.seed,
                        name, err, r1, r2, repr(self.compression[i]),
                        repr(self.wall_time_s)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RunReport":
        rows = list(csv.reader(io.StringIO(text)))
        body = rows[1:]
        first = body[0]
        comps = tuple(r[6] for r in body)
        errors = None
        if body[0][7] != "":
            errors = [float(r[7]) for r in body]
        return cls(
            problem=first[0], backend=first[1],
            grid=(int(first[2]), int(first[3]), int(first[4])),
            components=comps, l2_errors=errors,
            final_ranks=[(int(r[8]), int(r[9])) for r in body],
            compression=[float(r[10]) for r in body],
            wall_time_s=float(first[11]), seed=int(first[5]))

    def telemetry_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        head = ["step", "t", "dt", "eps_tt"]
        for name in self.components:
            head += [f"r1_{name}", f"r2_{name}"]
        head.append("wall_ms")
        w.writerow(head)
        for rec in self.telemetry:
            row = [rec.step, repr(rec.t), repr(rec.dt), repr(rec.eps_tt)]
            for r1, r2 in rec.ranks:
                row += [r1, r2]
            row.append(repr(rec.wall_ms))
            w.writerow(row)
        return buf.getvalue()


def _dense_ic(spec: ProblemSpec, grid: Grid3) -> np.ndarray:
    x, y, z = grid.mesh()
    comps = spec.ic(x, y, z)
    return np.stack([np.broadcast_to(np.asarray(c, dtype=np.float64),
                                     grid.padded_shape).copy() for c in comps])


def _exact_dense(spec: ProblemSpec, grid: Grid3, t: float) -> np.ndarray:
    x, y, z = grid.mesh()
    comps = spec.exact(x, y, z, t)
    return np.stack([np.broadcast_to(np.asarray(c, dtype=np.float64),
                                     grid.padded_shape) for c in comps])


def _nsteps_power_law(spec_dt: DtRule, h: float, t_final: float) -> int:
    dt = spec_dt.coeff * h**spec_dt.power
    return max(1, int(np.ceil(t_final / dt - 1e-12)))


def _apply_overrides(spec: ProblemSpec, cfg: RunConfig):
    t_final = cfg.t_final if cfg.t_final is not None else spec.t_final
    dt_rule = cfg.dt_rule if cfg.dt_rule is not None else spec.dt_rule
    c_eps = cfg.c_eps if cfg.c_eps is not None else spec.c_eps
    return t_final, dt_rule, c_eps


def run(cfg: RunConfig, sink=None) -> RunReport:
    """Execute one configured run; optionally stream telemetry to ``sink``."""
    spec = get_problem(cfg.problem)
    grid = Grid3(spec.bounds, cfg.grid)
    t_final, dt_rule, c_eps = _apply_overrides(spec, cfg)
    names = SCALAR_COMPONENTS if spec.ncomp == 1 else EULER_COMPONENTS

    try:
        if cfg.backend == "full":
            final, telemetry, wall = _run_dense(spec, grid, dt_rule, t_final,
                                                sink)
            final_ranks = []
            compression = [1.0] * spec.ncomp
            errors = _dense_errors(spec, grid, final, t_final)
        else:
            final, telemetry, wall = _run_tt(spec, grid, dt_rule, t_final,
                                             c_eps, cfg, sink)
            final_ranks = final.ranks()
            dense_count = float(np.prod(grid.padded_shape))
            compression = [f.storage_size / dense_count for f in final.fields]
            errors = _tt_errors(spec, grid, final, t_final)
    except Exception as exc:
        raise RuntimeError(
            f"run failed (problem={cfg.problem}, backend={cfg.backend}, "
            f"grid={cfg.grid}): {exc}") from exc

    report = RunReport(
        problem=cfg.problem, backend=cfg.backend, grid=cfg.grid,
        components=names, l2_errors=errors, final_ranks=final_ranks,
        compression=compression, wall_time_s=wall, seed=cfg.seed,
        telemetry=telemetry)
    if cfg.out_dir is not None:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        tag = f"{cfg.problem}_{cfg.backend}_{'x'.join(map(str, cfg.grid))}"
        (out / f"{tag}_report.csv").write_text(report.to_csv())
        (out / f"{tag}_telemetry.csv").write_text(report.telemetry_csv())
    return report


def _dense_errors(spec, grid, U, t_final):
    if spec.exact is None:
        return None
    ref = _exact_dense(spec, grid, t_final)
    return [grid.l2_norm(grid.interior(U[c] - ref[c]))
            for c in range(spec.ncomp)]


def _tt_errors(spec, grid, state, t_final):
    if spec.exact is None:
        return None
    from .tt_core import tt_full

    ref = _exact_dense(spec, grid, t_final)
    errs = []
    for c in range(spec.ncomp):
        diff = tt_full(state.fields[c]) - ref[c]
        errs.append(grid.l2_norm(grid.interior(diff)))
    return errs


def _run_dense(spec, grid, dt_rule, t_final, sink):
    U = _dense_ic(spec, grid)
    gamma = spec.gamma

    if spec.ncomp == 1:
        def rhs(state, t):
            return rhs_scalar(grid, state[0], spec.flux, spec.bcs, t)[None]
    else:
        def rhs(state, t):
            return rhs_euler(grid, state, gamma, spec.bcs, t, spec.source)

    telemetry: list[TelemetryRecord] = []
    t = 0.0
    step = 0
    wall = 0.0
    if dt_rule.kind == "power_law":
        nsteps = _nsteps_power_law(dt_rule, grid.h, t_final)
        dt = t_final / nsteps
        while step < nsteps:
            t0 = time.perf_counter()
            U = ssprk3_step(U, dt, rhs, t)
            wall += time.perf_counter() - t0
            t += dt
            step += 1
            _emit(telemetry, sink, step, t, dt, 0.0, [], wall)
    else:
        while t < t_final - 1e-14:
            t0 = time.perf_counter()
            if spec.ncomp == 1:
                alpha = float(np.max(np.abs(spec.flux.wave_speed(U[0]))))
            else:
                alpha = max_wavespeed(U, gamma)
            dt = min(dt_rule.coeff * grid.h / alpha, t_final - t)
            U = ssprk3_step(U, dt, rhs, t)
            wall += time.perf_counter() - t0
            t += dt
            step += 1
            _emit(telemetry, sink, step, t, dt, 0.0, [], wall)
    return U, telemetry, wall


def _run_tt(spec, grid, dt_rule, t_final, c_eps, cfg, sink):
    rng = np.random.default_rng(cfg.seed)
    ctrl = wt.EpsController(
        c_eps=c_eps, volume=grid.volume, fixed_eps=cfg.fixed_eps,
        cross_floor=cfg.cross_floor)
    model = wt.make_model(spec.gamma, spec.flux)

    eps0 = wt.estimate_ic_eps(spec, grid, ctrl, rng)
    state = wt.build_tt_ic(spec, grid, eps0, rng)
    state = wt.TTConservedState(
        spec.bcs.apply_tt(state.fields, grid, 0.0, eps0, rng), grid)

    telemetry: list[TelemetryRecord] = []
    t = 0.0
    step = 0
    wall = 0.0
    nsteps = None
    if dt_rule.kind == "power_law":
        nsteps = _nsteps_power_law(dt_rule, grid.h, t_final)

    while (step < nsteps) if nsteps is not None else (t < t_final - 1e-14):
        t0 = time.perf_counter()
        eps = wt.eps_tt(state, grid.h, ctrl)
        eps_c = wt.cross_eps(eps, ctrl)
        if dt_rule.kind == "power_law":
            dt = t_final / nsteps
        else:
            dt = min(wt.timestep_cfl(state, dt_rule.coeff, grid.h, model,
                                     eps_c, rng), t_final - t)

        def rhs(s, ts):
            return wt.rhs_tt(s, None, eps_c, model, ts, spec.source, rng)

        state = wt.tt_ssprk3_step(state, dt, eps, rhs, t, bcs=spec.bcs, rng=rng)
        wall += time.perf_counter() - t0
        t += dt
        step += 1
        _emit(telemetry, sink, step, t, dt, eps, state.ranks(), wall)
    return state, telemetry, wall


def _emit(telemetry, sink, step, t, dt, eps, ranks, wall):
    rec = TelemetryRecord(step=step, t=t, dt=dt, eps_tt=eps,
                          ranks=list(ranks), wall_ms=wall * 1000.0)
    telemetry.append(rec)
    if sink is not None:
        sink(rec)


# ---------------------------------------------------------------------------
# studies

def convergence_study(problem: str, grids, backend: str,
                      c_eps: float | None = None,
                      fixed_eps: float | None = None, seed: int = 0,
                      out_dir=None):
    """Errors and observed orders over a grid sequence (refinement factor 2)."""
    rows = []
    prev_err = None
    for n in grids:
        cfg = RunConfig(problem=problem, grid=(n, n, n), backend=backend,
                        c_eps=c_eps, fixed_eps=fixed_eps, seed=seed)
        rep = run(cfg)
        err = rep.l2_error
        order = (np.log2(prev_err / err)
                 if prev_err is not None and err and err > 0 else None)
        rows.append({"grid": n, "error": err, "order": order, "report": rep})
        prev_err = err
    if out_dir is not None:
        text = convergence_csv(problem, backend, rows)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"convergence_{problem}_{backend}.csv").write_text(text)
    return rows


def convergence_csv(problem, backend, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["problem", "backend", "grid", "l2_error", "order"])
    for r in rows:
        w.writerow([problem, backend, r["grid"],
                    "" if r["error"] is None else repr(r["error"]),
                    "" if r["order"] is None else repr(r["order"])])
    return buf.getvalue()


def convergence_table(rows) -> str:
    lines = [f"{'grid':>6} {'L2 error':>14} {'order':>8}"]
    for r in rows:
        err = "-" if r["error"] is None else f"{r['error']:.3e}"
        order = "-" if r["order"] is None else f"{r['order']:.2f}"
        lines.append(f"{r['grid']:>6} {err:>14} {order:>8}")
    return "\n".join(lines)


def exact_density_ranks(problem: str, n: int, eps: float = 1e-12):
    """Dense-SVD oracle for the exact solution's TT ranks at t=0 (interior grid)."""
    from .tt_core import tt_from_full

    spec = get_problem(problem)
    xs = [np.asarray([(a + (i + 0.5) * (b - a) / n) for i in range(n)])
          for a, b in spec.bounds]
    X = xs[0][:, None, None]
    Y = xs[1][None, :, None]
    Z = xs[2][None, None, :]
    comps = spec.ic(X, Y, Z)
    out = []
    for c in comps:
        dense = np.broadcast_to(np.asarray(c, dtype=np.float64), (n, n, n))
        out.append(tt_from_full(dense, eps).ranks)
    return out


def eps_sweep(problem: str, h_list, eps_list, seed: int = 0, out_dir=None):
    """Fixed-tolerance parametric study: rank ratio and error per (h, eps).

    Grid cells report the density rank relative to the dense-SVD oracle of
    the exact solution, plus the L2 error; a full-tensor anchor run per h
    gives the truncation-dominated reference.
    """
    cells = []
    ft_anchor = {}
    for h in h_list:
        n = int(round(1.0 / h))
        ft = run(RunConfig(problem=problem, grid=(n, n, n), backend="full",
                           seed=seed))
        ft_anchor[n] = ft.l2_error
        exact_r = max(exact_density_ranks(problem, n)[0])
        for eps in eps_list:
            rep = run(RunConfig(problem=problem, grid=(n, n, n), backend="tt",
                                fixed_eps=eps, seed=seed))
            ratio = max(rep.final_ranks[0]) / exact_r
            cells.append({"h": h, "grid": n, "eps": eps,
                          "rank_ratio": ratio, "error": rep.l2_error,
                          "ft_error": ft.l2_error,
                          "log10_h5": 5 * np.log10(h),
                          "log10_eps": np.log10(eps)})
    if out_dir is not None:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["problem", "grid", "h", "eps", "log10_h5", "log10_eps",
                    "rank_ratio", "l2_error", "ft_error"])
        for c in cells:
            w.writerow([problem, c["grid"], repr(c["h"]), repr(c["eps"]),
                        repr(c["log10_h5"]), repr(c["log10_eps"]),
                        repr(c["rank_ratio"]), repr(c["error"]),
                        repr(c["ft_error"])])
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"sweep_{problem}.csv").write_text(buf.getvalue())
    return cells


def bench(problem: str, grids, repetitions: int = 1, seed: int = 0,
          ft_cell_cutoff: int = 80**3, out_dir=None):
    """Wall-time and memory comparison of the two backends per grid.

    Full-tensor runs above the cell cutoff are extrapolated from the last
    two measured grids (quartic growth fallback when only one exists).
    """
    rows = []
    measured = []
    for shape in grids:
        shape = tuple(shape) if not np.isscalar(shape) else (shape,) * 3
        cells = int(np.prod(shape))
        tt_times = []
        for _ in range(repetitions):
            rep_tt = run(RunConfig(problem=problem, grid=shape, backend="tt",
                                   seed=seed))
            tt_times.append(rep_tt.wall_time_s)
        tt_time = min(tt_times)
        if cells <= ft_cell_cutoff:
            ft_times = []
            for _ in range(repetitions):
                rep_ft = run(RunConfig(problem=problem, grid=shape,
                                       backend="full", seed=seed))
                ft_times.append(rep_ft.wall_time_s)
            ft_time = min(ft_times)
            measured.append((cells, ft_time))
            extrapolated = False
        else:
            ft_time = _extrapolate_ft(measured, cells)
            extrapolated = True
        rows.append({
            "grid": shape, "cells": cells, "tt_time": tt_time,
            "ft_time": ft_time, "ft_extrapolated": extrapolated,
            "speedup": ft_time / tt_time if tt_time > 0 else np.inf,
            "compression": list(rep_tt.compression),
            "final_ranks": rep_tt.final_ranks,
        })
    if out_dir is not None:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["problem", "nx", "ny", "nz", "cells", "tt_s", "ft_s",
                    "ft_extrapolated", "speedup", "compression_rho"])
        for r in rows:
            w.writerow([problem, *r["grid"], r["cells"], repr(r["tt_time"]),
                        repr(r["ft_time"]), r["ft_extrapolated"],
                        repr(r["speedup"]), repr(r["compression"][0])])
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"bench_{problem}.csv").write_text(buf.getvalue())
    return rows


def _extrapolate_ft(measured, cells):
    if not measured:
        raise ValueError("no measured full-tensor grids to extrapolate from")
    if len(measured) == 1:
        c0, t0 = measured[-1]
        return t0 * (cells / c0) ** (4.0 / 3.0)
    (c0, t0), (c1, t1) = measured[-2], measured[-1]
    p = np.log(t1 / t0) / np.log(c1 / c0)
    return t1 * (cells / c1) ** p


# ---------------------------------------------------------------------------
# reference solutions

def shu_osher_reference(out_dir, nx: int = 2000, transverse: int = 8):
    """Density profile at T=1.8 from the dense solver on an extruded grid.

    Cached as CSV in ``out_dir`` after the first generation.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache = out / f"shu_osher_reference_{nx}.csv"
    if cache.exists():
        rows = list(csv.reader(cache.read_text().splitlines()))[1:]
        x = np.array([float(r[0]) for r in rows])
        rho = np.array([float(r[1]) for r in rows])
        return x, rho

    spec = get_problem("shu_osher")
    grid = Grid3(spec.bounds, (nx, transverse, transverse))
    U, _, _ = _run_dense(spec, grid, spec.dt_rule, spec.t_final, None)
    x = grid.coords(0)[INTERIOR]
    rho = U[0][INTERIOR, GHOST + transverse // 2, GHOST + transverse // 2]
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["x", "rho"])
    for xi, ri in zip(x, rho):
        w.writerow([repr(float(xi)), repr(float(ri))])
    cache.write_text(buf.getvalue())
    return x, rho
