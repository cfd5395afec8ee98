import numpy as np
import pytest

from ttweno import weno_tt as wt
from ttweno.grid import Grid3
from ttweno.kernels import weno5_points
from ttweno.problems import get_problem
from ttweno.tt_core import tt_eval_batch, tt_from_full, tt_full, tt_rank1
from ttweno.weno_ft import lf_split, prim_to_cons, rhs_euler, rhs_scalar, ssprk3_step


def dense_state(grid, ic):
    x, y, z = grid.mesh()
    return np.stack([np.broadcast_to(c, grid.padded_shape) for c in ic(x, y, z)])


def tt_state(spec, grid, eps=1e-12, rng=None):
    rng = rng or np.random.default_rng(0)
    st = wt.build_tt_ic(spec, grid, eps, rng)
    fields = spec.bcs.apply_tt(st.fields, grid, 0.0, eps, rng)
    return wt.TTConservedState(fields, grid)


class TestEpsController:
    def test_reference_value(self):
        grid = Grid3(((0, 1),) * 3, (40, 40, 40))
        ones = [tt_rank1(*(np.ones(46),) * 3)]
        state = wt.TTConservedState(ones, grid)
        ctrl = wt.EpsController(c_eps=10.0, volume=1.0)
        got = wt.eps_tt(state, grid.h, ctrl)
        # 10 * (1/40)^{7/2} / 40^{3/2}
        expected = 10.0 * (1.0 / 40.0) ** 3.5 / 40.0**1.5
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(9.765e-8, rel=1e-3)

    def test_linear_in_c_eps(self):
        grid = Grid3(((0, 1),) * 3, (8, 8, 8))
        state = wt.TTConservedState([tt_rank1(*(np.ones(14),) * 3)], grid)
        a = wt.eps_tt(state, grid.h, wt.EpsController(c_eps=1.0, volume=1.0))
        b = wt.eps_tt(state, grid.h, wt.EpsController(c_eps=2.0, volume=1.0))
        assert b == pytest.approx(2 * a, rel=1e-13)

    def test_power_law_in_h(self):
        state8 = wt.TTConservedState(
            [tt_rank1(*(np.ones(14),) * 3)], Grid3(((0, 1),) * 3, (8, 8, 8)))
        ctrl = wt.EpsController(c_eps=1.0, volume=1.0)
        a = wt.eps_tt(state8, 1.0 / 8, ctrl)
        b = wt.eps_tt(state8, 1.0 / 16, ctrl)
        assert b / a == pytest.approx(2.0**-3.5, rel=1e-13)

    def test_fixed_mode(self):
        grid = Grid3(((0, 1),) * 3, (8, 8, 8))
        state = wt.TTConservedState([tt_rank1(*(np.ones(14),) * 3)], grid)
        ctrl = wt.EpsController(fixed_eps=1e-5)
        assert wt.eps_tt(state, grid.h, ctrl) == 1e-5

    def test_zero_state_rejected(self):
        grid = Grid3(((0, 1),) * 3, (8, 8, 8))
        state = wt.TTConservedState([tt_rank1(*(np.zeros(14),) * 3)], grid)
        with pytest.raises(ValueError):
            wt.eps_tt(state, grid.h, wt.EpsController())


class TestLFCross:
    def test_uniform_state_reproduces_physical_flux(self):
        spec = get_problem("sod")
        grid = Grid3(((0, 1),) * 3, (12, 12, 12))
        prim = (1.0, 0.1, 0.0, 0.0, 1.0)

        def ic(x, y, z):
            shape = np.broadcast_shapes(np.shape(x + y + z))
            return tuple(np.full(shape, v)
                         for v in prim_to_cons(*prim, 1.4))

        U = dense_state(grid, ic)
        fields = [tt_from_full(U[c], 1e-13) for c in range(5)]
        state = wt.TTConservedState(fields, grid)
        model = wt.make_model(1.4, None)
        plus, minus, alpha = lf_cross = wt.lf_cross(state, 0, 1e-10, model)
        # f+ + f- recovers the physical flux F = (rho u, rho u^2+p, ...)
        rho, u, p = 1.0, 0.1, 1.0
        rE = p / 0.4 + 0.5 * rho * u * u
        F = [rho * u, rho * u * u + p, 0.0, 0.0, u * (rE + p)]
        for c in range(5):
            total = tt_full(plus[c]) + tt_full(minus[c])
            np.testing.assert_allclose(total, F[c], atol=1e-9)

    def test_sod_matches_dense_splitting_pointwise(self):
        spec = get_problem("sod")
        grid = Grid3(spec.bounds, (16, 16, 16))
        rng = np.random.default_rng(1)
        state = tt_state(spec, grid)
        model = wt.make_model(spec.gamma, spec.flux)
        stats = {}
        plus, minus, alpha = wt.lf_cross(state, 0, 1e-10, model, rng=rng,
                                         stats=stats)
        U = dense_state(spec, grid) if False else dense_state(grid, spec.ic)
        spec.bcs.apply_dense(grid, U, 0.0)
        from ttweno.weno_ft import euler_flux

        F = euler_flux(U, 0, spec.gamma)
        idx = np.stack([rng.integers(0, s, 256) for s in grid.padded_shape], 1)
        for c in range(5):
            fp, fm = lf_split(F[c], U[c], alpha)
            ref = fp[idx[:, 0], idx[:, 1], idx[:, 2]]
            got = tt_eval_batch(plus[c], idx)
            scale = max(np.sqrt(np.mean(ref**2)), 1e-12)
            assert np.sqrt(np.mean((got - ref) ** 2)) / scale < 1e-8 or \
                np.abs(got - ref).max() < 1e-10

    def test_transverse_axis_on_x_only_field_is_constant(self):
        spec = get_problem("sod")
        grid = Grid3(spec.bounds, (16, 12, 10))
        state = tt_state(spec, grid)
        model = wt.make_model(spec.gamma, spec.flux)
        plus, minus, _ = wt.lf_cross(state, 1, 1e-10, model)
        for c in (0, 4):
            full = tt_full(plus[c])
            assert np.abs(full - full[:, :1, :1]).max() < 1e-10

    def test_guess_is_max_rank_component(self):
        spec = get_problem("manufactured")
        grid = Grid3(spec.bounds, (10, 10, 10))
        rng = np.random.default_rng(2)
        state = tt_state(spec, grid, eps=1e-10, rng=rng)
        model = wt.make_model(spec.gamma, spec.flux)
        stats = {}
        wt.lf_cross(state, 0, 1e-8, model, rng=rng, stats=stats)
        ranks = [max(f.ranks) for f in state.fields]
        assert stats["guess_component"] == int(np.argmax(ranks))


class TestWenoCross:
    def test_constant_field(self):
        grid = Grid3(((0, 1),) * 3, (10, 10, 10))
        v = tt_rank1(np.full(16, 2.5), np.ones(16), np.ones(16))
        vp, vm = wt.weno_cross(v, grid, 0, 1e-10)
        assert vp.ranks == (1, 1) and vm.ranks == (1, 1)
        # slots whose stencils stay in range (the scheme reads only those)
        np.testing.assert_allclose(tt_full(vp)[2:-2], 2.5, rtol=1e-12)
        np.testing.assert_allclose(tt_full(vm)[2:-2], 2.5, rtol=1e-12)

    def test_smooth_profile_matches_dense_kernel(self):
        grid = Grid3(((0, 1),) * 3, (16, 12, 10))
        xs = grid.coords(0)
        prof = np.sin(2 * np.pi * xs) + 1.5
        v = tt_rank1(prof, np.ones(18), np.ones(16))
        vp = wt.weno_cross(v, grid, 0, 1e-10, side=+1)
        eps_w = grid.spacing[0] ** 2
        # dense oracle on the interior-reachable interface range
        stencils = np.stack([prof[q : q + len(xs) - 4] for q in range(5)], 1)
        ref = weno5_points(stencils, eps_w, +1)
        got = tt_full(vp)[2 : len(xs) - 2, 5, 5]
        np.testing.assert_allclose(got, ref, atol=1e-8)

    def test_step_profile_keeps_local_bounds(self):
        grid = Grid3(((0, 1),) * 3, (24, 10, 8))
        xs = grid.coords(0)
        prof = np.where(xs < 0.5, 1.0, 0.1)
        v = tt_rank1(prof, np.ones(16), np.ones(14))
        vp = wt.weno_cross(v, grid, 0, 1e-10, side=+1)
        got = tt_full(vp)[2:-3, 4, 4]
        lo = np.minimum.reduce([prof[q : q + len(xs) - 5] for q in range(5)])
        hi = np.maximum.reduce([prof[q : q + len(xs) - 5] for q in range(5)])
        # slack covers the finite-eps leakage of the suppressed stencils
        assert np.all(got >= lo - 1e-5) and np.all(got <= hi + 1e-5)


class TestRhsTT:
    def test_uniform_state_is_steady(self):
        spec = get_problem("sod")
        grid = Grid3(((0, 1),) * 3, (10, 10, 10))
        prim = (1.0, 0.1, 0.2, 0.3, 1.0)

        def ic(x, y, z):
            shape = np.shape(x + y + z)
            return tuple(np.full(shape, v) for v in prim_to_cons(*prim, 1.4))

        U = dense_state(grid, ic)
        fields = [tt_from_full(U[c], 1e-13) for c in range(5)]
        bcs = spec.bcs  # outflow/periodic: uniform state consistent
        fields = bcs.apply_tt(fields, grid, 0.0, 1e-10)
        state = wt.TTConservedState(fields, grid)
        model = wt.make_model(1.4, None)
        out = wt.rhs_tt(state, None, 1e-10, model)
        from ttweno.tt_core import tt_norm

        state_norm = max(tt_norm(f) for f in fields)
        for c in range(5):
            assert tt_norm(out[c]) <= 1e-10 * state_norm

    def test_sod_matches_dense_rhs(self):
        spec = get_problem("sod")
        grid = Grid3(spec.bounds, (16, 16, 16))
        rng = np.random.default_rng(3)
        eps = 1e-9
        state = tt_state(spec, grid, rng=rng)
        model = wt.make_model(spec.gamma, spec.flux)
        out = wt.rhs_tt(state, None, eps, model, rng=rng)
        U = dense_state(grid, spec.ic)
        ref = rhs_euler(grid, U, spec.gamma, spec.bcs, 0.0)
        inner = (slice(3, -3),) * 3
        scale = max(np.linalg.norm(ref[c][inner]) for c in range(5))
        for c in range(5):
            diff = tt_full(out[c])[inner] - ref[c][inner]
            assert np.linalg.norm(diff) <= 10 * eps * max(
                scale, np.linalg.norm(ref[c][inner]))


class TestSSPRK3TT:
    def test_zero_rhs_preserves_state(self):
        spec = get_problem("sod")
        grid = Grid3(spec.bounds, (12, 12, 12))
        state = tt_state(spec, grid)
        from ttweno.tt_core import tt_zeros

        def rhs(s, t):
            return [tt_zeros(grid.padded_shape) for _ in range(5)]

        out = wt.tt_ssprk3_step(state, 0.01, 1e-10, rhs)
        for a, b in zip(state.fields, out.fields):
            np.testing.assert_allclose(tt_full(a), tt_full(b), atol=1e-9)
            assert b.ranks == a.ranks

    def test_sod_step_stays_rank_one(self):
        spec = get_problem("sod")
        grid = Grid3(spec.bounds, (16, 16, 16))
        rng = np.random.default_rng(4)
        state = tt_state(spec, grid, rng=rng)
        model = wt.make_model(spec.gamma, spec.flux)
        ctrl = wt.EpsController(c_eps=spec.c_eps, volume=grid.volume)
        eps = wt.eps_tt(state, grid.h, ctrl)
        dt = wt.timestep_cfl(state, 0.5, grid.h, model, eps, rng)

        def rhs(s, t):
            return wt.rhs_tt(s, None, eps, model, t, rng=rng)

        out = wt.tt_ssprk3_step(state, dt, eps, rhs, 0.0, bcs=spec.bcs, rng=rng)
        assert all(r == (1, 1) for r in out.ranks())

    def test_advection_step_matches_dense(self):
        spec = get_problem("advection")
        grid = Grid3(spec.bounds, (16, 16, 16))
        rng = np.random.default_rng(5)
        eps = 1e-9
        state = tt_state(spec, grid, eps=eps, rng=rng)
        model = wt.make_model(spec.gamma, spec.flux)
        dt = 0.5 * grid.h ** (5.0 / 3.0)

        def rhs(s, t):
            return wt.rhs_tt(s, None, eps, model, t, rng=rng)

        out = wt.tt_ssprk3_step(state, dt, eps, rhs, 0.0, bcs=spec.bcs, rng=rng)
        x, y, z = grid.mesh()
        u = np.broadcast_to(spec.ic(x, y, z)[0], grid.padded_shape).astype(float)
        from ttweno.weno_ft import ADVECTION_FLUX

        ref = ssprk3_step(u, dt, lambda s, t: rhs_scalar(grid, s, ADVECTION_FLUX,
                                                         spec.bcs, t), 0.0)
        inner = (slice(3, -3),) * 3
        diff = np.linalg.norm(tt_full(out.fields[0])[inner] - ref[inner])
        assert diff <= 10 * eps * np.linalg.norm(ref[inner])


class TestTimestep:
    def test_fixed_numbers(self):
        # lam=0.5, h=0.01, max alpha=2 -> dt=0.0025 via the formula
        assert 0.5 * 0.01 / 2.0 == pytest.approx(0.0025)

    def test_uniform_state_sound_speed(self):
        spec = get_problem("sod")
        grid = Grid3(((0, 1),) * 3, (10, 10, 10))

        def ic(x, y, z):
            shape = np.shape(x + y + z)
            return tuple(np.full(shape, v)
                         for v in prim_to_cons(1.0, 0.0, 0.0, 0.0, 1.0, 1.4))

        U = dense_state(grid, ic)
        fields = [tt_from_full(U[c], 1e-13) for c in range(5)]
        state = wt.TTConservedState(fields, grid)
        model = wt.make_model(1.4, None)
        dt = wt.timestep_cfl(state, 0.5, grid.h, model, 1e-10)
        assert dt == pytest.approx(0.5 * grid.h / np.sqrt(1.4), rel=1e-6)

    def test_sod_alpha_from_left_state(self):
        spec = get_problem("sod")
        grid = Grid3(spec.bounds, (16, 10, 10))
        state = tt_state(spec, grid)
        model = wt.make_model(spec.gamma, spec.flux)
        dt = wt.timestep_cfl(state, 0.5, grid.h, model, 1e-10)
        assert dt == pytest.approx(0.5 * grid.h / 1.18322, rel=1e-4)


class TestRank1Superposition:
    def test_identical_rows_collapse_to_rank_one(self):
        prof = np.linspace(1.0, 2.0, 20).reshape(1, 20)
        profiles = [prof] * 12
        out = wt.rank1_superposition_ic(profiles, 8, 1e-12)
        assert out[0].ranks == (1, 1)

    def test_oblique_shock_matches_dense_ic(self):
        spec = get_problem("double_mach")
        grid = Grid3(spec.bounds, (24, 24, 8))
        eps = 1e-10
        fields = spec.tt_ic(grid, eps)
        U = dense_state(grid, spec.ic)
        for c in range(5):
            got = tt_full(fields[c])
            err = np.linalg.norm(got - U[c])
            assert err <= 20 * eps * np.linalg.norm(U[c]) + 1e-12

    def test_rank_growth_scales_with_ny(self):
        spec = get_problem("double_mach")
        target = {}
        for ny in (24, 48):
            grid = Grid3(spec.bounds, (2 * ny, ny, 8))
            fields = spec.tt_ic(grid, 1e-10)
            target[ny] = max(fields[0].ranks)
        for ny, r in target.items():
            predicted = ny / np.tan(np.pi / 3)
            assert predicted / 2 <= r <= predicted * 2
