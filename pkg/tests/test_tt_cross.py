import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ttweno.tt_core import tt_eval_batch, tt_from_full, tt_full, tt_ones, tt_rank1
from ttweno.tt_cross import (
    CrossAccuracyWarning,
    CrossConfig,
    MaxvolError,
    cross_interpolate,
    maxvol,
)


def sine_field(n):
    x = np.arange(n) / n
    s = x[:, None, None] + x[None, :, None] + x[None, None, :]
    return np.sin(2 * np.pi * s)


class TestMaxvol:
    def test_identity_over_zeros(self):
        m = np.vstack([np.eye(3), np.zeros((5, 3))])
        assert sorted(maxvol(m)) == [0, 1, 2]

    def test_single_column_picks_largest(self):
        m = np.array([[1.0], [3.0], [-2.0]])
        assert list(maxvol(m)) == [1]

    def test_dominance_property(self):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((20, 4))
        rows = maxvol(m, tol=0.05)
        b = m @ np.linalg.inv(m[rows])
        assert np.max(np.abs(b)) <= 1.05 + 1e-12

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_dominance_property_randomized(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((17, 5))
        rows = maxvol(m, tol=0.05)
        assert len(set(rows.tolist())) == 5
        b = m @ np.linalg.inv(m[rows])
        assert np.max(np.abs(b)) <= 1.05 + 1e-9

    def test_rank_deficient_raises(self):
        col = np.linspace(0, 1, 10)
        m = np.stack([col, 2 * col, 3 * col], axis=1)
        with pytest.raises(MaxvolError):
            maxvol(m)


def constant_fn(idx, aux):
    return np.ones(idx.shape[0])


class TestCrossInterpolate:
    def test_constant_field(self):
        stats = {}
        cfg = CrossConfig(eps=1e-10)
        tt = cross_interpolate(constant_fn, (12, 12, 12, 1),
                               guess=tt_ones((12, 12, 12)), cfg=cfg, stats=stats)
        assert tt.ranks == (1, 1)
        assert stats["sweeps"] <= 2 and stats["converged"]
        np.testing.assert_allclose(tt_full(tt), 1.0, rtol=1e-13)

    def test_sine_field_rank_growth_from_ones(self):
        n = 16
        dense = sine_field(n)

        def f(idx, aux):
            return dense[idx[:, 0], idx[:, 1], idx[:, 2]]

        stats = {}
        cfg = CrossConfig(eps=1e-10)
        tt = cross_interpolate(f, (n, n, n, 1), guess=tt_ones((n, n, n)),
                               cfg=cfg, stats=stats)
        assert tt.ranks == (2, 2)
        assert stats["validation_rel_rms"] <= 1e-8
        assert np.max(np.abs(tt_full(tt) - dense)) <= 1e-9

    def test_reciprocal_of_positive_rank_one_field(self):
        n = 8
        rng = np.random.default_rng(2)
        base = tt_rank1(*(rng.uniform(1.0, 2.0 ** (1 / 3), n) for _ in range(3)))
        dense = tt_full(base)
        assert dense.min() >= 1.0 and dense.max() <= 2.0

        def f(idx, aux):
            return 1.0 / aux[:, 0]

        stats = {}
        cfg = CrossConfig(eps=1e-8)
        tt = cross_interpolate(f, (n, n, n, 1), guess=base, cfg=cfg,
                               aux=[base], stats=stats)
        assert stats["validation_rel_rms"] <= 1e-6
        np.testing.assert_allclose(tt_full(tt), 1.0 / dense, atol=1e-6)

    def test_warm_start_with_exact_answer_converges_in_one_sweep(self):
        n = 16
        dense = sine_field(n)
        exact = tt_from_full(dense, 1e-13)

        def f(idx, aux):
            return dense[idx[:, 0], idx[:, 1], idx[:, 2]]

        stats = {}
        cfg = CrossConfig(eps=1e-10)
        tt = cross_interpolate(f, (n, n, n, 1), guess=exact, cfg=cfg, stats=stats)
        assert stats["sweeps"] == 1 and stats["converged"]
        assert tt.ranks == exact.ranks
        assert np.max(np.abs(tt_full(tt) - dense)) <= 1e-10 * np.linalg.norm(dense)

    def test_exact_recovery_at_pivots_and_samples(self):
        # separable product: exactly representable at ranks (1,1)
        n = 10
        a = np.linspace(1.0, 2.0, n)
        dense = a[:, None, None] * a[None, :, None] ** 2 * a[None, None, :] ** 3

        def f(idx, aux):
            return dense[idx[:, 0], idx[:, 1], idx[:, 2]]

        cfg = CrossConfig(eps=1e-12)
        tt = cross_interpolate(f, (n, n, n, 1), guess=tt_ones((n, n, n)), cfg=cfg)
        rng = np.random.default_rng(3)
        idx = rng.integers(0, n, size=(200, 3))
        got = tt_eval_batch(tt, idx)
        ref = dense[idx[:, 0], idx[:, 1], idx[:, 2]]
        rel = np.linalg.norm(got - ref) / np.linalg.norm(ref)
        assert rel <= 10 * 1e-12

    def test_stacked_outputs(self):
        n = 8
        x = np.arange(n) / n
        d0 = np.sin(2 * np.pi * (x[:, None, None] + x[None, :, None] + x[None, None, :]))
        d1 = np.ones((n, n, n))

        def f(idx, aux):
            return np.stack([d0[idx[:, 0], idx[:, 1], idx[:, 2]],
                             d1[idx[:, 0], idx[:, 1], idx[:, 2]]], axis=1)

        cfg = CrossConfig(eps=1e-10)
        tt = cross_interpolate(f, (n, n, n, 2), guess=tt_ones((n, n, n)), cfg=cfg)
        assert tt.trailing == 2
        full = tt_full(tt)
        np.testing.assert_allclose(full[..., 0], d0, atol=1e-9)
        np.testing.assert_allclose(full[..., 1], d1, atol=1e-9)

    def test_validation_warning_when_sweep_budget_too_small(self):
        # block-diagonal rank-6 structure: each sweep can only discover a
        # couple of new blocks, so a one-sweep budget must leave real error
        # behind and the validation sample reports it
        n = 18
        dense = np.zeros((n, n, n))
        for t in range(6):
            b = slice(3 * t, 3 * t + 3)
            dense[b, b, b] = float(t + 1)

        def f(idx, aux):
            return dense[idx[:, 0], idx[:, 1], idx[:, 2]]

        cfg = CrossConfig(eps=1e-10, max_sweeps=1, rank_increment=0)
        with pytest.warns(CrossAccuracyWarning):
            cross_interpolate(f, (n, n, n, 1), guess=tt_ones((n, n, n)),
                              cfg=cfg)

    def test_non_finite_rejected(self):
        def f(idx, aux):
            out = np.ones(idx.shape[0])
            out[0] = np.nan
            return out

        cfg = CrossConfig(eps=1e-8)
        with pytest.raises(ValueError, match="non-finite"):
            cross_interpolate(f, (8, 8, 8, 1), guess=tt_ones((8, 8, 8)), cfg=cfg)

    def test_guess_shape_mismatch(self):
        cfg = CrossConfig(eps=1e-8)
        with pytest.raises(ValueError, match="mode sizes"):
            cross_interpolate(constant_fn, (8, 8, 8, 1),
                              guess=tt_ones((8, 8, 9)), cfg=cfg)
