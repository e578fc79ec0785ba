import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats
from statsmodels.stats.multitest import multipletests

from conftest import tie_free_sample
from oracles import holm_reference, pipeline_statistic
from pauc.contrasts import custom, dunnett, tukey
from pauc.estimator import DiagnosticSample, TrimSpec
from pauc.inference import (
    RngStream,
    bootstrap_max_statistics,
    bootstrap_resample,
    equicoordinate_quantile,
    holm_adjust,
    run_mct,
    test_statistic,
)

TRIM = TrimSpec(0.8, 0.6)


class TestRngStream:
    def test_reproducible(self):
        a = RngStream(7, (1, 2)).generator().random(5)
        b = RngStream(7).child(1).child(2).generator().random(5)
        np.testing.assert_array_equal(a, b)

    def test_children_differ(self):
        s = RngStream(7)
        assert s.child(0).generator().random() != s.child(1).generator().random()

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            RngStream(-1)


class TestStatistic:
    @given(st.integers(0, 2**32 - 1), st.integers(4, 20), st.integers(4, 20))
    @settings(max_examples=30)
    def test_matches_rational_pipeline(self, seed, alpha, beta):
        data = tie_free_sample(np.random.default_rng(seed), alpha, beta, 3, shift=0.5)
        c = tukey(3)
        ref = pipeline_statistic(data.xi, data.eta, c.rows, 0.8, 0.6)
        np.testing.assert_allclose(test_statistic(data, c, TRIM), ref, rtol=1e-9, atol=1e-9)

    def test_dimension_mismatch(self, small_trial):
        with pytest.raises(ValueError, match="columns"):
            test_statistic(small_trial, tukey(4), TRIM)

    def test_row_rescaling(self, small_trial):
        base = test_statistic(small_trial, tukey(3), TRIM)
        scaled = test_statistic(small_trial, custom(tukey(3).rows * np.array([[2.5], [0.1], [-3.0]])), TRIM)
        np.testing.assert_allclose(scaled, base * np.array([1, 1, -1]), rtol=1e-12)


class TestResampling:
    def test_rows_kept_whole(self, small_trial):
        boot = bootstrap_resample(small_trial, RngStream(1))
        rows = {tuple(r) for r in small_trial.xi}
        assert all(tuple(r) in rows for r in boot.xi)
        assert boot.alpha == small_trial.alpha and boot.beta == small_trial.beta

    def test_uniform_frequencies(self):
        data = DiagnosticSample.from_arrays(np.arange(5.0)[:, None], np.arange(5.0, 10.0)[:, None])
        counts = np.zeros(5)
        for k in range(2000):
            counts += np.bincount(bootstrap_resample(data, RngStream(3, (k,))).xi[:, 0].astype(int), minlength=5)
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_paired_shares_indices(self, rng):
        data = tie_free_sample(rng, 8, 8, 2)
        boot = bootstrap_resample(data, RngStream(4), paired=True)
        idx = [int(np.flatnonzero(data.xi[:, 0] == v)[0]) for v in boot.xi[:, 0]]
        np.testing.assert_array_equal(boot.eta, data.eta[idx])

    def test_too_few_replicates(self, small_trial):
        with pytest.raises(ValueError, match="B too small"):
            bootstrap_max_statistics(small_trial, tukey(3), TRIM, 99, RngStream(0))
        with pytest.raises(ValueError, match="B too small"):
            run_mct(small_trial, tukey(3), TRIM, B=50)


class TestQuantile:
    def test_integer_values(self):
        assert equicoordinate_quantile(np.arange(1, 101), 0.95) == 95

    def test_level_one_is_max(self):
        assert equicoordinate_quantile([3.0, 1.0, 2.0], 1.0) == 3.0

    @given(st.lists(st.floats(0, 100), min_size=1, max_size=50), st.floats(0.01, 1), st.floats(0.01, 1))
    def test_monotone_in_level(self, values, a, b):
        assert equicoordinate_quantile(values, min(a, b)) <= equicoordinate_quantile(values, max(a, b))

    def test_level_domain(self):
        with pytest.raises(ValueError):
            equicoordinate_quantile([1.0], 0.0)


class TestRunMct:
    @pytest.mark.parametrize("delta", [0.01, 0.05, 0.1, 0.2])
    def test_critical_value_is_order_statistic(self, trial_100, delta):
        maxima = bootstrap_max_statistics(trial_100, tukey(3), TRIM, 400, RngStream(5))
        res = run_mct(trial_100, tukey(3), TRIM, delta=delta, B=400, rng=RngStream(5))
        assert res.critical_value == equicoordinate_quantile(maxima, 1 - delta)
        assert np.sum(maxima > res.critical_value) <= round(400 * delta)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([0.01, 0.05, 0.1, 0.3]), st.floats(0, 1.2))
    @settings(max_examples=25)
    def test_compatibility_triple(self, seed, delta, shift):
        data = tie_free_sample(np.random.default_rng(seed), 30, 30, 3, shift=shift)
        res = run_mct(data, tukey(3), TRIM, delta=delta, B=200, rng=RngStream(seed))
        outside = (res.intervals[:, 0] > 0) | (res.intervals[:, 1] < 0)
        np.testing.assert_array_equal(res.decisions, res.adjusted_p <= delta)
        np.testing.assert_array_equal(res.decisions, outside)
        assert res.global_p == res.adjusted_p.min()
        assert res.reject_global == (res.global_p <= delta)

    def test_adjusted_p_monotone_in_statistic(self, trial_100):
        res = run_mct(trial_100, tukey(3), TRIM, B=300, rng=RngStream(2))
        order = np.argsort(np.abs(res.statistics))
        assert np.all(np.diff(res.adjusted_p[order]) <= 0)

    def test_worker_count_does_not_matter(self, trial_100):
        one = run_mct(trial_100, tukey(3), TRIM, B=1000, rng=RngStream(9), workers=1)
        four = run_mct(trial_100, tukey(3), TRIM, B=1000, rng=RngStream(9), workers=4)
        assert one.critical_value == four.critical_value
        np.testing.assert_array_equal(one.adjusted_p, four.adjusted_p)

    def test_row_rescaling_keeps_decisions(self, trial_100):
        base = run_mct(trial_100, dunnett(3), TRIM, B=300, rng=RngStream(1))
        scaled = run_mct(trial_100, custom(dunnett(3).rows * np.array([[4.0], [-0.2]])), TRIM, B=300, rng=RngStream(1))
        np.testing.assert_array_equal(base.decisions, scaled.decisions)
        np.testing.assert_allclose(base.adjusted_p, scaled.adjusted_p)

    @pytest.mark.parametrize("fn", [np.exp, special.expit])
    def test_monotone_transform_keeps_everything(self, trial_100, fn):
        base = run_mct(trial_100, tukey(3), TRIM, B=300, rng=RngStream(1))
        moved = run_mct(trial_100.transform(0, fn), tukey(3), TRIM, B=300, rng=RngStream(1))
        np.testing.assert_array_equal(base.statistics, moved.statistics)
        np.testing.assert_array_equal(base.decisions, moved.decisions)
        assert base.critical_value == moved.critical_value

    def test_delta_domain(self, small_trial):
        with pytest.raises(ValueError, match="delta"):
            run_mct(small_trial, tukey(3), TRIM, delta=1.0)

    def test_dependent_groups_mode(self, rng):
        data = tie_free_sample(rng, 40, 40, 3, shift=0.3)
        res = run_mct(data, tukey(3), TRIM, B=200, assume_independent_groups=False)
        assert res.statistics.shape == (3,)
        with pytest.raises(ValueError, match="equal group sizes"):
            run_mct(tie_free_sample(rng, 40, 30, 3), tukey(3), TRIM, B=200, assume_independent_groups=False)

    def test_degenerate_window_flagged(self):
        xi = np.column_stack([np.arange(1.0, 11.0), np.arange(1.0, 11.0) * 2])
        data = DiagnosticSample.from_arrays(xi, xi + 100)
        res = run_mct(data, custom([[1, -1]]), TrimSpec(0.3, 0.9), B=200)
        assert res.degenerate_flags.tolist() == [True]
        assert res.statistics[0] == 0.0 and math.isfinite(res.critical_value)
        assert res.degenerate_replicates > 2
        assert any("degenerate" in w for w in res.warnings)

    def test_to_dict_shape(self, trial_100):
        out = run_mct(trial_100, tukey(3), TRIM, B=200).to_dict()
        assert len(out["hypotheses"]) == 3 and out["bootstrap_reps"] == 200

    def test_single_contrast_critical_value_is_half_normal(self):
        # r = 1: max |S*| is asymptotically |N(0, 1)|
        rng = np.random.default_rng(17)
        data = DiagnosticSample.from_arrays(rng.normal(size=(2000, 2)), rng.normal(0.3, 1, size=(2000, 2)))
        res = run_mct(data, custom([[1, -1]]), TRIM, delta=0.05, B=4000, rng=RngStream(17))
        assert res.critical_value == pytest.approx(1.959964, abs=0.1)


class TestHolm:
    def test_published_row(self):
        raw = [0.382, 0.259, 0.069, 0.015, 0.051]
        np.testing.assert_allclose(holm_adjust(raw), [0.518, 0.518, 0.207, 0.075, 0.204], atol=1e-12)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=20))
    def test_matches_reference_and_statsmodels(self, p):
        ours = holm_adjust(p)
        np.testing.assert_allclose(ours, holm_reference(p), atol=1e-15)
        np.testing.assert_allclose(ours, multipletests(p, method="holm")[1], atol=1e-12)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=20))
    def test_order_and_bounds(self, p):
        adj = holm_adjust(p)
        order = np.argsort(p, kind="stable")
        assert np.all(np.diff(adj[order]) >= 0)
        assert np.all(adj >= np.asarray(p)) and np.all(adj <= 1)

    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            holm_adjust([0.5, 1.5])
