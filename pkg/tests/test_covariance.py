import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from conftest import tie_free_sample
from oracles import covariance_literal, delong_placement_variance, dependent_addend_literal
from pauc.covariance import estimate_covariance
from pauc.estimator import DiagnosticSample, TrimSpec, estimate_pauc

trims = st.sampled_from([(1.0, 0.0), (0.8, 0.6), (0.6, 0.4), (0.8, 0.2), (0.5, 0.0), (1.0, 0.5), (0.3, 0.3)])


def as_float(matrix) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in matrix])


class TestAgainstLiteralSums:
    @given(st.integers(0, 2**32 - 1), st.integers(2, 30), st.integers(2, 30), st.integers(1, 4), trims)
    def test_independent_groups(self, seed, alpha, beta, kappa, pq):
        data = tie_free_sample(np.random.default_rng(seed), alpha, beta, kappa, shift=0.4)
        sigma = estimate_covariance(data, TrimSpec(*pq)).sigma
        ref = as_float(covariance_literal(data.xi, data.eta, *pq))
        np.testing.assert_allclose(sigma, ref, rtol=0, atol=1e-12)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 25), st.integers(1, 3), trims)
    def test_paired_groups(self, seed, n, kappa, pq):
        data = tie_free_sample(np.random.default_rng(seed), n, n, kappa, shift=0.4)
        sigma = estimate_covariance(data, TrimSpec(*pq), assume_independent_groups=False).sigma
        base = as_float(covariance_literal(data.xi, data.eta, *pq))
        # (alpha + beta) / sqrt(alpha beta) = 2 for equal groups
        addend = 2 * as_float(dependent_addend_literal(data.xi, data.eta, *pq))
        np.testing.assert_allclose(sigma, base - addend, rtol=0, atol=1e-11)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.integers(2, 40))
    def test_total_auc_matches_placement_variance(self, seed, alpha, beta):
        data = tie_free_sample(np.random.default_rng(seed), alpha, beta, 1, shift=0.7)
        sigma = estimate_covariance(data, TrimSpec(1, 0)).sigma[0, 0]
        assert sigma / (alpha + beta) == pytest.approx(
            delong_placement_variance(data.xi[:, 0], data.eta[:, 0]), abs=1e-9
        )


class TestStructure:
    @given(st.integers(0, 2**32 - 1), st.integers(2, 50), st.integers(2, 50), trims)
    def test_symmetric_with_nonnegative_diagonal(self, seed, alpha, beta, pq):
        data = tie_free_sample(np.random.default_rng(seed), alpha, beta, 4, shift=0.3)
        sigma = estimate_covariance(data, TrimSpec(*pq)).sigma
        np.testing.assert_array_equal(sigma, sigma.T)
        assert np.all(np.diag(sigma) >= 0)
        assert np.min(np.linalg.eigvalsh(sigma)) >= -1e-12

    def test_duplicated_marker_gives_equal_entries(self, small_trial):
        xi = np.column_stack([small_trial.xi[:, 0], small_trial.xi[:, 0]])
        eta = np.column_stack([small_trial.eta[:, 0], small_trial.eta[:, 0]])
        sigma = estimate_covariance(DiagnosticSample.from_arrays(xi, eta), TrimSpec(0.8, 0.6)).sigma
        assert sigma[0, 0] == sigma[0, 1] == sigma[1, 0] == sigma[1, 1]

    def test_empty_window_is_zero(self):
        # no non-diseased value falls inside the window (3, 10]
        data = DiagnosticSample.from_arrays(np.array([[1.0], [2.0], [3.0]]), np.array([[10.0], [11.0], [12.0]]))
        est = estimate_pauc(data, TrimSpec(0.3, 0.9))
        assert est.theta[0] == 0.0
        assert estimate_covariance(data, TrimSpec(0.3, 0.9)).sigma[0, 0] == 0.0

    def test_accepts_matching_cuts(self, small_trial):
        trim = TrimSpec(0.8, 0.6)
        est = estimate_pauc(small_trial, trim)
        np.testing.assert_array_equal(
            estimate_covariance(small_trial, trim, cuts=est).sigma, estimate_covariance(small_trial, trim).sigma
        )

    def test_rejects_cuts_from_other_data(self, small_trial, rng):
        other = tie_free_sample(rng, 12, 10, 3)
        with pytest.raises(ValueError, match="cut points"):
            estimate_covariance(small_trial, TrimSpec(0.8, 0.6), cuts=estimate_pauc(other, TrimSpec(0.8, 0.6)))

    def test_rejects_cuts_with_other_shape(self, small_trial, rng):
        other = tie_free_sample(rng, 9, 10, 3)
        with pytest.raises(ValueError, match="cut points"):
            estimate_covariance(small_trial, TrimSpec(0.8, 0.6), cuts=estimate_pauc(other, TrimSpec(0.8, 0.6)))

    def test_paired_mode_needs_equal_groups(self, small_trial):
        with pytest.raises(ValueError, match="equal group sizes"):
            estimate_covariance(small_trial, TrimSpec(1, 0), assume_independent_groups=False)

    @pytest.mark.parametrize("fn", [np.exp, special.expit, lambda x: 3 * x + 1])
    def test_monotone_transform_invariance(self, small_trial, fn):
        trim = TrimSpec(0.8, 0.6)
        before = estimate_covariance(small_trial, trim).sigma
        after = estimate_covariance(small_trial.transform(2, fn), trim).sigma
        np.testing.assert_array_equal(before, after)


class TestConsistency:
    def test_binormal_total_auc_variance(self):
        # Var of sqrt(2n) * AUC_hat at n=400 per group vs replicate spread
        rng = np.random.default_rng(3)
        n, reps = 400, 400
        thetas, sigmas = [], []
        for _ in range(reps):
            data = DiagnosticSample.from_arrays(rng.normal(size=(n, 1)), rng.normal(0.8, 1, size=(n, 1)))
            thetas.append(estimate_pauc(data, TrimSpec(1, 0)).theta[0])
            sigmas.append(estimate_covariance(data, TrimSpec(1, 0)).sigma[0, 0])
        empirical = 2 * n * np.var(thetas, ddof=1)
        assert np.mean(sigmas) == pytest.approx(empirical, rel=0.15)
        assert math.isfinite(empirical)
