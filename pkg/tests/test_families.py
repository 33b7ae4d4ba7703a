"""Family evaluators and likelihood functionals vs finite differences."""

import math

import numpy as np
import pytest

from dirfdr import Dataset, GlmFamily, family_eval, log_likelihood, neg_hessian, score
from dirfdr.exceptions import DataError, DomainError

FAMILIES = [GlmFamily.LINEAR, GlmFamily.LOGISTIC, GlmFamily.POISSON, GlmFamily.EXPONENTIAL]


def t_grid(family):
    if family is GlmFamily.EXPONENTIAL:
        return np.linspace(-5.0, -0.2, 23)
    return np.linspace(-4.0, 4.0, 23)


def random_instance(rng, family, n, p):
    """A small dataset with a valid response for the family."""
    if family is GlmFamily.EXPONENTIAL:
        # keep X @ beta strictly negative: positive design, negative beta
        design = rng.uniform(0.1, 1.0, (n, p))
        beta = -rng.uniform(0.2, 1.0, p)
        response = rng.exponential(scale=-1.0 / (design @ beta))
    else:
        design = rng.uniform(-1.0, 1.0, (n, p))
        beta = rng.normal(0.0, 0.5, p)
        eta = design @ beta
        if family is GlmFamily.LOGISTIC:
            response = (rng.random(n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
        elif family is GlmFamily.POISSON:
            response = rng.poisson(np.exp(eta)).astype(float)
        else:
            response = eta + rng.normal(size=n)
    return Dataset(design, response), beta


class TestFamilyEval:
    def test_linear(self):
        assert family_eval(GlmFamily.LINEAR, 2.0) == pytest.approx((2.0, 2.0, 1.0))

    def test_logistic_at_zero(self):
        b, bd, bdd = family_eval(GlmFamily.LOGISTIC, 0.0)
        assert (b, bd, bdd) == pytest.approx((math.log(2.0), 0.5, 0.25))

    def test_poisson_at_zero(self):
        assert family_eval(GlmFamily.POISSON, 0.0) == pytest.approx((1.0, 1.0, 1.0))

    def test_exponential(self):
        assert family_eval(GlmFamily.EXPONENTIAL, -1.0) == pytest.approx((0.0, 1.0, 1.0))
        with pytest.raises(DomainError):
            family_eval(GlmFamily.EXPONENTIAL, 0.0)
        with pytest.raises(DomainError):
            family_eval(GlmFamily.EXPONENTIAL, 0.5)

    def test_logistic_stable_at_large_t(self):
        b, bd, bdd = family_eval(GlmFamily.LOGISTIC, 40.0)
        assert b == pytest.approx(40.0, abs=1e-12)
        assert bd == pytest.approx(1.0)
        assert 0.0 < bdd < 1e-15
        _, bd_neg, bdd_neg = family_eval(GlmFamily.LOGISTIC, -40.0)
        assert 0.0 < bd_neg < 1e-15
        assert bdd == pytest.approx(bdd_neg, rel=1e-12)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_derivatives_match_finite_differences(self, family):
        h = 1e-6
        for t in t_grid(family):
            b_minus, bd_minus, _ = family_eval(family, t - h)
            _, bd, bdd = family_eval(family, t)
            b_plus, bd_plus, _ = family_eval(family, t + h)
            scale = max(1.0, abs(bdd))
            assert bd == pytest.approx((b_plus - b_minus) / (2 * h), abs=1e-5 * scale)
            assert bdd == pytest.approx((bd_plus - bd_minus) / (2 * h), abs=1e-5 * scale)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_convexity(self, family):
        for t in t_grid(family):
            assert family_eval(family, t)[2] >= 0.0


class TestDataset:
    def test_rejects_nan(self):
        with pytest.raises(DataError):
            Dataset(np.array([[np.nan]]), np.array([1.0]))
        with pytest.raises(DataError):
            Dataset(np.array([[1.0]]), np.array([np.inf]))

    def test_rejects_length_mismatch(self):
        with pytest.raises(DataError):
            Dataset(np.eye(3), np.ones(2))

    def test_immutability(self):
        data = Dataset(np.eye(2), np.ones(2))
        with pytest.raises(ValueError):
            data.design[0, 0] = 5.0


class TestLogLikelihood:
    def setup_method(self):
        self.data = Dataset(np.array([[1.0], [-1.0]]), np.array([2.0, -2.0]))

    def test_linear_at_zero(self):
        assert log_likelihood(self.data, np.zeros(1), GlmFamily.LINEAR) == 0.0

    def test_linear_hand_value(self):
        # (1/2) * [(2*2 - 2) + (2*2 - 2)] = 2
        assert log_likelihood(self.data, np.array([2.0]), GlmFamily.LINEAR) == pytest.approx(2.0)

    def test_logistic_single_point(self):
        data = Dataset(np.array([[1.0]]), np.array([1.0]))
        val = log_likelihood(data, np.zeros(1), GlmFamily.LOGISTIC)
        assert val == pytest.approx(-math.log(2.0))

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            log_likelihood(self.data, np.zeros(3), GlmFamily.LINEAR)


class TestScore:
    def test_zero_at_noiseless_truth(self):
        rng = np.random.default_rng(1)
        design = rng.normal(size=(10, 3))
        beta = rng.normal(size=3)
        data = Dataset(design, design @ beta)
        assert np.allclose(score(data, beta, GlmFamily.LINEAR), 0.0, atol=1e-12)

    def test_logistic_single_point(self):
        data = Dataset(np.array([[1.0]]), np.array([1.0]))
        assert score(data, np.zeros(1), GlmFamily.LOGISTIC) == pytest.approx([0.5])

    @pytest.mark.parametrize("family", FAMILIES)
    def test_matches_gradient_of_log_likelihood(self, family):
        rng = np.random.default_rng(7)
        for _ in range(3):
            n, p = int(rng.integers(8, 20)), int(rng.integers(2, 6))
            data, beta = random_instance(rng, family, n, p)
            g = score(data, beta, family)
            h = 1e-6
            for j in range(p):
                step = np.zeros(p)
                step[j] = h
                fd = (log_likelihood(data, beta + step, family)
                      - log_likelihood(data, beta - step, family)) / (2 * h)
                assert g[j] == pytest.approx(fd, abs=1e-5)


class TestNegHessian:
    def test_linear_is_gram_matrix(self):
        rng = np.random.default_rng(2)
        design = rng.normal(size=(12, 4))
        data = Dataset(design, rng.normal(size=12))
        expected = design.T @ design / 12
        got = neg_hessian(data, rng.normal(size=4), GlmFamily.LINEAR)
        assert np.allclose(got, expected, atol=1e-14)

    def test_logistic_single_point(self):
        data = Dataset(np.array([[1.0]]), np.array([1.0]))
        got = neg_hessian(data, np.zeros(1), GlmFamily.LOGISTIC)
        assert np.allclose(got, [[0.25]], atol=1e-15)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_symmetric_psd_and_matches_score_jacobian(self, family):
        rng = np.random.default_rng(11)
        data, beta = random_instance(rng, family, 15, 4)
        m = neg_hessian(data, beta, family)
        assert np.array_equal(m, m.T)
        assert np.linalg.eigvalsh(m).min() >= -1e-10
        h = 1e-6
        for j in range(4):
            step = np.zeros(4)
            step[j] = h
            fd = (score(data, beta + step, family) - score(data, beta - step, family)) / (2 * h)
            assert np.allclose(-fd, m[:, j], atol=1e-4)
