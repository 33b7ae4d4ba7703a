"""Sign-aware error and power functionals."""

import numpy as np
import pytest

from dirfdr import GroundTruth, directional_fdp, directional_fdv_count, directional_power
from dirfdr.inference import SelectionResult


def selection(indices, signs, threshold=2.0):
    indices = np.asarray(indices, dtype=int)
    return SelectionResult(
        threshold=threshold,
        selected=indices,
        signs={int(j): s for j, s in zip(indices, signs)},
        fallback_used=False,
    )


TRUTH = GroundTruth(beta_true=np.array([1.0, -1.0, 0.0]))


class TestGroundTruth:
    def test_support_and_signs(self):
        assert TRUTH.support.tolist() == [0, 1]
        assert TRUTH.signs_true.tolist() == [1, -1, 0]


class TestDirectionalFdp:
    def test_half_wrong(self):
        sel = selection([0, 1], [1, 1])
        assert directional_fdp(sel, TRUTH) == 0.5

    def test_empty_selection(self):
        assert directional_fdp(selection([], []), TRUTH) == 0.0

    def test_true_zero_rejection_counts(self):
        assert directional_fdp(selection([2], [1]), TRUTH) == 1.0


class TestDirectionalFdvCount:
    def test_all_correct(self):
        assert directional_fdv_count(selection([0, 1], [1, -1]), TRUTH) == 0

    def test_one_wrong(self):
        assert directional_fdv_count(selection([0, 1], [1, 1]), TRUTH) == 1

    def test_empty(self):
        assert directional_fdv_count(selection([], []), TRUTH) == 0


class TestDirectionalPower:
    def test_full_recovery(self):
        assert directional_power(selection([0, 1], [1, -1]), TRUTH) == 1.0

    def test_empty_support(self):
        null_truth = GroundTruth(beta_true=np.zeros(3))
        assert directional_power(selection([0, 2], [1, -1]), null_truth) == 0.0

    def test_partial(self):
        assert directional_power(selection([0], [1]), TRUTH) == 0.5


class TestIdentities:
    def test_fdp_plus_correct_fraction_is_one(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            p = int(rng.integers(3, 20))
            truth = GroundTruth(np.round(rng.normal(0, 1, size=p), 1))
            k = int(rng.integers(1, p + 1))
            idx = rng.choice(p, size=k, replace=False)
            signs = rng.choice([-1, 1], size=k)
            sel = selection(idx, signs)
            correct = sum(
                1 for j, s in zip(idx, signs) if s == truth.signs_true[j] != 0
            ) / k
            assert directional_fdp(sel, truth) + correct == pytest.approx(1.0)

    def test_power_fdv_rejection_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            p = int(rng.integers(3, 20))
            truth = GroundTruth(np.round(rng.normal(0, 1, size=p), 1))
            k = int(rng.integers(0, p + 1))
            idx = rng.choice(p, size=k, replace=False)
            signs = rng.choice([-1, 1], size=k)
            sel = selection(idx, signs)
            s_or_1 = max(truth.support.size, 1)
            got = directional_power(sel, truth) * s_or_1 + directional_fdv_count(sel, truth)
            assert got == pytest.approx(k)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(2)
        p = 12
        truth_vec = np.round(rng.normal(0, 1, size=p), 1)
        idx = rng.choice(p, size=5, replace=False)
        signs = rng.choice([-1, 1], size=5)
        perm = rng.permutation(p)
        inverse = np.empty(p, dtype=int)
        inverse[perm] = np.arange(p)
        sel = selection(idx, signs)
        sel_p = selection(inverse[idx], signs)
        truth = GroundTruth(truth_vec)
        truth_p = GroundTruth(truth_vec[perm])
        assert directional_fdp(sel, truth) == directional_fdp(sel_p, truth_p)
        assert directional_fdv_count(sel, truth) == directional_fdv_count(sel_p, truth_p)
        assert directional_power(sel, truth) == directional_power(sel_p, truth_p)
