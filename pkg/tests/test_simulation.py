"""Seeded generation and the Monte-Carlo runner at desk scale."""

import warnings

import numpy as np
import pytest

from dirfdr import (
    GlmFamily,
    SimConfig,
    generate_coefficients,
    generate_design,
    run_experiment,
    run_trial,
    sample_responses,
)
from dirfdr import rng as streams
from dirfdr.exceptions import DataError, NumericalError
from dirfdr.simulation import summarize

TINY = SimConfig(
    family=GlmFamily.LOGISTIC, n=150, p=20, s0=4, signal_a=1.2,
    design_low=-1.0, design_high=1.0, alpha=0.2, trials=3, master_seed=7,
    clime_grid=(0.4, 0.2),
)


class TestGenerateDesign:
    def test_support_and_determinism(self):
        x1 = generate_design(50, 4, -1.0, 1.0, streams.stream(1, 0, 0))
        x2 = generate_design(50, 4, -1.0, 1.0, streams.stream(1, 0, 0))
        assert np.array_equal(x1, x2)
        assert x1.min() >= -1.0 and x1.max() <= 1.0

    def test_mean_by_law_of_large_numbers(self):
        x = generate_design(1000, 1000, -1.0, 1.0, streams.stream(2, 0, 0))
        # sd of the mean of 1e6 uniforms on [-1,1] is ~ 5.8e-4
        assert abs(x.mean()) <= 0.01

    def test_streams_differ_by_role(self):
        a = generate_design(10, 2, -1, 1, streams.stream(1, 0, 0))
        b = generate_design(10, 2, -1, 1, streams.stream(1, 0, 1))
        assert not np.array_equal(a, b)


class TestGenerateCoefficients:
    def test_paper_scale_layout(self):
        truth = generate_coefficients(600, 50, 0.5)
        assert (truth.beta_true == 0.5).sum() == 25
        assert (truth.beta_true == -0.5).sum() == 25
        assert (truth.beta_true == 0.0).sum() == 550

    def test_empty_support(self):
        truth = generate_coefficients(10, 0, 1.0)
        assert truth.support.size == 0

    def test_odd_split_rounds_up_positives(self):
        truth = generate_coefficients(6, 3, 1.0)
        assert truth.beta_true.tolist() == [1.0, 1.0, -1.0, 0.0, 0.0, 0.0]

    def test_validation(self):
        with pytest.raises(DataError):
            generate_coefficients(3, 5, 1.0)


class TestSampleResponses:
    def test_logistic_null_mean(self):
        design = np.zeros((100_000, 2))
        truth = generate_coefficients(2, 0, 1.0)
        y = sample_responses(design, truth, GlmFamily.LOGISTIC, streams.stream(3, 0, 1))
        assert set(np.unique(y)) <= {0.0, 1.0}
        assert abs(y.mean() - 0.5) <= 0.005

    def test_poisson_null_mean(self):
        design = np.zeros((100_000, 2))
        truth = generate_coefficients(2, 0, 1.0)
        y = sample_responses(design, truth, GlmFamily.POISSON, streams.stream(4, 0, 1))
        assert abs(y.mean() - 1.0) <= 0.01

    def test_linear_unit_noise(self):
        design = np.zeros((50_000, 1))
        truth = generate_coefficients(1, 0, 1.0)
        y = sample_responses(design, truth, GlmFamily.LINEAR, streams.stream(5, 0, 1))
        assert abs(y.std() - 1.0) <= 0.02

    def test_determinism(self):
        design = np.ones((20, 3)) * 0.1
        truth = generate_coefficients(3, 2, 0.5)
        y1 = sample_responses(design, truth, GlmFamily.POISSON, streams.stream(6, 1, 1))
        y2 = sample_responses(design, truth, GlmFamily.POISSON, streams.stream(6, 1, 1))
        assert np.array_equal(y1, y2)

    def test_exponential_unsupported(self):
        with pytest.raises(DataError):
            sample_responses(np.ones((5, 1)), generate_coefficients(1, 1, 1.0),
                             GlmFamily.EXPONENTIAL, streams.stream(7, 0, 1))


class TestRunTrial:
    def test_deterministic_and_in_range(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r1 = run_trial(TINY, 0)
            r2 = run_trial(TINY, 0)
        assert r1 == r2
        assert 0.0 <= r1.fdp_d <= 1.0
        assert 0.0 <= r1.power_d <= 1.0
        assert r1.rejections >= r1.fdv_count

    def test_trials_differ(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r0 = run_trial(TINY, 0)
            r1 = run_trial(TINY, 1)
        assert r0.seed != r1.seed

    def test_global_null_rarely_rejects(self):
        config = SimConfig(
            family=GlmFamily.LOGISTIC, n=200, p=20, s0=4, signal_a=0.0,
            design_low=-1.0, design_high=1.0, alpha=0.2, trials=15,
            master_seed=123, clime_grid=(0.4, 0.2),
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            results = [run_trial(config, t) for t in range(config.trials)]
        assert all(r.power_d == 0.0 for r in results)
        assert np.mean([r.rejections for r in results]) <= 1.0


class TestRunExperiment:
    def test_single_trial_summary_convention(self):
        config = SimConfig(
            family=GlmFamily.LOGISTIC, n=120, p=12, s0=3, signal_a=1.5,
            design_low=-1.0, design_high=1.0, alpha=0.2, trials=1, master_seed=3,
            clime_grid=(0.3,),
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            summary = run_experiment(config)
            trial = run_trial(config, 0)
        assert summary.trials_completed == 1
        assert summary.se_fdr_d == 0.0 and summary.se_power_d == 0.0
        assert summary.mean_fdr_d == trial.fdp_d
        assert summary.mean_power_d == trial.power_d

    def test_mean_is_arithmetic_mean_of_trials(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            summary = run_experiment(TINY)
            trials = [run_trial(TINY, i) for i in range(TINY.trials)]
        assert summary.mean_fdr_d == pytest.approx(np.mean([t.fdp_d for t in trials]))
        assert summary.mean_fdv == pytest.approx(np.mean([t.fdv_count for t in trials]))

    def test_output_files_byte_identical_across_runs(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            run_experiment(TINY, out_dir=out1)
            run_experiment(TINY, out_dir=out2)
        for name in ("trials.csv", "summary.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_parallel_jobs_match_serial(self, tmp_path):
        out1, out2 = tmp_path / "serial", tmp_path / "parallel"
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            s1 = run_experiment(TINY, jobs=1, out_dir=out1)
            s2 = run_experiment(TINY, jobs=2, out_dir=out2)
        assert s1 == s2
        assert (out1 / "trials.csv").read_bytes() == (out2 / "trials.csv").read_bytes()

    def test_failed_trial_policy(self, monkeypatch):
        import dirfdr.simulation as sim

        def flaky(config, index):
            raise NumericalError("boom")

        monkeypatch.setattr(sim, "run_trial", flaky)
        with pytest.raises(NumericalError, match="> 20%"):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                sim.run_experiment(TINY)

    def test_summarize_se(self):
        from dirfdr.simulation import TrialResult

        trials = [
            TrialResult(fdp_d=v, power_d=v, fdv_count=1, threshold=2.0,
                        fallback_used=False, rejections=3, seed=i)
            for i, v in enumerate((0.0, 0.5, 1.0))
        ]
        s = summarize(trials)
        assert s.mean_fdr_d == pytest.approx(0.5)
        assert s.se_fdr_d == pytest.approx(np.std([0, 0.5, 1.0], ddof=1) / np.sqrt(3))
        assert s.mean_fdv == 1.0


class TestSimConfigValidation:
    def test_rejects_bad_settings(self):
        base = dict(family=GlmFamily.LINEAR, n=10, p=5, s0=2, signal_a=1.0,
                    design_low=-1.0, design_high=1.0, alpha=0.2, trials=1,
                    master_seed=0)
        with pytest.raises(DataError):
            SimConfig(**{**base, "s0": 9})
        with pytest.raises(DataError):
            SimConfig(**{**base, "design_low": 2.0})
        with pytest.raises(DataError):
            SimConfig(**{**base, "trials": 0})
        with pytest.raises(DataError):
            SimConfig(**{**base, "mode": "bogus"})
        with pytest.raises(DataError):
            SimConfig(**{**base, "clime_grid": ()})
