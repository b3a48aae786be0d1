"""Tests for the Monte Carlo experiment driver."""

import math

import numpy as np
import pytest

from pflight import (
    EmptyCellError,
    ExperimentConfig,
    ParameterError,
    config_from_json,
    config_to_json,
    resolve_worker_count,
    run_experiment,
    run_replication,
    summarize,
)
from pflight.io import summary_csv_lines


def small_config(**overrides):
    base = dict(
        lambda_grid=(0.5, 1.0),
        n_grid=(50, 100),
        horizon=50.0,
        reps=40,
        master_seed=314,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestSummarize:
    def test_hand_values(self):
        values = np.array([1.0, 2.0, 3.0, math.inf, math.nan])
        s = summarize(values, rate=2.0, n=10, estimator_kind="pseudo_mle", reps=5)
        assert s.bias == pytest.approx(0.0, abs=1e-15)
        assert s.rmse == pytest.approx(math.sqrt(2.0 / 3.0), rel=1e-14)
        assert s.min_value == 1.0
        assert s.max_value == 3.0
        assert s.saturated_count == 2
        assert s.reps == 5

    def test_empty_cell_raises(self):
        with pytest.raises(EmptyCellError):
            summarize(
                np.array([math.inf, math.nan]),
                rate=1.0,
                n=10,
                estimator_kind="indicator",
                reps=2,
            )


class TestConfig:
    def test_json_round_trip(self):
        cfg = small_config(estimators=("hat", "dot"), epsilon=1e-8, speed=2.0)
        again = config_from_json(config_to_json(cfg))
        assert again == cfg

    def test_accepts_kind_names(self):
        cfg = small_config(estimators=("pseudo_mle", "indicator"))
        assert cfg.estimators == ("hat", "dot")

    def test_unknown_key_rejected(self):
        obj = config_to_json(small_config())
        obj["typo_key"] = 1
        with pytest.raises(ParameterError):
            config_from_json(obj)

    def test_missing_key_rejected(self):
        obj = config_to_json(small_config())
        del obj["reps"]
        with pytest.raises(ParameterError):
            config_from_json(obj)

    def test_validation(self):
        with pytest.raises(ParameterError):
            small_config(lambda_grid=())
        with pytest.raises(ParameterError):
            small_config(lambda_grid=(0.5, -1.0))
        with pytest.raises(ParameterError):
            small_config(n_grid=(50, 0))
        with pytest.raises(ParameterError):
            small_config(reps=0)
        with pytest.raises(ParameterError):
            small_config(horizon=-1.0)
        with pytest.raises(ParameterError):
            small_config(estimators=("hat", "nonsense"))
        with pytest.raises(ParameterError):
            small_config(master_seed=-1)


class TestWorkerCount:
    def test_explicit_wins(self):
        assert resolve_worker_count(3) == 3

    def test_env_variable(self, monkeypatch):
        monkeypatch.setenv("PFL_THREADS", "5")
        assert resolve_worker_count() == 5

    def test_zero_means_auto(self, monkeypatch):
        monkeypatch.delenv("PFL_THREADS", raising=False)
        assert resolve_worker_count(0) >= 1

    def test_invalid_env_rejected(self, monkeypatch):
        monkeypatch.setenv("PFL_THREADS", "many")
        with pytest.raises(ParameterError):
            resolve_worker_count()

    def test_negative_rejected(self):
        with pytest.raises(ParameterError):
            resolve_worker_count(-2)


class TestRunExperiment:
    def test_worker_count_does_not_change_results(self):
        cfg = small_config()
        one = run_experiment(cfg, workers=1)
        two = run_experiment(cfg, workers=2)
        four = run_experiment(cfg, workers=4)
        assert one.summaries == two.summaries == four.summaries
        for key, vals in one.values.items():
            assert np.array_equal(vals, two.values[key])
            assert np.array_equal(vals, four.values[key])
        csv_one = "\n".join(summary_csv_lines(one))
        csv_two = "\n".join(summary_csv_lines(two))
        csv_four = "\n".join(summary_csv_lines(four))
        assert csv_one == csv_two == csv_four

    def test_replication_agrees_with_value_arrays(self):
        cfg = small_config()
        out = run_experiment(cfg, workers=1)
        for li in (0, 1):
            for ni in (0, 1):
                for rep in (0, 7, 39):
                    res = run_replication(cfg, li, ni, rep)
                    for name in cfg.estimators:
                        est = res.estimates[name]
                        stored = out.values[(li, ni, name)][rep]
                        assert est is not None
                        assert stored == est.value

    def test_summary_grid_complete(self):
        cfg = small_config()
        out = run_experiment(cfg, workers=2)
        keys = {(s.rate, s.n, s.estimator) for s in out.summaries}
        assert len(out.summaries) == 2 * 2 * 3
        assert (0.5, 50, "pseudo_mle") in keys
        assert (1.0, 100, "indicator") in keys

    def test_saturation_accounting(self):
        # rate * delta = 5: nearly every stride turns, so the indicator
        # estimator saturates in most replications.
        cfg = ExperimentConfig(
            lambda_grid=(2.0,),
            n_grid=(20,),
            horizon=50.0,
            reps=60,
            master_seed=7,
            estimators=("dot",),
        )
        out = run_experiment(cfg, workers=1)
        (s,) = out.summaries
        vals = out.values[(0, 0, "dot")]
        good = np.isfinite(vals).sum()
        assert s.saturated_count + good == cfg.reps
        assert s.saturated_count > 30

    def test_rmse_decreases_with_sample_size(self):
        cfg = ExperimentConfig(
            lambda_grid=(1.0,),
            n_grid=(25, 100, 400),
            horizon=100.0,
            reps=200,
            master_seed=99,
            estimators=("hat",),
        )
        out = run_experiment(cfg, workers=2)
        rmse = {s.n: s.rmse for s in out.summaries}
        assert rmse[400] < rmse[100] < rmse[25]

    def test_outcome_carries_config(self):
        cfg = small_config()
        out = run_experiment(cfg, workers=1)
        assert out.config == cfg
