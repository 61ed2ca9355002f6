import numpy as np
import pytest

from ca_reservoir import experiments as ex
from ca_reservoir.automata import Elementary
from ca_reservoir.bitcore import BitVector, Permutation, stream
from ca_reservoir.errors import MemoryBudgetError, ParameterError
from ca_reservoir.reservoir import ReservoirConfig, recurrent_init, recurrent_step
from ca_reservoir.tasks import gen_5bit

from conftest import make_rng


class TestMemoryExperiment:
    def test_small_run_report_structure(self):
        rep = ex.run_memory_experiment(
            task="5bit", rule=90, t0=20, iters=2, perms=4, trials=2, master_seed=5
        )
        assert rep.experiment == "memtask"
        assert 0.0 <= rep.metrics["percent_failed"] <= 100.0
        assert len(rep.trials) == 2
        assert rep.csv_fields[0] == "rule"

    def test_deterministic_given_seed(self):
        kw = dict(task="5bit", rule=90, t0=20, iters=2, perms=4, trials=2, master_seed=9)
        a = ex.run_memory_experiment(**kw)
        b = ex.run_memory_experiment(**kw)
        assert a.metrics == b.metrics
        assert ex.report_to_csv(a) == ex.report_to_csv(b)

    def test_budget_guard(self):
        with pytest.raises(MemoryBudgetError):
            ex.run_memory_experiment(
                task="5bit", rule=90, t0=200, iters=16, perms=64, trials=1,
                master_seed=0, memory_cap_bytes=10_000,
            )

    def test_bad_parameters(self):
        with pytest.raises(ParameterError):
            ex.run_memory_experiment(task="7bit")
        with pytest.raises(ParameterError):
            ex.run_memory_experiment(mode="sideways")
        with pytest.raises(ParameterError):
            ex.run_memory_experiment(feature_kind="global")

    def test_life_rule_small(self):
        rep = ex.run_memory_experiment(
            task="5bit", rule="life", t0=15, iters=4, perms=4, trials=1, master_seed=3
        )
        assert "percent_failed" in rep.metrics

    def test_20bit_small(self):
        rep = ex.run_memory_experiment(
            task="20bit", rule=90, t0=15, iters=4, perms=16, trials=1,
            master_seed=3, n_train=40, n_test=10,
        )
        assert 0.0 <= rep.metrics["percent_failed"] <= 100.0


class TestStreamingEqualsMaterialized:
    def test_paths_agree(self):
        task = gen_5bit(12)
        rule = ex._memory_rule(90, task.flat_length)
        perms = ex._derive_perms(rule.cell_count, 3, 77)
        chunks = list(ex._iter_step_chunks(task, rule, 3, perms, "distributed", True))
        x = np.concatenate(chunks, axis=2)
        direct = ex._fit_eval_materialized(x, task, 1e-8)
        streamed = ex._fit_eval_streaming(
            lambda: ex._iter_step_chunks(task, rule, 3, perms, "distributed", True),
            task,
            1e-8,
        )
        # gram vs normal-equation algebra differ by O(lam * cond); far below
        # the 0.5 decision threshold
        assert np.allclose(direct, streamed, atol=1e-4)


class TestRecurrentDriver:
    def test_batch_matches_scalar_api(self):
        """The batched recurrent driver must replay the public recurrent_step
        semantics exactly, coins included."""
        task = gen_5bit(6)
        task.inputs = task.inputs[:1]  # single sequence
        task.targets = task.targets[:1]
        trial_seed = 424242
        perms = ex._derive_perms(4, 2, trial_seed)
        feats = ex._recurrent_step_features(task, 90, 3, perms, trial_seed)

        cfg = ReservoirConfig(
            rule=Elementary(90, 4), R=2, I=3, master_seed=trial_seed,
            explicit_permutations=tuple(Permutation(p) for p in perms),
        )
        state = recurrent_init(BitVector.from_array(task.inputs[0, 0]), cfg)
        length = task.inputs.shape[1]
        for t in range(length):
            x_next = (
                BitVector.from_array(task.inputs[0, t + 1]) if t + 1 < length else None
            )
            state, feature = recurrent_step(
                state, x_next, cfg, stream(trial_seed, ex._NS_COINS + t)
            )
            assert np.array_equal(feature.to_array(), feats[0, t]), f"step {t}"

    def test_recurrent_smoke(self):
        rep = ex.run_memory_experiment(
            task="5bit", rule=90, t0=10, iters=4, perms=4, trials=1,
            master_seed=1, mode="recurrent",
        )
        assert "percent_failed" in rep.metrics

    def test_recurrent_rejects_life(self):
        from ca_reservoir.errors import UnsupportedRuleError

        with pytest.raises(UnsupportedRuleError):
            ex.run_memory_experiment(
                task="5bit", rule="life", t0=10, iters=2, perms=2, trials=1,
                mode="recurrent",
            )


class TestDistributedVsLocal:
    def test_small_run(self):
        rep = ex.run_distributed_vs_local(
            t0=15, iters=2, perm_counts=(2, 4), trials=2, master_seed=3
        )
        assert len(rep.rows) == 2
        for row in rep.rows:
            assert set(
                ["distributed_percent_failed", "local_percent_failed"]
            ) <= set(row)


class TestMetricExperiment:
    def test_small_run(self):
        rep = ex.run_metric_experiment(
            n=64, nz=0.2, iters=2, perms=6, mode="distance", master_seed=4, n_vectors=20
        )
        assert np.isfinite(rep.metrics["train_pearson"])
        assert np.isfinite(rep.metrics["test_pearson"])

    def test_degenerate_density(self):
        rep = ex.run_metric_experiment(
            n=32, nz=0.0, iters=2, perms=2, mode="distance", master_seed=4, n_vectors=10
        )
        assert rep.metrics["degenerate"]
        assert np.isnan(rep.metrics["test_pearson"])


class TestPowerExperiment:
    def test_duplicated_vectors_correlate_fully(self):
        feats = np.tile(make_rng(7).integers(0, 2, size=(1, 50), dtype=np.uint8), (4, 1))
        assert ex.mean_pairwise_correlation(feats) == pytest.approx(1.0)

    def test_small_grid(self):
        rep = ex.run_power_experiment(
            n_list=(32,), nz_list=(0.2,), iters=2, perms=2, n_vectors=10,
            n_seeds=2, master_seed=5,
        )
        assert len(rep.rows) == 1
        assert -1.0 <= rep.rows[0]["mean_pairwise_correlation"] <= 1.0


class TestDistortionExperiment:
    def test_zero_flip_ratio_is_one(self):
        rep = ex.run_distortion_experiment(
            n=64, iters=2, perms=2, flip_percents=(0, 10), n_seeds=3, master_seed=6
        )
        assert rep.rows[0]["corr_ratio"] == 1.0
        assert rep.rows[1]["corr_ratio"] < 1.0


class TestHdcDemoExperiment:
    def test_grandmother_smoke(self):
        rep = ex.run_hdc_demo(scenario="grandmother", dim=2000, runs=5, master_seed=7)
        assert 0.0 <= rep.metrics["success_rate"] <= 1.0

    def test_unknown_scenario(self):
        with pytest.raises(ParameterError):
            ex.run_hdc_demo(scenario="teleport")


class TestReportIO:
    def test_csv_roundtrip_exact(self, tmp_path):
        rep = ex.run_memory_experiment(
            task="5bit", rule=90, t0=15, iters=2, perms=3, trials=2, master_seed=8
        )
        path = tmp_path / "r.csv"
        ex.write_report(rep, str(path))
        rows = ex.read_csv_rows(str(path))
        assert rows[0]["percent_failed"] == rep.metrics["percent_failed"]
        assert rows[0]["t0"] == 15

    def test_json_report(self, tmp_path):
        rep = ex.run_power_experiment(
            n_list=(16,), nz_list=(0.5,), iters=1, perms=2, n_vectors=5,
            n_seeds=1, master_seed=9,
        )
        path = tmp_path / "r.json"
        ex.write_report(rep, str(path))
        import json

        data = json.loads(path.read_text())
        assert data["experiment"] == "power"
        assert data["master_seed"] == 9
