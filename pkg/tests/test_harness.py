import math

import numpy as np
import pytest

from asgld import HyperParams
from asgld.harness import (
    EpochRow,
    ExperimentConfig,
    GridSearchError,
    GridSpec,
    ProblemSpec,
    RunRecord,
    Schedule,
    compare,
    grid_search,
    run_experiment,
    schedule_eta,
)

QUAD = ProblemSpec(kind="quadratic", dim=10, condition=10.0)
MOONS = ProblemSpec(kind="two_moons", n=100, noise_sd=0.2, model="logistic")


def make_cfg(optimizer="sgd", problem=QUAD, eta=0.05, epochs=20, steps_per_epoch=10,
             schedule_kind="constant", seed=0, out=None, label="", **hp_kwargs):
    hp = HyperParams(eta=eta, **hp_kwargs)
    return ExperimentConfig(
        optimizer=optimizer,
        hp=hp,
        problem=problem,
        schedule=Schedule(kind=schedule_kind, base_eta=eta),
        epochs=epochs,
        batch_size=16,
        steps_per_epoch=steps_per_epoch,
        seed=seed,
        out=out,
        label=label,
    )


class TestSchedule:
    def test_step_decay_drop_at_150_of_200(self):
        sch = Schedule(kind="step_decay", base_eta=0.1, decay_factor=10.0,
                       decay_at_fraction=0.75)
        assert schedule_eta(sch, 150, 200) == 0.1
        assert schedule_eta(sch, 151, 200) == pytest.approx(0.01)
        assert schedule_eta(sch, 200, 200) == pytest.approx(0.01)

    def test_constant(self):
        sch = Schedule(kind="constant", base_eta=0.3)
        assert all(schedule_eta(sch, e, 10) == 0.3 for e in range(1, 11))

    def test_inverse_time(self):
        sch = Schedule(kind="inverse_time", base_eta=1.0)
        assert schedule_eta(sch, 4, 100) == 0.25
        assert schedule_eta(sch, 1, 100) == 1.0

    def test_epoch_out_of_range(self):
        sch = Schedule(kind="constant", base_eta=0.1)
        with pytest.raises(ValueError):
            schedule_eta(sch, 0, 10)
        with pytest.raises(ValueError):
            schedule_eta(sch, 11, 10)

    @pytest.mark.parametrize("kwargs", [
        dict(kind="exotic"),
        dict(base_eta=0.0),
        dict(decay_factor=0.0),
        dict(decay_at_fraction=0.0),
        dict(decay_at_fraction=1.5),
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            Schedule(**{"kind": "constant", "base_eta": 0.1, **kwargs})


class TestRunRecordCsv:
    def test_roundtrip(self, tmp_path):
        rec = RunRecord(rows=[
            EpochRow(1, 0.1, 0.5, 0.8, 0.6, 0.75, 0.0),
            EpochRow(2, 0.1, 0.4, 0.85, 0.55, 0.8, 0.0),
        ])
        path = tmp_path / "r.csv"
        rec.write_csv(path)
        back = RunRecord.read_csv(path)
        assert back.rows == rec.rows
        assert back.diverged_at is None

    def test_diverged_trailer(self, tmp_path):
        rec = RunRecord(rows=[EpochRow(1, 0.1, 0.5, math.nan, 0.5, math.nan, 0.0)],
                        diverged_at=2)
        path = tmp_path / "d.csv"
        rec.write_csv(path)
        text = path.read_text()
        assert text.strip().endswith("diverged,2")
        back = RunRecord.read_csv(path)
        assert back.diverged_at == 2 and len(back.rows) == 1
        assert math.isnan(back.rows[0].train_acc)

    def test_nine_significant_digits(self, tmp_path):
        rec = RunRecord(rows=[EpochRow(1, 1 / 3, 2 / 3, 0.0, 0.0, 0.0, 0.0)])
        path = tmp_path / "f.csv"
        rec.write_csv(path)
        assert "0.333333333" in path.read_text()


class TestRunExperiment:
    def test_empty_schedule_rejected(self):
        with pytest.raises(ValueError, match="empty schedule"):
            run_experiment(make_cfg(epochs=0))

    def test_unknown_optimizer_rejected(self):
        with pytest.raises(ValueError, match="unknown optimizer"):
            run_experiment(make_cfg(optimizer="bfgs"))

    def test_quadratic_sgd_converges(self):
        rec = run_experiment(make_cfg(epochs=100, steps_per_epoch=10))
        assert rec.diverged_at is None
        assert len(rec.rows) == 100
        assert [r.epoch for r in rec.rows] == list(range(1, 101))
        assert rec.final.train_loss < 1e-6

    def test_identical_config_identical_bytes(self, tmp_path):
        out = tmp_path / "run.csv"
        cfg = make_cfg(optimizer="asgld", psi=1.0, epochs=5, out=out)
        run_experiment(cfg)
        first = out.read_bytes()
        run_experiment(cfg)
        assert out.read_bytes() == first

    def test_seeds_change_stochastic_runs(self):
        a = run_experiment(make_cfg(optimizer="sgld", epsilon_noise=0.1, seed=1, epochs=3))
        b = run_experiment(make_cfg(optimizer="sgld", epsilon_noise=0.1, seed=2, epochs=3))
        assert a.final.train_loss != b.final.train_loss

    def test_divergence_marks_and_persists_partial(self, tmp_path):
        out = tmp_path / "div.csv"
        cfg = make_cfg(eta=1.0, epochs=50, steps_per_epoch=10, out=out)
        rec = run_experiment(cfg)  # eta*lambda_max = 10: explodes
        assert rec.diverged_at is not None
        assert len(rec.rows) < 50
        back = RunRecord.read_csv(out)
        assert back.diverged_at == rec.diverged_at

    def test_dataset_run_records_accuracies(self):
        cfg = make_cfg(optimizer="adam", problem=MOONS, eta=0.05, epochs=4)
        rec = run_experiment(cfg)
        assert len(rec.rows) == 4
        for r in rec.rows:
            assert 0.0 <= r.train_acc <= 1.0
            assert 0.0 <= r.test_acc <= 1.0

    def test_batch_size_larger_than_train_set(self):
        cfg = make_cfg(problem=ProblemSpec(kind="two_moons", n=10, model="logistic"),
                       epochs=1)
        with pytest.raises(ValueError, match="batch_size"):
            run_experiment(cfg)

    def test_walltime_default_zero(self):
        rec = run_experiment(make_cfg(epochs=3))
        assert all(r.wall_secs == 0.0 for r in rec.rows)

    def test_walltime_opt_in(self):
        from dataclasses import replace

        rec = run_experiment(replace(make_cfg(epochs=3), record_walltime=True))
        walls = [r.wall_secs for r in rec.rows]
        assert walls[-1] > 0.0 and walls == sorted(walls)

    def test_step_decay_applies_in_record(self):
        cfg = make_cfg(epochs=8, schedule_kind="step_decay")
        rec = run_experiment(cfg)
        etas = [r.eta for r in rec.rows]
        assert etas[:6] == [0.05] * 6
        assert etas[6] == pytest.approx(0.005)


def synthetic_runner(opt_eta, dataset=False, diverge_above=None):
    """Runner stub whose final metric peaks at opt_eta on a log scale."""

    def run(cfg):
        eta = cfg.hp.eta
        if diverge_above is not None and eta > diverge_above:
            return RunRecord(rows=[], diverged_at=1)
        badness = (math.log10(eta) - math.log10(opt_eta)) ** 2
        row = EpochRow(1, eta, badness, -badness, badness, -badness, 0.0)
        return RunRecord(rows=[row])

    return run


class TestGridSearch:
    def test_initial_grid_is_log_spaced(self):
        grid = GridSpec(center=0.1, points=5, ratio=10.0)
        np.testing.assert_allclose(grid.initial_etas(),
                                   [1e-3, 1e-2, 1e-1, 1e0, 1e1], rtol=1e-12)

    def test_interior_optimum_needs_five_runs(self):
        calls = []

        def counting(cfg):
            calls.append(cfg.hp.eta)
            return synthetic_runner(0.1)(cfg)

        res = grid_search(make_cfg(), GridSpec(center=0.1), metric="full_eval",
                          runner=counting)
        assert len(calls) == 5
        assert res.extensions == 0 and not res.capped_at_boundary
        assert res.best_eta == pytest.approx(0.1)

    def test_extends_downward_to_reach_optimum(self):
        # optimum two decades below the initial grid's low edge
        res = grid_search(make_cfg(eta=0.1), GridSpec(center=0.1),
                          metric="full_eval", runner=synthetic_runner(1e-5))
        assert res.best_eta == pytest.approx(1e-5)
        assert res.extensions == 3  # 1e-4, 1e-5, 1e-6 added
        assert len(res.records) == 8
        assert not res.capped_at_boundary

    def test_extends_upward(self):
        res = grid_search(make_cfg(eta=0.1), GridSpec(center=0.1),
                          metric="full_eval", runner=synthetic_runner(100.0))
        assert res.best_eta == pytest.approx(100.0)

    def test_capped_extension_flags_warning(self):
        res = grid_search(
            make_cfg(eta=0.1), GridSpec(center=0.1, max_extensions=0),
            metric="full_eval", runner=synthetic_runner(1e-6),
        )
        assert res.capped_at_boundary
        assert res.best_eta == pytest.approx(1e-3)  # boundary point

    def test_all_diverged_raises_listing_etas(self):
        def all_bad(cfg):
            return RunRecord(rows=[], diverged_at=1)

        with pytest.raises(GridSearchError, match="0.1"):
            grid_search(make_cfg(), GridSpec(center=0.1), metric="full_eval",
                        runner=all_bad)

    def test_diverging_large_etas_dont_win(self):
        res = grid_search(
            make_cfg(eta=0.1), GridSpec(center=0.1),
            metric="full_eval", runner=synthetic_runner(0.1, diverge_above=1.0),
        )
        assert res.best_eta == pytest.approx(0.1)

    def test_real_sweep_on_quadratic(self, tmp_path):
        cfg = make_cfg(epochs=10, steps_per_epoch=20)
        res = grid_search(cfg, GridSpec(center=0.05, points=3), out_dir=tmp_path)
        assert (tmp_path / f"sweep_sgd_eta{res.best_eta:.6g}_seed0.csv").exists()
        assert res.best_eta in [e for e, _ in res.records]


class TestCompare:
    def test_reduction_identity_lifts_to_harness(self):
        cfgs = [
            make_cfg(optimizer="sgd", epochs=5),
            make_cfg(optimizer="asgld", psi=0.0, epochs=5),
        ]
        table = compare(cfgs, seeds=3)
        for rec_a, rec_b in zip(table.records["sgd"], table.records["asgld"]):
            # accuracy columns are nan on landscapes, so compare the losses
            assert np.array_equal(rec_a.metric_series("train_loss"),
                                  rec_b.metric_series("train_loss"))
            assert np.array_equal(rec_a.metric_series("eta"),
                                  rec_b.metric_series("eta"))

    def test_single_seed_std_is_zero(self):
        cfgs = [make_cfg(optimizer="sgd", epochs=3),
                make_cfg(optimizer="momentum", epochs=3)]
        table = compare(cfgs, seeds=1)
        for label in table.labels:
            _, std = table.final_stats("train_loss")[label]
            assert std == 0.0

    def test_mismatched_problems_rejected(self):
        with pytest.raises(ValueError, match="mismatched problems"):
            compare([make_cfg(), make_cfg(problem=MOONS)], seeds=1)

    def test_mismatched_epochs_rejected(self):
        with pytest.raises(ValueError, match="epoch"):
            compare([make_cfg(epochs=3), make_cfg(epochs=4)], seeds=1)

    def test_requires_two_configs(self):
        with pytest.raises(ValueError):
            compare([make_cfg()], seeds=1)

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            compare([make_cfg(), make_cfg()], seeds=1)

    def test_combined_csv_long_format(self, tmp_path):
        cfgs = [make_cfg(optimizer="sgd", epochs=2),
                make_cfg(optimizer="momentum", epochs=2)]
        compare(cfgs, seeds=2, out_dir=tmp_path)
        lines = (tmp_path / "comparison.csv").read_text().strip().splitlines()
        assert lines[0] == ("optimizer,seed,epoch,eta,train_loss,train_acc,"
                            "test_loss,test_acc,wall_secs")
        # 2 optimizers x 2 seeds x 2 epochs
        assert len(lines) == 1 + 8
        assert (tmp_path / "compare_sgd_seed0.csv").exists()

    def test_mean_curevery_epoch(self):
        cfgs = [make_cfg(optimizer="sgd", epochs=4),
                make_cfg(optimizer="momentum", epochs=4)]
        table = compare(cfgs, seeds=2)
        curve = table.mean_curve("sgd", "train_loss")
        assert curve.shape == (4,)
        assert np.all(np.isfinite(curve))
        assert curve[-1] < curve[0]

    def test_divergence_does_not_contaminate_siblings(self):
        cfgs = [make_cfg(optimizer="sgd", eta=1.0, epochs=40),   # diverges
                make_cfg(optimizer="sgd", eta=0.05, epochs=40, label="stable")]
        table = compare(cfgs, seeds=2)
        assert table.n_diverged("sgd") == 2
        assert table.n_diverged("stable") == 0
        for rec in table.records["stable"]:
            assert rec.diverged_at is None and len(rec.rows) == 40
