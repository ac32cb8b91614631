"""Training loop: determinism, early stopping, divergence, threading."""

import json

import numpy as np
import pytest

from kagnn.errors import TrainingDivergedError
from kagnn.graphs import build_graph
from kagnn.models import init_model
from kagnn.splits import SplitSpec, random_split
from kagnn.synthetic import parity_dataset
from kagnn.training import (
    TrainConfig,
    evaluate_model,
    fit_on_split,
    train_loop,
)

from conftest import make_chain


@pytest.fixture(scope="module")
def parity_graphs():
    return [build_graph(m, cutoff=5.0) for m in parity_dataset(40, seed=0)]


def small_config(**overrides):
    base = dict(variant="kagnn", n_harmonics=1, n_layers=1, hidden_dim=8,
                batch_size=16, learning_rate=1e-3, epochs=3, seed=0)
    base.update(overrides)
    return TrainConfig(**base)


class TestTrainConfig:
    def test_defaults_are_valid(self):
        TrainConfig().validate()

    @pytest.mark.parametrize("field, value", [
        ("variant", "transformer"),
        ("n_harmonics", 0),
        ("n_layers", 0),
        ("hidden_dim", -1),
        ("batch_size", 0),
        ("learning_rate", 0.0),
        ("epochs", -1),
        ("cutoff", -2.0),
        ("patience", 0),
        ("threads", 0),
    ])
    def test_validation_names_the_field(self, field, value):
        config = small_config(**{field: value})
        with pytest.raises(ValueError, match=field):
            config.validate()

    def test_json_round_trip(self):
        config = small_config(epochs=7, threads=2)
        clone = TrainConfig.from_json_dict(config.to_json_dict())
        assert clone == config

    def test_unknown_json_key_rejected(self):
        with pytest.raises(ValueError, match="momentum"):
            TrainConfig.from_json_dict({"momentum": 0.9})

    def test_with_overrides_skips_none(self):
        config = small_config()
        same = config.with_overrides(epochs=None, seed=None)
        assert same == config
        changed = config.with_overrides(epochs=9)
        assert changed.epochs == 9 and changed.seed == config.seed


class TestTrainLoop:
    def test_zero_epochs_evaluates_untrained_model(self, parity_graphs):
        config = small_config(epochs=0)
        split = random_split(len(parity_graphs), seed=0)
        report, model = train_loop(parity_graphs, config, split)
        assert report.epochs == []
        assert report.best_epoch is None
        assert report.test_auc is not None
        # the returned model must be the untrained seed-0 init
        fresh = init_model("kagnn", n_tasks=1, n_harmonics=1, n_layers=1,
                           hidden_dim=8, seed=0)
        for (_, a), (_, b) in zip(model.parameters(), fresh.parameters()):
            np.testing.assert_array_equal(a, b)

    def test_same_seed_reproduces_report_byte_for_byte(self, parity_graphs):
        config = small_config(epochs=2)
        split = random_split(len(parity_graphs), seed=1)
        report_a, model_a = train_loop(parity_graphs, config, split)
        report_b, model_b = train_loop(parity_graphs, config, split)
        assert json.dumps(report_a.to_json_dict()) == \
            json.dumps(report_b.to_json_dict())
        for (_, a), (_, b) in zip(model_a.parameters(), model_b.parameters()):
            np.testing.assert_array_equal(a, b)

    def test_different_seed_changes_model(self, parity_graphs):
        split = random_split(len(parity_graphs), seed=1)
        _, model_a = train_loop(parity_graphs, small_config(epochs=1), split)
        _, model_b = train_loop(parity_graphs,
                                small_config(epochs=1, seed=5), split)
        assert any(not np.array_equal(a, b)
                   for (_, a), (_, b) in zip(model_a.parameters(),
                                             model_b.parameters()))

    def test_report_carries_run_facts(self, parity_graphs):
        config = small_config(epochs=2)
        split = random_split(len(parity_graphs), seed=0)
        report, model = train_loop(parity_graphs, config, split)
        assert report.n_molecules == len(parity_graphs)
        assert report.n_tasks == 1
        assert report.parameter_count == model.parameter_count()
        assert report.split_sizes == split.sizes()
        assert report.split_provenance == "random-seeded"
        assert len(report.epochs) == 2
        assert report.edge_counts["covalent"] > 0
        assert report.edge_counts["cutoff"] > 0
        doc = report.to_json_dict()
        assert "timestamp" not in json.dumps(doc).lower()
        assert doc["config"]["epochs"] == 2

    def test_loss_decreases_on_average(self, parity_graphs):
        config = small_config(epochs=12, learning_rate=1e-2)
        split = random_split(len(parity_graphs), seed=0)
        report, _ = train_loop(parity_graphs, config, split)
        first = np.mean([r.train_loss for r in report.epochs[:3]])
        last = np.mean([r.train_loss for r in report.epochs[-3:]])
        assert last < first


class TestEarlyStopping:
    def test_degenerate_validation_stops_after_patience(self, parity_graphs):
        # validation fold with a single molecule: AUC is always undefined,
        # so no epoch ever improves and the patience counter runs out
        model = init_model("kagnn", n_tasks=1, n_harmonics=1, n_layers=1,
                           hidden_dim=8, seed=0)
        config = small_config(epochs=30, patience=4)
        outcome = fit_on_split(model, parity_graphs, config,
                               train_idx=list(range(10)), valid_idx=[11])
        assert outcome.stopped_early is True
        assert len(outcome.epochs) == 4
        assert outcome.best_valid_auc is None
        assert all(r.valid_auc is None for r in outcome.epochs)

    def test_no_validation_runs_all_epochs(self, parity_graphs):
        model = init_model("kagnn", n_tasks=1, n_harmonics=1, n_layers=1,
                           hidden_dim=8, seed=0)
        config = small_config(epochs=5)
        outcome = fit_on_split(model, parity_graphs, config,
                               train_idx=list(range(20)))
        assert outcome.stopped_early is False
        assert len(outcome.epochs) == 5
        assert outcome.best_epoch == 5

    def test_best_epoch_parameters_restored(self, parity_graphs):
        model = init_model("kagnn", n_tasks=1, n_harmonics=1, n_layers=1,
                           hidden_dim=8, seed=0)
        config = small_config(epochs=6, learning_rate=1e-2)
        outcome = fit_on_split(model, parity_graphs, config,
                               train_idx=list(range(24)),
                               valid_idx=list(range(24, 36)))
        assert outcome.best_epoch is not None
        best_record = outcome.epochs[outcome.best_epoch - 1]
        assert best_record.valid_auc == outcome.best_valid_auc
        valid_graphs = [parity_graphs[i] for i in range(24, 36)]
        auc, _ = evaluate_model(model, valid_graphs)
        assert auc == pytest.approx(outcome.best_valid_auc, abs=1e-12)


class TestDivergence:
    def test_nan_features_raise_with_epoch_and_batch(self, parity_graphs):
        graphs = [g for g in parity_graphs]
        poisoned = build_graph(parity_dataset(1, seed=9)[0])
        poisoned.node_features[0, 0] = np.nan
        graphs[3] = poisoned
        model = init_model("kagnn", n_tasks=1, n_harmonics=1, n_layers=1,
                           hidden_dim=8, seed=0)
        config = small_config(epochs=2, batch_size=40)
        with pytest.raises(TrainingDivergedError) as err:
            fit_on_split(model, graphs, config, train_idx=list(range(40)))
        assert err.value.epoch == 1
        assert err.value.batch == 0
        assert "epoch 1" in str(err.value)

    def test_empty_train_fold_rejected(self, parity_graphs):
        model = init_model("kagnn", n_tasks=1, hidden_dim=8, seed=0)
        with pytest.raises(ValueError, match="empty"):
            fit_on_split(model, parity_graphs, small_config(), train_idx=[])


class TestThreads:
    def test_thread_count_does_not_change_results_materially(self, parity_graphs):
        split = SplitSpec(train=list(range(30)), valid=list(range(30, 35)),
                          test=list(range(35, 40)), provenance="manual",
                          seed=None)
        report1, model1 = train_loop(parity_graphs,
                                     small_config(epochs=3, threads=1), split)
        report2, model2 = train_loop(parity_graphs,
                                     small_config(epochs=3, threads=2), split)
        for r1, r2 in zip(report1.epochs, report2.epochs):
            assert r1.train_loss == pytest.approx(r2.train_loss, rel=1e-9)
        assert report1.test_auc == pytest.approx(report2.test_auc, abs=1e-12)
        for (_, a), (_, b) in zip(model1.parameters(), model2.parameters()):
            np.testing.assert_allclose(a, b, rtol=1e-7, atol=1e-10)

    def test_fixed_thread_count_is_deterministic(self, parity_graphs):
        split = random_split(len(parity_graphs), seed=2)
        config = small_config(epochs=2, threads=3)
        report_a, _ = train_loop(parity_graphs, config, split)
        report_b, _ = train_loop(parity_graphs, config, split)
        assert json.dumps(report_a.to_json_dict()) == \
            json.dumps(report_b.to_json_dict())


def test_evaluate_model_returns_macro_and_per_task():
    graphs = [build_graph(m) for m in
              (make_chain(2, labels=[1, 0]), make_chain(3, labels=[0, 1]),
               make_chain(4, labels=[1, None]), make_chain(5, labels=[0, 1]))]
    model = init_model("kagnn", n_tasks=2, n_harmonics=1, hidden_dim=8, seed=0)
    macro, per_task = evaluate_model(model, graphs)
    assert len(per_task) == 2
    kept = [v for v in per_task if v is not None]
    assert macro == pytest.approx(float(np.mean(kept)))
