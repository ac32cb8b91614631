"""Graph batching, losses, and both model variants.

Batch aggregation ops are checked against per-graph loops written from
the definitions; model gradients get their own end-to-end audit in
test_gradcheck.py, so here the focus is mechanics and serialization.
"""

import numpy as np
import pytest

from kagnn.graphs import build_graph
from kagnn.models import (
    PROB_CLAMP,
    AffineMap,
    GraphBatch,
    KaGatModel,
    KaGnnModel,
    bce_loss,
    bce_loss_and_logit_grad,
    init_model,
    load_checkpoint,
    model_from_checkpoint_dict,
    model_to_checkpoint_dict,
    save_checkpoint,
    sigmoid,
)
from kagnn.synthetic import random_molecules

from conftest import make_chain


@pytest.fixture
def batch3():
    mols = [make_chain(3, labels=[1, None]), make_chain(2, labels=[0, 1]),
            make_chain(4, labels=[None, 0])]
    return GraphBatch([build_graph(m, cutoff=5.0) for m in mols])


class TestGraphBatch:
    def test_node_concatenation_and_offsets(self, batch3):
        assert batch3.node_features.shape[0] == 9
        np.testing.assert_array_equal(batch3.node_counts, [3, 2, 4])
        np.testing.assert_array_equal(
            batch3.graph_id, [0, 0, 0, 1, 1, 2, 2, 2, 2])

    def test_directed_edges_come_in_opposite_pairs(self, batch3):
        src, dst = batch3.edge_src, batch3.edge_dst
        assert batch3.n_directed_edges % 2 == 0
        for k in range(0, batch3.n_directed_edges, 2):
            assert (src[k], dst[k]) == (dst[k + 1], src[k + 1])

    def test_labels_and_mask_stacking(self, batch3):
        np.testing.assert_array_equal(batch3.labels,
                                      [[1, 0], [0, 1], [0, 0]])
        np.testing.assert_array_equal(batch3.mask,
                                      [[1, 0], [1, 1], [0, 1]])

    def test_mean_pool_matches_per_graph_loop(self, batch3):
        rng = np.random.default_rng(0)
        h = rng.normal(size=(9, 5))
        pooled = batch3.mean_pool(h)
        assert pooled.shape == (3, 5)
        np.testing.assert_allclose(pooled[0], h[0:3].mean(axis=0))
        np.testing.assert_allclose(pooled[1], h[3:5].mean(axis=0))
        np.testing.assert_allclose(pooled[2], h[5:9].mean(axis=0))

    def test_neighbor_mean_matches_adjacency_loop(self, batch3):
        rng = np.random.default_rng(1)
        h = rng.normal(size=(9, 4))
        agg = batch3.neighbor_mean(h)
        # recompute from the directed edge list
        for node in range(9):
            nbrs = [batch3.edge_src[k] for k in range(batch3.n_directed_edges)
                    if batch3.edge_dst[k] == node]
            if nbrs:
                np.testing.assert_allclose(agg[node],
                                           h[nbrs].mean(axis=0), atol=1e-12)
            else:
                np.testing.assert_array_equal(agg[node], np.zeros(4))

    def test_isolated_node_gets_zero_neighbor_mean(self):
        far = make_chain(1, labels=[1])
        batch = GraphBatch([build_graph(far, cutoff=1.0)])
        h = np.ones((1, 3))
        np.testing.assert_array_equal(batch.neighbor_mean(h), np.zeros((1, 3)))

    def test_incident_edge_mean_isolated_node_is_zero(self):
        batch = GraphBatch([build_graph(make_chain(1, labels=[0]))])
        np.testing.assert_array_equal(batch.incident_edge_mean(),
                                      np.zeros((1, 21)))

    def test_incoming_softmax_normalizes_per_destination_channel(self, batch3):
        rng = np.random.default_rng(2)
        e = rng.normal(size=(batch3.n_directed_edges, 4))
        alpha = batch3.incoming_softmax(e)
        sums = np.zeros((9, 4))
        np.add.at(sums, batch3.edge_dst, alpha)
        has_incoming = np.zeros(9, dtype=bool)
        has_incoming[batch3.edge_dst] = True
        np.testing.assert_allclose(sums[has_incoming], 1.0, atol=1e-12)
        assert np.all(alpha > 0)

    def test_incoming_softmax_backward_matches_finite_differences(self, batch3):
        rng = np.random.default_rng(3)
        e = rng.normal(size=(batch3.n_directed_edges, 2))
        w = rng.normal(size=e.shape)

        def loss(e_arr):
            return float(np.sum(w * batch3.incoming_softmax(e_arr)))

        alpha = batch3.incoming_softmax(e)
        got = batch3.incoming_softmax_backward(alpha, w)
        fd = np.zeros_like(e)
        step = 1e-6
        for idx in np.ndindex(e.shape):
            e[idx] += step
            hi = loss(e)
            e[idx] -= 2 * step
            lo = loss(e)
            e[idx] += step
            fd[idx] = (hi - lo) / (2 * step)
        np.testing.assert_allclose(got, fd, atol=1e-7)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            GraphBatch([])

    def test_mismatched_task_counts_rejected(self):
        a = build_graph(make_chain(2, labels=[1]))
        b = build_graph(make_chain(2, labels=[1, 0]))
        with pytest.raises(ValueError):
            GraphBatch([a, b])


class TestBceLoss:
    def test_frozen_values(self):
        p = np.array([[0.5]])
        y = np.array([[1.0]])
        m = np.array([[1.0]])
        assert bce_loss(p, y, m) == pytest.approx(np.log(2.0), rel=1e-12)
        # confident and correct: clamp keeps the loss finite but tiny
        sure = bce_loss(np.array([[1.0]]), y, m)
        assert sure == pytest.approx(-np.log(1.0 - PROB_CLAMP), rel=1e-6)

    def test_sum_not_mean_over_pairs(self):
        p = np.full((4, 1), 0.5)
        y = np.ones((4, 1))
        m = np.ones((4, 1))
        assert bce_loss(p, y, m) == pytest.approx(4 * np.log(2.0), rel=1e-12)

    def test_masked_pairs_contribute_nothing(self):
        p = np.array([[0.5, 0.999]])
        y = np.array([[1.0, 0.0]])
        m = np.array([[1.0, 0.0]])
        assert bce_loss(p, y, m) == pytest.approx(np.log(2.0), rel=1e-12)

    def test_gradient_is_p_minus_y_inside_clamp(self):
        p = np.array([[0.7, 0.2]])
        y = np.array([[1.0, 0.0]])
        m = np.ones((1, 2))
        _loss, d = bce_loss_and_logit_grad(p, y, m)
        np.testing.assert_allclose(d, [[-0.3, 0.2]], atol=1e-12)

    def test_gradient_zero_outside_clamp_and_under_mask(self):
        p = np.array([[1.0, 0.5]])
        y = np.array([[0.0, 1.0]])
        m = np.array([[1.0, 0.0]])
        _loss, d = bce_loss_and_logit_grad(p, y, m)
        # saturated first entry: zero gradient even though the label disagrees
        np.testing.assert_array_equal(d, [[0.0, 0.0]])

    def test_all_masked_gives_zero_loss(self):
        p = np.array([[0.9], [0.1]])
        y = np.array([[1.0], [0.0]])
        m = np.zeros((2, 1))
        loss, d = bce_loss_and_logit_grad(p, y, m)
        assert loss == 0.0
        np.testing.assert_array_equal(d, np.zeros((2, 1)))


def test_sigmoid_stable_at_extremes():
    x = np.array([-800.0, 0.0, 800.0])
    s = sigmoid(x)
    assert np.all(np.isfinite(s))
    assert s[0] == 0.0 and s[1] == 0.5 and s[2] == 1.0


class TestAffineMap:
    def test_forward_formula(self):
        rng = np.random.default_rng(0)
        layer = AffineMap.init(3, 2, rng)
        x = rng.normal(size=(5, 3))
        np.testing.assert_allclose(layer.forward(x),
                                   x @ layer.weight.T + layer.bias)

    def test_parameter_count(self):
        layer = AffineMap.init(4, 6, np.random.default_rng(0))
        assert layer.parameter_count() == 4 * 6 + 6
        assert sum(a.size for _, a in layer.parameters()) == 30


class TestVariants:
    @pytest.fixture
    def batch(self):
        mols = random_molecules(6, seed=3, n_tasks=2)
        return GraphBatch([build_graph(m, cutoff=4.0) for m in mols])

    @pytest.mark.parametrize("variant", ["kagnn", "kagat"])
    def test_forward_shapes_and_prob_range(self, variant, batch):
        model = init_model(variant, n_tasks=2, n_harmonics=2, n_layers=2,
                           hidden_dim=8, seed=0)
        trace = model.forward(batch)
        assert trace.probabilities.shape == (6, 2)
        assert np.all((trace.probabilities > 0) & (trace.probabilities < 1))
        assert np.all(np.isfinite(trace.logits))

    @pytest.mark.parametrize("variant", ["kagnn", "kagat"])
    def test_same_seed_same_output(self, variant, batch):
        a = init_model(variant, n_tasks=2, hidden_dim=8, seed=11)
        b = init_model(variant, n_tasks=2, hidden_dim=8, seed=11)
        np.testing.assert_array_equal(a.forward(batch).logits,
                                      b.forward(batch).logits)
        c = init_model(variant, n_tasks=2, hidden_dim=8, seed=12)
        assert not np.array_equal(a.forward(batch).logits,
                                  c.forward(batch).logits)

    @pytest.mark.parametrize("variant", ["kagnn", "kagat"])
    def test_gradient_keys_match_parameters(self, variant, batch):
        model = init_model(variant, n_tasks=2, hidden_dim=8, seed=0)
        trace = model.forward(batch)
        _loss, d_logits = bce_loss_and_logit_grad(trace.probabilities,
                                                  batch.labels, batch.mask)
        grads = model.backward(trace, d_logits)
        param_names = {name for name, _ in model.parameters()}
        assert set(grads) == param_names
        for name, arr in model.parameters():
            assert grads[name].shape == arr.shape

    def test_readout_depth_default_by_task_count(self):
        single = KaGnnModel.init(n_tasks=1, hidden_dim=8, seed=0)
        multi = KaGnnModel.init(n_tasks=3, hidden_dim=8, seed=0)
        assert len(single.readout.layers) == 1
        assert len(multi.readout.layers) == 2

    def test_kagnn_residual_keeps_node_state_width(self, batch):
        model = KaGnnModel.init(n_tasks=2, n_layers=3, hidden_dim=8, seed=1)
        trace = model.forward(batch)
        assert trace.node_states[-1].shape == (batch.node_features.shape[0], 8)

    def test_parameter_count_equals_enumeration(self):
        for variant in ("kagnn", "kagat"):
            model = init_model(variant, n_tasks=3, n_harmonics=3, n_layers=2,
                               hidden_dim=8, seed=0)
            assert model.parameter_count() == sum(
                arr.size for _, arr in model.parameters())

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError, match="variant"):
            init_model("mlp", n_tasks=1)


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        mols = random_molecules(4, seed=5, n_tasks=2)
        batch = GraphBatch([build_graph(m) for m in mols])
        for variant in ("kagnn", "kagat"):
            model = init_model(variant, n_tasks=2, hidden_dim=8, seed=2)
            path = tmp_path / f"{variant}.json"
            save_checkpoint(path, model, cutoff=3.5)
            loaded, cutoff = load_checkpoint(path)
            assert cutoff == 3.5
            assert type(loaded) is type(model)
            np.testing.assert_array_equal(loaded.forward(batch).logits,
                                          model.forward(batch).logits)
            for (na, a), (nb, b) in zip(model.parameters(),
                                        loaded.parameters()):
                assert na == nb
                assert np.array_equal(a, b)

    def test_schema_field_checked(self):
        model = KaGnnModel.init(n_tasks=1, hidden_dim=4, seed=0)
        doc = model_to_checkpoint_dict(model)
        doc["schema"] = "other/9"
        with pytest.raises(ValueError, match="schema"):
            model_from_checkpoint_dict(doc)

    def test_checkpoint_records_structure(self):
        model = KaGatModel.init(n_tasks=2, n_harmonics=3, n_layers=2,
                                hidden_dim=8, seed=0)
        doc = model_to_checkpoint_dict(model, cutoff=2.0)
        assert doc["variant"] == "kagat"
        assert doc["n_harmonics"] == 3
        assert doc["n_layers"] == 2
        assert doc["hidden_dim"] == 8
        assert doc["cutoff"] == 2.0
