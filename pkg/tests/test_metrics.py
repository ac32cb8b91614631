"""ROC-AUC against an exhaustive pairwise-counting oracle."""

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kagnn.errors import EvaluationError
from kagnn.metrics import macro_roc_auc, roc_auc_binary


def pairwise_auc(scores, labels):
    """Count concordant positive/negative pairs; ties score one half."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def test_frozen_small_example():
    labels = np.array([0, 1, 1, 0])
    scores = np.array([0.1, 0.4, 0.35, 0.8])
    assert roc_auc_binary(scores, labels) == 0.5


def test_perfect_and_inverted_rankings():
    labels = np.array([0, 0, 1, 1])
    assert roc_auc_binary(np.array([0.1, 0.2, 0.8, 0.9]), labels) == 1.0
    assert roc_auc_binary(np.array([0.9, 0.8, 0.2, 0.1]), labels) == 0.0


def test_all_tied_scores_give_half():
    labels = np.array([0, 1, 0, 1, 1])
    assert roc_auc_binary(np.full(5, 0.5), labels) == 0.5


def test_matches_pairwise_oracle_on_large_tied_sample():
    rng = np.random.default_rng(12)
    n = 1000
    labels = (rng.random(n) < 0.3).astype(int)
    # quantized scores force many exact ties
    scores = np.round(rng.random(n), 2)
    got = roc_auc_binary(scores, labels)
    want = pairwise_auc(scores, labels)
    assert got == pytest.approx(want, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 40), st.integers(1, 6))
def test_matches_oracle_property(seed, n, levels):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n)
    if labels.min() == labels.max():
        labels[0] = 1 - labels[0]
    scores = rng.integers(0, levels, size=n).astype(float)
    assert roc_auc_binary(scores, labels) == pytest.approx(
        pairwise_auc(scores, labels), abs=1e-12)


def test_invariant_under_strictly_monotone_transforms():
    rng = np.random.default_rng(3)
    labels = rng.integers(0, 2, size=200)
    labels[:2] = [0, 1]
    scores = rng.normal(size=200)
    base = roc_auc_binary(scores, labels)
    for transform in (lambda s: 2.0 * s + 5.0, np.exp,
                      lambda s: np.tanh(s / 3.0)):
        assert roc_auc_binary(transform(scores), labels) == base


def test_single_class_rejected():
    with pytest.raises(EvaluationError, match="class"):
        roc_auc_binary(np.array([0.1, 0.9]), np.array([1, 1]))


def test_non_binary_labels_rejected():
    with pytest.raises(ValueError):
        roc_auc_binary(np.array([0.1, 0.9]), np.array([0, 2]))


class TestMacro:
    def test_mean_over_tasks(self):
        scores = np.array([[0.1, 0.9], [0.9, 0.1], [0.2, 0.8], [0.8, 0.2]])
        labels = np.array([[0, 1], [1, 0], [0, 1], [1, 0]])
        macro, per_task = macro_roc_auc(scores, labels)
        assert per_task == [1.0, 1.0]
        assert macro == 1.0

    def test_mask_removes_entries(self):
        scores = np.array([[0.9], [0.8], [0.1], [0.2]])
        labels = np.array([[1], [0], [0], [1]])
        full, _ = macro_roc_auc(scores, labels)
        assert full == 0.75
        # masking the two mistakes leaves a perfect ranking
        mask = np.array([[True], [False], [True], [False]])
        masked, per_task = macro_roc_auc(scores, labels, mask)
        assert masked == 1.0 and per_task == [1.0]

    def test_single_class_task_skipped_with_warning(self):
        scores = np.array([[0.1, 0.9], [0.9, 0.1], [0.4, 0.6]])
        labels = np.array([[1, 1], [1, 0], [1, 1]])
        with pytest.warns(UserWarning, match="task 0"):
            macro, per_task = macro_roc_auc(scores, labels)
        assert per_task[0] is None
        assert per_task[1] is not None
        assert macro == per_task[1]

    def test_all_tasks_skipped_is_an_error(self):
        scores = np.array([[0.1], [0.2]])
        labels = np.array([[1], [1]])
        with pytest.raises(EvaluationError), warnings.catch_warnings():
            warnings.simplefilter("ignore")
            macro_roc_auc(scores, labels)

    def test_fully_masked_task_skipped(self):
        scores = np.array([[0.1, 0.5], [0.9, 0.5]])
        labels = np.array([[0, 1], [1, 0]])
        mask = np.array([[True, False], [True, False]])
        with pytest.warns(UserWarning):
            macro, per_task = macro_roc_auc(scores, labels, mask)
        assert per_task == [1.0, None]
        assert macro == 1.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            macro_roc_auc(np.zeros((3, 2)), np.zeros((3, 3)))
