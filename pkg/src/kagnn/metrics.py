"""Ranking metrics.

ROC-AUC is computed by the average-rank (Mann-Whitney) formula: rank all
scores with ties sharing their average rank, then

    auc = (sum of positive ranks - n_pos*(n_pos+1)/2) / (n_pos * n_neg)

which counts correctly ordered positive/negative pairs with ties worth
one half.  The multi-task wrapper averages over tasks, skipping (with a
warning) any task whose unmasked labels are single-class.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import EvaluationError
from .validation import as_float_matrix, as_float_vector

__all__ = ["macro_roc_auc", "roc_auc_binary"]


def _average_ranks(x):
    # 1-based ranks; tied values share the average of their rank range.
    _, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    upper = np.cumsum(counts)
    return upper[inverse] - (counts[inverse] - 1) / 2.0


def roc_auc_binary(scores, labels):
    """AUC for one task; labels must contain both classes."""
    scores = as_float_vector(scores, name="scores")
    labels = np.asarray(labels)
    if labels.shape != scores.shape:
        raise ValueError(
            f"labels shape {labels.shape} != scores shape {scores.shape}"
        )
    pos = labels == 1
    neg = labels == 0
    n_pos = int(pos.sum())
    n_neg = int(neg.sum())
    if n_pos + n_neg != labels.size:
        raise ValueError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError(
            f"roc_auc needs both classes, got {n_pos} positive / {n_neg} negative"
        )
    ranks = _average_ranks(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def macro_roc_auc(scores, labels, mask=None):
    """Masked macro-average AUC over tasks.

    scores, labels: [n, n_tasks] (or 1-D for a single task); mask marks
    which (instance, task) labels exist.  Single-class tasks are skipped
    with a warning and reported as None; if every task is skipped there
    is no metric and EvaluationError is raised.

    Returns (macro_auc, per_task) where per_task is a list with one
    float-or-None entry per task.
    """
    scores = as_float_matrix(np.asarray(scores, dtype=float).reshape(
        (-1, 1)) if np.ndim(scores) == 1 else scores, name="scores")
    labels = np.asarray(labels, dtype=float)
    if labels.ndim == 1:
        labels = labels[:, None]
    if labels.shape != scores.shape:
        raise ValueError(
            f"labels shape {labels.shape} != scores shape {scores.shape}"
        )
    if mask is None:
        mask = np.ones_like(labels, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != labels.shape:
            raise ValueError(
                f"mask shape {mask.shape} != labels shape {labels.shape}"
            )
    per_task: list[float | None] = []
    for t in range(scores.shape[1]):
        keep = mask[:, t]
        task_labels = labels[keep, t]
        if keep.sum() == 0 or len(np.unique(task_labels)) < 2:
            warnings.warn(
                f"task {t} skipped in macro ROC-AUC: single-class or empty "
                f"under the mask",
                stacklevel=2,
            )
            per_task.append(None)
            continue
        per_task.append(roc_auc_binary(scores[keep, t], task_labels))
    kept = [a for a in per_task if a is not None]
    if not kept:
        raise EvaluationError(
            "macro ROC-AUC undefined: every task is single-class or empty "
            "under the mask"
        )
    return float(np.mean(kept)), per_task
