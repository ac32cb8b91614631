"""Minibatch training loop with validation-based checkpointing.

The loop shuffles the training indices each epoch with a seeded
generator, runs forward/backward/Adam per minibatch, evaluates masked
macro ROC-AUC on the validation fold after each epoch, keeps the
parameters of the best validation epoch, and stops early after
``patience`` epochs without improvement.  ``epochs = 0`` skips straight
to evaluating the untrained model.

Gradients of a batch are the per-graph mean of the summed BCE loss, so
reported train losses are per-graph means and comparable across batch
sizes.  With ``threads > 1`` a batch is split into contiguous chunks
whose gradients are computed concurrently and summed in chunk order, so
results stay deterministic for a fixed thread count.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import EvaluationError, TrainingDivergedError
from .metrics import macro_roc_auc
from .models import (
    GraphBatch,
    bce_loss_and_logit_grad,
    init_model,
)
from .optim import Adam
from .splits import SplitSpec
from .validation import (
    check_nonnegative_int,
    check_positive_float,
    check_positive_int,
    check_unit_interval,
)

__all__ = [
    "EpochRecord",
    "RunReport",
    "TrainConfig",
    "evaluate_model",
    "fit_on_split",
    "train_loop",
]

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    """Hyperparameters for one training run."""

    variant: str = "kagnn"
    n_harmonics: int = 2
    n_layers: int = 1
    hidden_dim: int = 64
    readout_depth: int | None = None
    batch_size: int = 128
    learning_rate: float = 1e-4
    epochs: int = 100
    cutoff: float = 5.0
    seed: int = 0
    patience: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    threads: int = 1

    def validate(self):
        if self.variant not in ("kagnn", "kagat"):
            raise ValueError(
                f"variant must be 'kagnn' or 'kagat', got {self.variant!r}"
            )
        check_positive_int(self.n_harmonics, "n_harmonics")
        check_positive_int(self.n_layers, "n_layers")
        check_positive_int(self.hidden_dim, "hidden_dim")
        if self.readout_depth is not None:
            check_positive_int(self.readout_depth, "readout_depth")
        check_positive_int(self.batch_size, "batch_size")
        check_positive_float(self.learning_rate, "learning_rate")
        check_nonnegative_int(self.epochs, "epochs")
        if self.cutoff < 0 or not np.isfinite(self.cutoff):
            raise ValueError(f"cutoff must be >= 0, got {self.cutoff}")
        check_nonnegative_int(self.seed, "seed")
        check_positive_int(self.patience, "patience")
        check_unit_interval(self.beta1, "beta1")
        check_unit_interval(self.beta2, "beta2")
        check_positive_float(self.eps, "eps")
        check_positive_int(self.threads, "threads")
        return self

    def to_json_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_json_dict(cls, doc):
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc).validate()

    def with_overrides(self, **overrides):
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **clean).validate()


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    valid_auc: float | None


@dataclass
class RunReport:
    """Everything a run produced except wall-clock metadata (kept apart
    so report JSON is byte-deterministic for a fixed seed)."""

    config: TrainConfig
    n_molecules: int
    n_tasks: int
    parameter_count: int
    split_sizes: tuple[int, int, int]
    split_provenance: str
    edge_counts: dict
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int | None = None
    best_valid_auc: float | None = None
    stopped_early: bool = False
    test_auc: float | None = None
    test_per_task: list = field(default_factory=list)

    def to_json_dict(self):
        return {
            "config": self.config.to_json_dict(),
            "n_molecules": self.n_molecules,
            "n_tasks": self.n_tasks,
            "parameter_count": self.parameter_count,
            "split_sizes": {"train": self.split_sizes[0],
                            "valid": self.split_sizes[1],
                            "test": self.split_sizes[2]},
            "split_provenance": self.split_provenance,
            "edge_counts": self.edge_counts,
            "epochs": [
                {"epoch": r.epoch, "train_loss": r.train_loss,
                 "valid_auc": r.valid_auc}
                for r in self.epochs
            ],
            "best_epoch": self.best_epoch,
            "best_valid_auc": self.best_valid_auc,
            "stopped_early": self.stopped_early,
            "test_auc": self.test_auc,
            "test_per_task": self.test_per_task,
        }


def _dataset_n_tasks(graphs):
    if not graphs:
        raise ValueError("dataset is empty")
    n_tasks = graphs[0].n_tasks
    for g in graphs:
        if g.n_tasks != n_tasks:
            raise ValueError(
                f"graph {g.mol_id!r} has {g.n_tasks} tasks, expected {n_tasks}"
            )
    if n_tasks < 1:
        raise ValueError("dataset graphs carry no labels")
    return n_tasks


def _forward_backward(model, graphs):
    """(summed loss, gradient dict, n_graphs) for one chunk."""
    batch = GraphBatch(graphs)
    trace = model.forward(batch)
    loss, d_logits = bce_loss_and_logit_grad(trace.probabilities,
                                             batch.labels, batch.mask)
    grads = model.backward(trace, d_logits)
    return loss, grads


def _batch_loss_and_grads(model, graphs, threads=1):
    """Loss summed over graphs plus summed gradients, optionally
    computed over contiguous chunks in a thread pool.  Chunk results
    are reduced in chunk order so a fixed thread count is deterministic."""
    if threads <= 1 or len(graphs) < 2 * threads:
        return _forward_backward(model, graphs)
    chunks = [list(c) for c in np.array_split(np.arange(len(graphs)), threads)
              if len(c)]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        results = list(pool.map(
            lambda idx: _forward_backward(model, [graphs[i] for i in idx]),
            chunks))
    loss = 0.0
    grads = None
    for chunk_loss, chunk_grads in results:
        loss += chunk_loss
        if grads is None:
            grads = chunk_grads
        else:
            for name in grads:
                grads[name] += chunk_grads[name]
    return loss, grads


def evaluate_model(model, graphs, threads=1):
    """Masked macro ROC-AUC of a model on a list of graphs.

    Returns (macro_auc, per_task).  Raises EvaluationError when no task
    has both classes under the mask.
    """
    if not graphs:
        raise EvaluationError("cannot evaluate on an empty graph list")
    batch = GraphBatch(graphs)
    trace = model.forward(batch)
    return macro_roc_auc(trace.probabilities, batch.labels,
                         batch.mask.astype(bool))


@dataclass
class FitOutcome:
    epochs: list[EpochRecord]
    best_epoch: int | None
    best_valid_auc: float | None
    stopped_early: bool


def fit_on_split(model, graphs, config, train_idx, valid_idx=None):
    """Train ``model`` in place on graphs[train_idx].

    When a validation fold is given the model ends at its best-AUC
    parameters and early stopping is active; otherwise it ends at the
    final epoch.  Raises TrainingDivergedError on non-finite loss or
    gradients, naming the epoch and batch.
    """
    config.validate()
    train_idx = [int(i) for i in train_idx]
    valid_idx = [int(i) for i in (valid_idx if valid_idx is not None else [])]
    if not train_idx and config.epochs > 0:
        raise ValueError("training fold is empty")
    params = dict(model.parameters())
    adam = Adam(learning_rate=config.learning_rate, beta1=config.beta1,
                beta2=config.beta2, eps=config.eps)
    shuffle_rng = np.random.default_rng([config.seed, 1])
    valid_graphs = [graphs[i] for i in valid_idx]

    best_auc = -np.inf
    best_params = None
    best_epoch = None
    since_best = 0
    stopped_early = False
    records: list[EpochRecord] = []

    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(len(train_idx))
        total_loss = 0.0
        for b_start in range(0, len(order), config.batch_size):
            chunk = [train_idx[i]
                     for i in order[b_start:b_start + config.batch_size]]
            batch_graphs = [graphs[i] for i in chunk]
            if not any(g.mask.any() for g in batch_graphs):
                log.debug("epoch %d: batch at offset %d has no labels, "
                          "skipping update", epoch, b_start)
                continue
            try:
                loss, grads = _batch_loss_and_grads(model, batch_graphs,
                                                    config.threads)
            except TrainingDivergedError as exc:
                raise TrainingDivergedError(
                    f"epoch {epoch}, batch {b_start // config.batch_size}: {exc}",
                    epoch=epoch, batch=b_start // config.batch_size)
            except ValueError as exc:
                # layer input validation tripping on non-finite hidden
                # states mid-run means the parameters have diverged
                if "non-finite" not in str(exc):
                    raise
                raise TrainingDivergedError(
                    f"epoch {epoch}, batch {b_start // config.batch_size}: {exc}",
                    epoch=epoch, batch=b_start // config.batch_size)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, "
                    f"batch {b_start // config.batch_size}",
                    epoch=epoch, batch=b_start // config.batch_size)
            scale = 1.0 / len(batch_graphs)
            for name in grads:
                grads[name] *= scale
            try:
                adam.step(params, grads)
            except TrainingDivergedError as exc:
                raise TrainingDivergedError(
                    f"epoch {epoch}, batch {b_start // config.batch_size}: {exc}",
                    epoch=epoch, batch=b_start // config.batch_size)
            total_loss += loss

        train_loss = total_loss / max(len(train_idx), 1)
        valid_auc = None
        if valid_graphs:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                try:
                    valid_auc, _ = evaluate_model(model, valid_graphs)
                except EvaluationError:
                    valid_auc = None
        records.append(EpochRecord(epoch=epoch, train_loss=train_loss,
                                   valid_auc=valid_auc))
        if valid_auc is not None and valid_auc > best_auc:
            best_auc = valid_auc
            best_params = {k: v.copy() for k, v in params.items()}
            best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
            if valid_graphs and since_best >= config.patience:
                stopped_early = True
                break

    if best_params is not None:
        for name, arr in params.items():
            arr[...] = best_params[name]
    elif records:
        best_epoch = records[-1].epoch
    return FitOutcome(
        epochs=records,
        best_epoch=best_epoch,
        best_valid_auc=None if best_auc == -np.inf else float(best_auc),
        stopped_early=stopped_early,
    )


def train_loop(graphs, config: TrainConfig, split: SplitSpec):
    """Full run: init model, fit on the split, evaluate on the test fold.

    Returns (RunReport, model).
    """
    config.validate()
    split.validate(len(graphs))
    n_tasks = _dataset_n_tasks(graphs)
    model = init_model(config.variant, n_tasks=n_tasks,
                       n_harmonics=config.n_harmonics,
                       n_layers=config.n_layers,
                       hidden_dim=config.hidden_dim,
                       readout_depth=config.readout_depth,
                       seed=config.seed)
    outcome = fit_on_split(model, graphs, config, split.train, split.valid)
    test_auc = None
    test_per_task: list = []
    if split.test:
        test_auc, test_per_task = evaluate_model(
            model, [graphs[i] for i in split.test])
    cov = sum(g.edge_counts()[0] for g in graphs)
    cut = sum(g.edge_counts()[1] for g in graphs)
    report = RunReport(
        config=config,
        n_molecules=len(graphs),
        n_tasks=n_tasks,
        parameter_count=model.parameter_count(),
        split_sizes=split.sizes(),
        split_provenance=split.provenance,
        edge_counts={"covalent": cov, "cutoff": cut},
        epochs=outcome.epochs,
        best_epoch=outcome.best_epoch,
        best_valid_auc=outcome.best_valid_auc,
        stopped_early=outcome.stopped_early,
        test_auc=test_auc,
        test_per_task=test_per_task,
    )
    return report, model
