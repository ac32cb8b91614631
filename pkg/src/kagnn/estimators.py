"""scikit-learn style estimators over the numpy core.

* :class:`MolecularGraphFeaturizer` - transformer: Molecules in,
  featurized MolecularGraphs out.
* :class:`KaGnnClassifier` - graph classifier wrapping the training
  engine (fit / predict / predict_proba / get_params).
* :class:`FourierKanRegressor` / :class:`MlpRegressor` - the two
  one-dimensional function-fitting arms, full-batch Adam with learning
  rate halving on plateau.

Estimators follow sklearn conventions: constructor stores
hyperparameters untouched, ``fit`` validates and learns, learned state
lands in trailing-underscore attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .fourier import FourierKanLayer
from .graphs import MolecularGraph, build_graph
from .metrics import macro_roc_auc
from .models import GraphBatch, init_model
from .molecules import Molecule
from .optim import Adam
from .training import TrainConfig, fit_on_split
from .validation import (
    check_nonnegative_float,
    check_positive_int,
)

__all__ = [
    "FourierKanRegressor",
    "KaGnnClassifier",
    "MlpRegressor",
    "MolecularGraphFeaturizer",
]


def _as_column(x, name="x"):
    """Univariate samples as an [n, 1] float column."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != 1:
        raise ValueError(
            f"{name} must be 1-D or a single-column 2-D array, "
            f"got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(
            f"{type(est).__name__} is not fitted yet; call fit first"
        )


class MolecularGraphFeaturizer(TransformerMixin, BaseEstimator):
    """Turn Molecules into featurized MolecularGraphs.

    Stateless apart from hyperparameter validation; fit only checks the
    cutoff and remembers it in ``cutoff_``.
    """

    def __init__(self, cutoff=5.0):
        self.cutoff = cutoff

    def fit(self, X=None, y=None):
        self.cutoff_ = check_nonnegative_float(self.cutoff, "cutoff")
        return self

    def transform(self, X):
        _check_fitted(self, "cutoff_")
        graphs = []
        for i, mol in enumerate(X):
            if not isinstance(mol, Molecule):
                raise TypeError(
                    f"item {i} is {type(mol).__name__}, expected Molecule"
                )
            graphs.append(build_graph(mol, cutoff=self.cutoff_))
        return graphs


def _labels_from_y(graphs, y):
    """Replace graph labels with a user-supplied matrix; NaN = missing."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[0] != len(graphs):
        raise ValueError(f"y has {y.shape[0]} rows for {len(graphs)} graphs")
    bad = ~(np.isnan(y) | (y == 0) | (y == 1))
    if bad.any():
        raise ValueError("y entries must be 0, 1 or NaN (missing)")
    out = []
    for g, row in zip(graphs, y):
        mask = ~np.isnan(row)
        labels = np.where(mask, row, 0.0)
        out.append(MolecularGraph(node_features=g.node_features,
                                  edges=g.edges, labels=labels,
                                  mask=mask, mol_id=g.mol_id))
    return out


class KaGnnClassifier(ClassifierMixin, BaseEstimator):
    """Graph classifier over either model variant.

    ``fit`` accepts a list of MolecularGraphs (or raw Molecules, which
    are featurized with ``cutoff``) plus an optional label matrix ``y``
    of shape [n] or [n, n_tasks] with NaN for missing entries; without
    ``y`` the labels already on the graphs are used.  When
    ``early_stopping`` is set a seeded validation fraction is held out
    and the model rolls back to its best validation epoch.

    ``predict_proba`` returns the sklearn [n, 2] layout for single-task
    models and an [n, n_tasks] matrix of positive-class probabilities
    for multi-task ones.  ``score`` reports masked macro ROC-AUC (the
    project's metric) rather than accuracy.
    """

    def __init__(self, variant="kagnn", n_harmonics=2, n_layers=1,
                 hidden_dim=64, readout_depth=None, cutoff=5.0,
                 batch_size=128, learning_rate=1e-4, epochs=100,
                 early_stopping=True, validation_fraction=0.1, patience=50,
                 threads=1, seed=0):
        self.variant = variant
        self.n_harmonics = n_harmonics
        self.n_layers = n_layers
        self.hidden_dim = hidden_dim
        self.readout_depth = readout_depth
        self.cutoff = cutoff
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.early_stopping = early_stopping
        self.validation_fraction = validation_fraction
        self.patience = patience
        self.threads = threads
        self.seed = seed

    def _config(self):
        return TrainConfig(
            variant=self.variant, n_harmonics=self.n_harmonics,
            n_layers=self.n_layers, hidden_dim=self.hidden_dim,
            readout_depth=self.readout_depth, batch_size=self.batch_size,
            learning_rate=self.learning_rate, epochs=self.epochs,
            cutoff=self.cutoff, seed=self.seed, patience=self.patience,
            threads=self.threads,
        ).validate()

    def _as_graphs(self, X):
        items = list(X)
        if items and isinstance(items[0], Molecule):
            feat = MolecularGraphFeaturizer(cutoff=self.cutoff).fit()
            return feat.transform(items)
        for i, g in enumerate(items):
            if not isinstance(g, MolecularGraph):
                raise TypeError(
                    f"item {i} is {type(g).__name__}, expected MolecularGraph "
                    f"or Molecule"
                )
        return items

    def fit(self, X, y=None):
        config = self._config()
        graphs = self._as_graphs(X)
        if y is not None:
            graphs = _labels_from_y(graphs, y)
        if not graphs:
            raise ValueError("cannot fit on an empty dataset")
        n_tasks = graphs[0].n_tasks
        if n_tasks < 1:
            raise ValueError("graphs carry no labels and no y was given")

        indices = np.arange(len(graphs))
        if self.early_stopping and len(graphs) >= 5:
            frac = float(self.validation_fraction)
            if not 0.0 < frac < 1.0:
                raise ValueError(
                    f"validation_fraction must be in (0, 1), got {frac}"
                )
            rng = np.random.default_rng([config.seed, 2])
            perm = rng.permutation(indices)
            n_valid = max(1, int(round(frac * len(graphs))))
            valid_idx, train_idx = perm[:n_valid], perm[n_valid:]
        else:
            train_idx, valid_idx = indices, []

        model = init_model(config.variant, n_tasks=n_tasks,
                           n_harmonics=config.n_harmonics,
                           n_layers=config.n_layers,
                           hidden_dim=config.hidden_dim,
                           readout_depth=config.readout_depth,
                           seed=config.seed)
        outcome = fit_on_split(model, graphs, config, train_idx, valid_idx)
        self.model_ = model
        self.n_tasks_ = n_tasks
        self.classes_ = np.array([0, 1])
        self.history_ = outcome.epochs
        self.best_epoch_ = outcome.best_epoch
        self.best_valid_auc_ = outcome.best_valid_auc
        return self

    def _probabilities(self, X):
        _check_fitted(self, "model_")
        graphs = self._as_graphs(X)
        trace = self.model_.forward(GraphBatch(graphs))
        return trace.probabilities

    def predict_proba(self, X):
        probs = self._probabilities(X)
        if self.n_tasks_ == 1:
            p1 = probs[:, 0]
            return np.column_stack([1.0 - p1, p1])
        return probs

    def predict(self, X):
        probs = self._probabilities(X)
        labels = (probs >= 0.5).astype(int)
        return labels[:, 0] if self.n_tasks_ == 1 else labels

    def score(self, X, y=None):
        """Masked macro ROC-AUC on X (y as in fit; default graph labels)."""
        graphs = self._as_graphs(X)
        if y is not None:
            graphs = _labels_from_y(graphs, y)
        probs = self._probabilities(graphs)
        batch = GraphBatch(graphs)
        macro, _ = macro_roc_auc(probs, batch.labels, batch.mask.astype(bool))
        return macro


# --- univariate fitting arms ------------------------------------------------

class _PlateauLr:
    """Halve the learning rate when best loss stalls for ``patience`` steps."""

    def __init__(self, lr, patience=250, factor=0.5, min_lr=1e-6,
                 rel_improvement=1e-12):
        self.lr = lr
        self.patience = patience
        self.factor = factor
        self.min_lr = min_lr
        self.rel_improvement = rel_improvement
        self.best = np.inf
        self.since = 0

    def update(self, loss):
        if loss < self.best * (1.0 - self.rel_improvement):
            self.best = loss
            self.since = 0
        else:
            self.since += 1
            if self.since >= self.patience:
                self.lr = max(self.lr * self.factor, self.min_lr)
                self.since = 0
        return self.lr


class _FullBatchKanTrainer:
    """Full-batch MSE trainer for a 1 -> 1 FourierKanLayer.

    The sample points never change, so the cos/sin design matrices are
    built once; each step is then two matvecs plus the Adam update.
    ``step_reference`` computes the same update through the layer's own
    forward/backward so tests can assert the cached path is identical.
    """

    def __init__(self, layer: FourierKanLayer, x, y):
        if layer.n_in != 1 or layer.n_out != 1 or layer.bias is None:
            raise ValueError("trainer expects a biased 1 -> 1 layer")
        self.layer = layer
        self.x = _as_column(x, name="x")
        self.y = np.asarray(y, dtype=np.float64).reshape(-1)
        if self.y.shape[0] != self.x.shape[0]:
            raise ValueError("x and y length mismatch")
        k = np.arange(1, layer.n_harmonics + 1, dtype=np.float64)
        angles = self.x * k[None, :]                  # [n, K]
        self.cos_basis = np.cos(angles)
        self.sin_basis = np.sin(angles)
        self.n = self.x.shape[0]

    def predict_train(self):
        a = self.layer.cos_coef[:, 0, 0]
        b = self.layer.sin_coef[:, 0, 0]
        return self.cos_basis @ a + self.sin_basis @ b + self.layer.bias[0]

    def loss_and_grads(self):
        """Train MSE and its gradients in the layer's parameter shapes."""
        residual = self.predict_train() - self.y
        mse = float(residual @ residual) / self.n
        upstream = (2.0 / self.n) * residual          # d mse / d prediction
        d_cos = (self.cos_basis.T @ upstream).reshape(self.layer.cos_coef.shape)
        d_sin = (self.sin_basis.T @ upstream).reshape(self.layer.sin_coef.shape)
        d_bias = np.array([upstream.sum()])
        return mse, {"cos_coef": d_cos, "sin_coef": d_sin, "bias": d_bias}

    def loss_and_grads_reference(self):
        """Same quantities through layer.forward / layer.backward."""
        pred = self.layer.forward(self.x)[:, 0]
        residual = pred - self.y
        mse = float(residual @ residual) / self.n
        upstream = ((2.0 / self.n) * residual)[:, None]
        grads = self.layer.backward(self.x, upstream)
        return mse, {"cos_coef": grads.d_cos, "sin_coef": grads.d_sin,
                     "bias": grads.d_bias}


def _fit_full_batch(params, loss_and_grads, steps, learning_rate,
                    plateau_patience, min_learning_rate):
    """Shared Adam-with-plateau driver; returns per-step train losses."""
    schedule = _PlateauLr(learning_rate, patience=plateau_patience,
                          min_lr=min_learning_rate)
    adam = Adam(learning_rate=learning_rate)
    losses = []
    for _ in range(steps):
        loss, grads = loss_and_grads()
        losses.append(loss)
        adam.learning_rate = schedule.update(loss)
        adam.step(params, grads)
    return losses


class FourierKanRegressor(RegressorMixin, BaseEstimator):
    """One-layer Fourier KAN (1 -> 1, bias) fit by full-batch Adam."""

    def __init__(self, n_harmonics=10, steps=5000, learning_rate=1e-2,
                 plateau_patience=250, min_learning_rate=1e-6, seed=0):
        self.n_harmonics = n_harmonics
        self.steps = steps
        self.learning_rate = learning_rate
        self.plateau_patience = plateau_patience
        self.min_learning_rate = min_learning_rate
        self.seed = seed

    def fit(self, X, y):
        check_positive_int(self.n_harmonics, "n_harmonics")
        layer = FourierKanLayer.init(1, 1, self.n_harmonics, seed=self.seed,
                                     with_bias=True)
        trainer = _FullBatchKanTrainer(layer, X, y)
        params = dict(layer.parameters())
        losses = _fit_full_batch(params, trainer.loss_and_grads, self.steps,
                                 self.learning_rate, self.plateau_patience,
                                 self.min_learning_rate)
        self.layer_ = layer
        self.train_mse_ = trainer.loss_and_grads()[0]
        self.loss_history_ = losses
        self.steps_run_ = len(losses)
        return self

    def predict(self, X):
        _check_fitted(self, "layer_")
        X = _as_column(X, name="X")
        return self.layer_.forward(X)[:, 0]

    def parameter_count(self):
        _check_fitted(self, "layer_")
        return self.layer_.parameter_count()


class MlpRegressor(RegressorMixin, BaseEstimator):
    """1 -> hidden -> 1 tanh MLP baseline, same optimizer and budget.

    Hidden biases are initialized so each unit's bend sits at a random
    training input, which spreads the knots over the data range.
    """

    def __init__(self, hidden_dim=64, steps=5000, learning_rate=1e-2,
                 plateau_patience=250, min_learning_rate=1e-6, seed=0):
        self.hidden_dim = hidden_dim
        self.steps = steps
        self.learning_rate = learning_rate
        self.plateau_patience = plateau_patience
        self.min_learning_rate = min_learning_rate
        self.seed = seed

    def fit(self, X, y):
        check_positive_int(self.hidden_dim, "hidden_dim")
        X = _as_column(X, name="X")
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y length mismatch")
        rng = np.random.default_rng(self.seed)
        h = self.hidden_dim
        w1 = rng.normal(0.0, 1.0, size=(h, 1))
        knots = rng.uniform(X.min(), X.max(), size=h)
        b1 = -w1[:, 0] * knots
        w2 = rng.normal(0.0, 1.0 / np.sqrt(h), size=(1, h))
        b2 = np.zeros(1)
        params = {"w1": w1, "b1": b1, "w2": w2, "b2": b2}
        n = X.shape[0]

        def loss_and_grads():
            a = X @ w1.T + b1
            t = np.tanh(a)
            pred = (t @ w2.T + b2)[:, 0]
            residual = pred - y
            mse = float(residual @ residual) / n
            up = ((2.0 / n) * residual)[:, None]
            d_w2 = up.T @ t
            d_b2 = up.sum(axis=0)
            d_t = up @ w2
            d_a = d_t * (1.0 - t * t)
            d_w1 = d_a.T @ X
            d_b1 = d_a.sum(axis=0)
            return mse, {"w1": d_w1, "b1": d_b1, "w2": d_w2, "b2": d_b2}

        losses = _fit_full_batch(params, loss_and_grads, self.steps,
                                 self.learning_rate, self.plateau_patience,
                                 self.min_learning_rate)
        self.weights_ = params
        self.train_mse_ = loss_and_grads()[0]
        self.loss_history_ = losses
        self.steps_run_ = len(losses)
        return self

    def predict(self, X):
        _check_fitted(self, "weights_")
        X = _as_column(X, name="X")
        w = self.weights_
        return (np.tanh(X @ w["w1"].T + w["b1"]) @ w["w2"].T + w["b2"])[:, 0]

    def parameter_count(self):
        _check_fitted(self, "weights_")
        return sum(a.size for a in self.weights_.values())
