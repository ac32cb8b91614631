"""Finite-difference verification of every analytic gradient.

The layer suite draws random small layers and batches, computes a scalar
probe loss L = sum(upstream * forward(x)) whose parameter gradients are
exactly what ``backward`` returns, and compares against central
differences.  The model suites do the same with the real masked BCE loss
on a batch of small random molecules, touching every parameter of both
model variants.

Relative error uses |analytic - numeric| / max(|analytic|, |numeric|,
1e-8), so zero-gradient entries compare absolutely at 1e-8 scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GradientCheckError
from .fourier import FourierKanLayer
from .graphs import build_graph
from .models import GraphBatch, bce_loss_and_logit_grad, init_model
from .synthetic import random_molecules

__all__ = [
    "GroupResult",
    "LAYER_TOL",
    "MODEL_TOL",
    "check_layer_gradients",
    "check_model_gradients",
    "finite_difference_grad",
    "relative_error",
    "run_gradcheck",
]

LAYER_TOL = 1e-6
MODEL_TOL = 1e-5


@dataclass
class GroupResult:
    group: str
    max_rel_err: float
    tol: float
    n_entries: int

    @property
    def ok(self):
        return self.max_rel_err < self.tol


def relative_error(analytic, numeric):
    analytic = np.asarray(analytic, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return np.abs(analytic - numeric) / denom


def finite_difference_grad(loss_fn, array, step=1e-5):
    """Central-difference gradient of ``loss_fn()`` w.r.t. every entry of
    ``array`` (perturbed in place and restored)."""
    flat = array.ravel()
    grad = np.empty_like(flat)
    for idx in range(flat.size):
        orig = flat[idx]
        flat[idx] = orig + step
        up = loss_fn()
        flat[idx] = orig - step
        down = loss_fn()
        flat[idx] = orig
        grad[idx] = (up - down) / (2.0 * step)
    return grad.reshape(array.shape)


def _merge(results, group, analytic, numeric, tol):
    err = float(relative_error(analytic, numeric).max()) if analytic.size else 0.0
    if group in results:
        prev = results[group]
        results[group] = GroupResult(group, max(prev.max_rel_err, err), tol,
                                     prev.n_entries + analytic.size)
    else:
        results[group] = GroupResult(group, err, tol, analytic.size)


def check_layer_gradients(n_cases=100, seed=0, step=1e-5, tol=LAYER_TOL):
    """Random-layer FD suite; returns one GroupResult per gradient kind."""
    rng = np.random.default_rng(seed)
    results: dict[str, GroupResult] = {}
    for case in range(n_cases):
        n_in = int(rng.integers(1, 6))
        n_out = int(rng.integers(1, 6))
        n_harmonics = int(rng.integers(1, 5))
        batch = int(rng.integers(1, 7))
        with_bias = bool(rng.integers(2))
        layer = FourierKanLayer.init(n_in, n_out, n_harmonics,
                                     seed=rng, with_bias=with_bias)
        x = rng.normal(scale=2.0, size=(batch, n_in))
        upstream = rng.normal(size=(batch, n_out))
        grads = layer.backward(x, upstream)

        def probe_loss():
            return float((upstream * layer.forward(x)).sum())

        _merge(results, "fkan.d_cos", grads.d_cos,
               finite_difference_grad(probe_loss, layer.cos_coef, step), tol)
        _merge(results, "fkan.d_sin", grads.d_sin,
               finite_difference_grad(probe_loss, layer.sin_coef, step), tol)
        if with_bias:
            _merge(results, "fkan.d_bias", grads.d_bias,
                   finite_difference_grad(probe_loss, layer.bias, step), tol)
        _merge(results, "fkan.d_input", grads.d_input,
               finite_difference_grad(probe_loss, x, step), tol)
    return list(results.values())


def check_model_gradients(variant, n_graphs=10, seed=0, step=1e-5,
                          tol=MODEL_TOL, n_harmonics=2, n_layers=2,
                          hidden_dim=4, n_tasks=2, corrupt=False):
    """Exhaustive FD over every parameter of a small end-to-end model.

    ``corrupt`` is a negative-control hook: it perturbs one analytic
    gradient entry so the check must fail.
    """
    mols = random_molecules(n_molecules=n_graphs, seed=seed, n_tasks=n_tasks,
                            n_atoms_range=(3, 6))
    batch = GraphBatch([build_graph(m, cutoff=4.0) for m in mols])
    model = init_model(variant, n_tasks=n_tasks, n_harmonics=n_harmonics,
                       n_layers=n_layers, hidden_dim=hidden_dim, seed=seed)
    trace = model.forward(batch)
    _, d_logits = bce_loss_and_logit_grad(trace.probabilities, batch.labels,
                                          batch.mask)
    analytic = model.backward(trace, d_logits)
    if corrupt:
        first = sorted(analytic)[0]
        analytic[first] = analytic[first] + 10.0

    def loss_fn():
        tr = model.forward(batch)
        loss, _ = bce_loss_and_logit_grad(tr.probabilities, batch.labels,
                                          batch.mask)
        return loss

    results: dict[str, GroupResult] = {}
    for name, arr in model.parameters():
        numeric = finite_difference_grad(loss_fn, arr, step)
        # Aggregate per component so the report stays readable:
        # "mp_layers.0.cos_coef" -> "kagnn.mp_layers.cos_coef".
        parts = name.split(".")
        group = ".".join(p for p in parts if not p.isdigit())
        _merge(results, f"{variant}.{group}", analytic[name], numeric, tol)
    return list(results.values())


def run_gradcheck(seed=0, variants=("kagnn", "kagat"), n_cases=100,
                  n_graphs=10, corrupt=False):
    """Full suite; returns (results, all_ok)."""
    results = check_layer_gradients(n_cases=n_cases, seed=seed)
    for variant in variants:
        results.extend(check_model_gradients(variant, n_graphs=n_graphs,
                                             seed=seed, corrupt=corrupt))
    return results, all(r.ok for r in results)


def assert_gradients_ok(results):
    bad = [r for r in results if not r.ok]
    if bad:
        worst = max(bad, key=lambda r: r.max_rel_err)
        raise GradientCheckError(
            f"{len(bad)} gradient group(s) out of tolerance; worst "
            f"{worst.group}: {worst.max_rel_err:.3e} >= {worst.tol:g}"
        )
