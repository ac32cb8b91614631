"""Univariate function-fitting harness: one-layer Fourier KAN vs. a
small MLP on six frozen scalar targets.

The target formulas and domains are this project's concrete
instantiations (the reference plots never state them)::

    logarithmic   ln(x)              on [0.1, 4],   K = 100
    sin_plus_cos  sin(2x) + cos(3x)  on [0, 2*pi],  K = 10
    linear        2x - 1             on [0, 4],     K = 200
    sin           sin(x)             on [0, 2*pi],  K = 10
    polynomial    x^3 - 2x^2 + x     on [-2, 2],    K = 500
    exponential   e^x                on [0, 2],     K = 120

The linear target lives on [0, 4] rather than a full 2*pi period: on a
full period the truncated-Fourier L2 floor (~8/K from the boundary jump
of the periodic extension) sits above any useful threshold, while on a
sub-period window the least-squares fit converges fast.

Training points are sampled uniformly at random from the domain (seeded);
test MSE is measured against the clean target on a uniform 2001-point
grid.  Both arms train with full-batch Adam, lr 1e-2 halving on plateau,
5000 steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np

from .estimators import FourierKanRegressor, MlpRegressor
from .validation import check_nonnegative_float, check_positive_int

__all__ = [
    "FitResult",
    "FitTask",
    "TARGETS",
    "TargetSpec",
    "make_task",
    "run_fit",
    "sweep_k",
]


@dataclass(frozen=True)
class TargetSpec:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float]
    default_harmonics: int


TARGETS: dict[str, TargetSpec] = {
    spec.name: spec
    for spec in (
        TargetSpec("logarithmic", np.log, (0.1, 4.0), 100),
        TargetSpec("sin_plus_cos",
                   lambda x: np.sin(2 * x) + np.cos(3 * x),
                   (0.0, 2 * np.pi), 10),
        TargetSpec("linear", lambda x: 2 * x - 1, (0.0, 4.0), 200),
        TargetSpec("sin", np.sin, (0.0, 2 * np.pi), 10),
        TargetSpec("polynomial", lambda x: x ** 3 - 2 * x ** 2 + x,
                   (-2.0, 2.0), 500),
        TargetSpec("exponential", np.exp, (0.0, 2.0), 120),
    )
}

_TRAIN_BUDGET_STEPS = 5000
_TEST_GRID_SIZE = 2001


@dataclass
class FitTask:
    """One fitting problem: a target, its sampling, and arm widths."""

    target: str
    n_harmonics: int
    n_samples: int
    mlp_hidden: int = 64
    noise_std: float = 0.0

    def validate(self):
        if self.target not in TARGETS:
            raise ValueError(
                f"unknown target {self.target!r}, expected one of "
                f"{sorted(TARGETS)}"
            )
        check_positive_int(self.n_harmonics, "n_harmonics")
        check_positive_int(self.n_samples, "n_samples")
        if self.n_samples < 16:
            raise ValueError(f"n_samples must be >= 16, got {self.n_samples}")
        check_positive_int(self.mlp_hidden, "mlp_hidden")
        check_nonnegative_float(self.noise_std, "noise_std")
        lo, hi = TARGETS[self.target].domain
        if not lo < hi:
            raise ValueError(f"empty domain {TARGETS[self.target].domain}")
        return self

    @property
    def domain(self):
        return TARGETS[self.target].domain

    def sample(self, seed):
        """Seeded uniform training sample (x [n, 1], y [n])."""
        self.validate()
        spec = TARGETS[self.target]
        rng = np.random.default_rng([seed, 3])
        x = rng.uniform(*spec.domain, size=self.n_samples)
        y = spec.fn(x)
        if self.noise_std > 0:
            y = y + rng.normal(0.0, self.noise_std, size=y.shape)
        return x[:, None], y

    def test_grid(self):
        spec = TARGETS[self.target]
        x = np.linspace(*spec.domain, _TEST_GRID_SIZE)
        return x[:, None], spec.fn(x)


def make_task(target, n_harmonics=None, n_samples=None, mlp_hidden=64,
              noise_std=0.0):
    """Task with defaults: the target's reference K, and enough samples
    to keep the least-squares problem overdetermined (max(1024, 4K))."""
    if target not in TARGETS:
        raise ValueError(
            f"unknown target {target!r}, expected one of {sorted(TARGETS)}"
        )
    if n_harmonics is None:
        n_harmonics = TARGETS[target].default_harmonics
    if n_samples is None:
        n_samples = max(1024, 4 * n_harmonics)
    return FitTask(target=target, n_harmonics=n_harmonics,
                   n_samples=n_samples, mlp_hidden=mlp_hidden,
                   noise_std=noise_std).validate()


@dataclass
class FitResult:
    """Outcome of one arm on one task, including a plottable grid dump."""

    target: str
    arm: str
    n_harmonics: int
    n_samples: int
    seed: int
    train_mse: float
    test_mse: float
    parameter_count: int
    steps_run: int
    grid_x: list = field(default_factory=list)
    grid_target: list = field(default_factory=list)
    grid_prediction: list = field(default_factory=list)

    def to_json_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_json_dict(cls, doc):
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown FitResult fields: {sorted(unknown)}")
        return cls(**doc)


_ARMS = ("kan", "mlp")


def run_fit(task: FitTask, arm: str, seed=0) -> FitResult:
    """Train one arm on one task; returns metrics plus dense-grid
    predictions for plotting."""
    task.validate()
    if arm not in _ARMS:
        raise ValueError(f"unknown arm {arm!r}, expected one of {_ARMS}")
    x_train, y_train = task.sample(seed)
    if arm == "kan":
        est = FourierKanRegressor(n_harmonics=task.n_harmonics,
                                  steps=_TRAIN_BUDGET_STEPS, seed=seed)
    else:
        est = MlpRegressor(hidden_dim=task.mlp_hidden,
                           steps=_TRAIN_BUDGET_STEPS, seed=seed)
    est.fit(x_train, y_train)
    x_grid, y_grid = task.test_grid()
    pred = est.predict(x_grid)
    test_mse = float(np.mean((pred - y_grid) ** 2))
    if not np.isfinite(est.train_mse_) or not np.isfinite(test_mse):
        raise FloatingPointError(
            f"{arm} arm diverged on target {task.target!r} "
            f"(train_mse={est.train_mse_}, test_mse={test_mse})"
        )
    return FitResult(
        target=task.target,
        arm=arm,
        n_harmonics=task.n_harmonics,
        n_samples=task.n_samples,
        seed=int(seed),
        train_mse=float(est.train_mse_),
        test_mse=test_mse,
        parameter_count=est.parameter_count(),
        steps_run=est.steps_run_,
        grid_x=[float(v) for v in x_grid[:, 0]],
        grid_target=[float(v) for v in y_grid],
        grid_prediction=[float(v) for v in pred],
    )


def sweep_k(k_list, target="polynomial", seed=0, n_samples=None) -> list[FitResult]:
    """run_fit of the KAN arm at each K; results in k_list order.

    All runs share the same seed and sample count (sized for the largest
    K when not given), so they see identical training points.
    """
    if not k_list:
        raise ValueError("k_list must not be empty")
    if n_samples is None:
        n_samples = max(1024, 4 * int(max(k_list)))
    results = []
    for k in k_list:
        task = make_task(target, n_harmonics=int(k), n_samples=n_samples)
        results.append(run_fit(task, "kan", seed=seed))
    return results
