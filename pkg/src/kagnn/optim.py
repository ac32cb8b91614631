"""Adam optimizer over named parameter dictionaries.

Standard Adam with bias-corrected first and second moments::

    m <- b1*m + (1-b1)*g          m_hat = m / (1 - b1^t)
    v <- b2*v + (1-b2)*g^2        v_hat = v / (1 - b2^t)
    p <- p - lr * m_hat / (sqrt(v_hat) + eps)

Parameters are updated in place, so the caller keeps exclusive write
access to the arrays during a step.  A non-finite gradient aborts the
step before any parameter is touched.
"""

from __future__ import annotations

import numpy as np

from .errors import TrainingDivergedError
from .validation import check_positive_float, check_unit_interval

__all__ = ["Adam"]


class Adam:
    def __init__(self, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.learning_rate = check_positive_float(learning_rate, "learning_rate")
        self.beta1 = check_unit_interval(beta1, "beta1")
        self.beta2 = check_unit_interval(beta2, "beta2")
        self.eps = check_positive_float(eps, "eps")
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray],
             grads: dict[str, np.ndarray]) -> None:
        """One update over every entry of ``params`` using ``grads``.

        Both dicts must share keys; moment state is keyed the same way
        and created lazily on first sight of a parameter.
        """
        missing = set(params) - set(grads)
        if missing:
            raise ValueError(f"gradients missing for parameters: {sorted(missing)}")
        for name in params:
            g = grads[name]
            if not np.all(np.isfinite(g)):
                raise TrainingDivergedError(
                    f"non-finite gradient for parameter {name!r}"
                )
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name, p in params.items():
            g = np.asarray(grads[name], dtype=np.float64)
            if g.shape != p.shape:
                raise ValueError(
                    f"gradient shape {g.shape} != parameter shape {p.shape} "
                    f"for {name!r}"
                )
            if name not in self.m:
                self.m[name] = np.zeros_like(p)
                self.v[name] = np.zeros_like(p)
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
