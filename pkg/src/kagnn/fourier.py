"""Fourier-series KAN layers with analytic gradients.

A layer maps ``n_in`` inputs to ``n_out`` outputs by placing a learnable
truncated Fourier series on every input/output connection::

    out[b, j] = sum_i sum_{k=1..K} ( cos_coef[k, j, i] * cos(k * x[b, i])
                                   + sin_coef[k, j, i] * sin(k * x[b, i]) )

plus an optional per-output bias.  Harmonics run 1..K; there is no k = 0
term (the bias covers the constant).  Inputs are evaluated as-is, with no
range reduction, so the layer is exactly 2*pi periodic in each input.

All arithmetic is float64.  Layers are plain data and ``forward`` /
``backward`` are pure functions of (layer, inputs), so a layer shared
read-only between threads is safe; concurrent mutation is not supported.
Seeded initialization uses numpy's default generator (PCG64): the same
(shape, seed) gives bit-identical coefficients on the same numpy build.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import (
    as_float_matrix,
    check_positive_int,
    check_same_shape,
)

__all__ = [
    "FourierKanLayer",
    "KanStack",
    "LayerGradients",
    "parameter_count",
]


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass
class LayerGradients:
    """Gradients of a scalar loss with respect to one layer's inputs and
    parameters, as produced by :meth:`FourierKanLayer.backward`."""

    d_cos: np.ndarray
    d_sin: np.ndarray
    d_bias: np.ndarray | None
    d_input: np.ndarray


@dataclass
class FourierKanLayer:
    """One Fourier KAN layer.

    Attributes
    ----------
    cos_coef, sin_coef : ndarray of shape [K, n_out, n_in]
        Cosine and sine coefficients per harmonic and connection.
    bias : ndarray of shape [n_out], or None
        Optional additive output bias.
    """

    cos_coef: np.ndarray
    sin_coef: np.ndarray
    bias: np.ndarray | None = None

    def __post_init__(self):
        self.cos_coef = np.asarray(self.cos_coef, dtype=np.float64)
        self.sin_coef = np.asarray(self.sin_coef, dtype=np.float64)
        if self.cos_coef.ndim != 3:
            raise ValueError(
                f"coefficients must be [K, n_out, n_in], got shape "
                f"{self.cos_coef.shape}"
            )
        check_same_shape(self.cos_coef, self.sin_coef, "cos_coef", "sin_coef")
        if min(self.cos_coef.shape) < 1:
            raise ValueError(
                f"K, n_out and n_in must all be >= 1, got shape "
                f"{self.cos_coef.shape}"
            )
        if self.bias is not None:
            self.bias = np.asarray(self.bias, dtype=np.float64)
            if self.bias.shape != (self.n_out,):
                raise ValueError(
                    f"bias must have shape ({self.n_out},), got {self.bias.shape}"
                )

    @property
    def n_harmonics(self):
        return self.cos_coef.shape[0]

    @property
    def n_out(self):
        return self.cos_coef.shape[1]

    @property
    def n_in(self):
        return self.cos_coef.shape[2]

    @classmethod
    def init(cls, n_in, n_out, n_harmonics, seed=0, with_bias=False):
        """Seeded random layer: coefficients ~ N(0, 1/(n_out * K)), bias zero.

        ``seed`` may be an int or an existing ``numpy.random.Generator``
        (the latter lets a model draw several layers from one stream).
        """
        n_in = check_positive_int(n_in, "n_in")
        n_out = check_positive_int(n_out, "n_out")
        n_harmonics = check_positive_int(n_harmonics, "n_harmonics")
        rng = _as_rng(seed)
        std = np.sqrt(1.0 / (n_out * n_harmonics))
        shape = (n_harmonics, n_out, n_in)
        cos_coef = rng.normal(0.0, std, size=shape)
        sin_coef = rng.normal(0.0, std, size=shape)
        bias = np.zeros(n_out) if with_bias else None
        return cls(cos_coef=cos_coef, sin_coef=sin_coef, bias=bias)

    def _angles(self, x):
        # [B, K, n_in]; harmonics 1..K broadcast over batch and inputs
        k = np.arange(1, self.n_harmonics + 1, dtype=np.float64)
        return x[:, None, :] * k[None, :, None]

    def forward(self, x):
        """Apply the layer to a batch: x [B, n_in] -> [B, n_out]."""
        x = as_float_matrix(x, n_cols=self.n_in, name="x")
        angles = self._angles(x)
        cos_basis = np.cos(angles)
        sin_basis = np.sin(angles)
        out = np.einsum("bki,kji->bj", cos_basis, self.cos_coef)
        out += np.einsum("bki,kji->bj", sin_basis, self.sin_coef)
        if self.bias is not None:
            out += self.bias
        return out

    def backward(self, x, upstream):
        """Analytic gradients for a batch.

        Given ``upstream = dL/d out`` of shape [B, n_out], returns the
        exact gradients

        * ``d_cos[k,j,i] = sum_b upstream[b,j] * cos(k x[b,i])``
        * ``d_sin[k,j,i] = sum_b upstream[b,j] * sin(k x[b,i])``
        * ``d_bias[j]    = sum_b upstream[b,j]`` (None when the layer has
          no bias)
        * ``d_input[b,i] = sum_j upstream[b,j] * sum_k k *
          (sin_coef * cos(k x) - cos_coef * sin(k x))``
        """
        x = as_float_matrix(x, n_cols=self.n_in, name="x")
        upstream = as_float_matrix(
            upstream, n_cols=self.n_out, name="upstream", require_finite=False
        )
        if upstream.shape[0] != x.shape[0]:
            raise ValueError(
                f"upstream batch {upstream.shape[0]} != input batch {x.shape[0]}"
            )
        angles = self._angles(x)
        cos_basis = np.cos(angles)
        sin_basis = np.sin(angles)
        d_cos = np.einsum("bj,bki->kji", upstream, cos_basis)
        d_sin = np.einsum("bj,bki->kji", upstream, sin_basis)
        d_bias = upstream.sum(axis=0) if self.bias is not None else None
        # Chain rule through the basis: d/dx cos(kx) = -k sin(kx) etc.
        t_cos = np.einsum("bj,kji->bki", upstream, self.cos_coef)
        t_sin = np.einsum("bj,kji->bki", upstream, self.sin_coef)
        k = np.arange(1, self.n_harmonics + 1, dtype=np.float64)[None, :, None]
        d_input = np.einsum("bki,bki->bi", t_sin, k * cos_basis)
        d_input -= np.einsum("bki,bki->bi", t_cos, k * sin_basis)
        return LayerGradients(d_cos=d_cos, d_sin=d_sin, d_bias=d_bias,
                              d_input=d_input)

    def parameter_count(self):
        """Number of trainable scalars: 2*K*n_in*n_out, plus n_out if biased."""
        count = 2 * self.n_harmonics * self.n_in * self.n_out
        if self.bias is not None:
            count += self.n_out
        return count

    def parameters(self):
        """Yield (name, array) pairs; arrays are the live parameters."""
        yield "cos_coef", self.cos_coef
        yield "sin_coef", self.sin_coef
        if self.bias is not None:
            yield "bias", self.bias

    def to_json_dict(self):
        """Plain-JSON form; exact float round-trip via repr semantics."""
        doc = {
            "n_in": self.n_in,
            "n_out": self.n_out,
            "K": self.n_harmonics,
            "A": self.cos_coef.tolist(),
            "B": self.sin_coef.tolist(),
        }
        if self.bias is not None:
            doc["bias"] = self.bias.tolist()
        return doc

    @classmethod
    def from_json_dict(cls, doc):
        for key in ("n_in", "n_out", "K", "A", "B"):
            if key not in doc:
                raise ValueError(f"layer document missing field {key!r}")
        cos_coef = np.asarray(doc["A"], dtype=np.float64)
        sin_coef = np.asarray(doc["B"], dtype=np.float64)
        expected = (int(doc["K"]), int(doc["n_out"]), int(doc["n_in"]))
        if cos_coef.shape != expected:
            raise ValueError(
                f"A has shape {cos_coef.shape}, header says {expected}"
            )
        bias = doc.get("bias")
        layer = cls(cos_coef=cos_coef, sin_coef=sin_coef,
                    bias=None if bias is None else np.asarray(bias, dtype=np.float64))
        return layer


@dataclass
class KanStack:
    """A sequence of FourierKanLayers applied one after another.

    Adjacent widths must match (layer t's n_out == layer t+1's n_in).
    """

    layers: list[FourierKanLayer] = field(default_factory=list)

    def __post_init__(self):
        if not self.layers:
            raise ValueError("KanStack needs at least one layer")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.n_out != b.n_in:
                raise ValueError(
                    f"layer widths do not chain: {a.n_out} -> {b.n_in}"
                )

    @property
    def n_in(self):
        return self.layers[0].n_in

    @property
    def n_out(self):
        return self.layers[-1].n_out

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def forward_trace(self, x):
        """Like forward, but also returns each layer's input for backward."""
        inputs = []
        for layer in self.layers:
            x = as_float_matrix(x, n_cols=layer.n_in, name="x")
            inputs.append(x)
            x = layer.forward(x)
        return x, inputs

    def backward(self, inputs, upstream):
        """Chain backward through the stack.

        ``inputs`` is the per-layer input list from :meth:`forward_trace`.
        Returns (per-layer LayerGradients in layer order, d_input).
        """
        if len(inputs) != len(self.layers):
            raise ValueError(
                f"got {len(inputs)} cached inputs for {len(self.layers)} layers"
            )
        grads: list[LayerGradients | None] = [None] * len(self.layers)
        for t in reversed(range(len(self.layers))):
            grads[t] = self.layers[t].backward(inputs[t], upstream)
            upstream = grads[t].d_input
        return grads, upstream

    def parameter_count(self):
        return sum(layer.parameter_count() for layer in self.layers)

    def parameters(self):
        for t, layer in enumerate(self.layers):
            for name, arr in layer.parameters():
                yield f"{t}.{name}", arr

    def to_json_dict(self):
        return {"layers": [layer.to_json_dict() for layer in self.layers]}

    @classmethod
    def from_json_dict(cls, doc):
        return cls(layers=[FourierKanLayer.from_json_dict(d)
                           for d in doc["layers"]])


def parameter_count(component):
    """Trainable-parameter count of any layer, stack, or model."""
    return component.parameter_count()
