"""Graph models built from Fourier KAN layers, with hand-derived backward
passes.

Both models share the same skeleton:

* initial node state: ``h0 = kan_ini(f_v ++ mean of incident edge
  features)``, width node_dim + edge_dim -> hidden;
* a stack of message-passing layers over the union (covalent + cutoff)
  edge set;
* mean pooling over each graph's nodes, then a KAN readout stack to one
  logit per task, squashed by a sigmoid.

KaGnnModel updates nodes residually from the neighbor mean::

    h' = h + KAN(h ++ mean_{u in N(v)} h_u)        (empty mean = zeros)

KaGatModel keeps per-directed-edge states and attends over incoming
edges: edge states start as the sum of three affine maps of (f_dst,
f_uv, f_src); each layer computes per-destination, per-channel softmax
weights over incoming edge states, mixes projected neighbor states with
them, and passes the mixture through a KAN (no residual); edge states
evolve through their own KAN.

Everything is float64 numpy; forward returns a trace object carrying
the intermediate values backward needs.  Models are safe to share
read-only across threads; training mutates parameters in place.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .fourier import FourierKanLayer, KanStack
from .graphs import EDGE_DIM, NODE_DIM, MolecularGraph
from .validation import check_positive_int

__all__ = [
    "AffineMap",
    "CHECKPOINT_SCHEMA",
    "GraphBatch",
    "KaGatModel",
    "KaGnnModel",
    "PROB_CLAMP",
    "bce_loss",
    "bce_loss_and_logit_grad",
    "init_model",
    "load_checkpoint",
    "model_from_checkpoint_dict",
    "model_to_checkpoint_dict",
    "save_checkpoint",
    "sigmoid",
]

CHECKPOINT_SCHEMA = "kagnn-checkpoint/1"
PROB_CLAMP = 1e-7


def sigmoid(x):
    """Numerically stable logistic function."""
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# --- batching ------------------------------------------------------------

class GraphBatch:
    """Several MolecularGraphs packed into flat arrays.

    Undirected edges are expanded into both directed orientations so a
    single (edge_src, edge_dst) pair of index arrays drives every
    neighbor aggregation; edge features are shared by both directions.
    """

    def __init__(self, graphs: list[MolecularGraph]):
        if not graphs:
            raise ValueError("GraphBatch needs at least one graph")
        n_tasks = graphs[0].n_tasks
        for g in graphs:
            if g.n_tasks != n_tasks:
                raise ValueError(
                    f"graph {g.mol_id!r} has {g.n_tasks} tasks, expected {n_tasks}"
                )
        self.n_graphs = len(graphs)
        self.node_features = np.concatenate([g.node_features for g in graphs])
        self.n_nodes = self.node_features.shape[0]
        self.graph_id = np.concatenate([
            np.full(g.n_atoms, i, dtype=np.int64) for i, g in enumerate(graphs)
        ])
        self.node_counts = np.array([g.n_atoms for g in graphs], dtype=np.int64)

        srcs, dsts, feats = [], [], []
        offset = 0
        for g in graphs:
            for e in g.edges:
                srcs.extend((offset + e.u, offset + e.v))
                dsts.extend((offset + e.v, offset + e.u))
                feats.extend((e.features, e.features))
            offset += g.n_atoms
        self.edge_src = np.array(srcs, dtype=np.int64)
        self.edge_dst = np.array(dsts, dtype=np.int64)
        self.edge_features = (np.stack(feats) if feats
                              else np.zeros((0, EDGE_DIM)))
        self.n_directed_edges = self.edge_src.shape[0]

        degree = np.zeros(self.n_nodes)
        np.add.at(degree, self.edge_dst, 1.0)
        # Isolated nodes get factor 0: their "mean" is the zero vector.
        self.inv_degree = np.where(degree > 0, 1.0 / np.maximum(degree, 1.0), 0.0)

        if n_tasks:
            self.labels = np.stack([g.labels for g in graphs])
            self.mask = np.stack([g.mask for g in graphs]).astype(np.float64)
        else:
            self.labels = np.zeros((self.n_graphs, 0))
            self.mask = np.zeros((self.n_graphs, 0))
        self.n_tasks = n_tasks

        cov = sum(g.edge_counts()[0] for g in graphs)
        cut = sum(g.edge_counts()[1] for g in graphs)
        self.edge_kind_counts = {"covalent": cov, "cutoff": cut}

    # -- neighbor/segment reductions (ordered, deterministic) --

    def scatter_to_dst(self, per_edge):
        out = np.zeros((self.n_nodes, per_edge.shape[1]))
        np.add.at(out, self.edge_dst, per_edge)
        return out

    def incident_edge_mean(self):
        return self.scatter_to_dst(self.edge_features) * self.inv_degree[:, None]

    def neighbor_mean(self, h):
        return self.scatter_to_dst(h[self.edge_src]) * self.inv_degree[:, None]

    def neighbor_mean_backward(self, d_agg):
        contrib = d_agg * self.inv_degree[:, None]
        d_h = np.zeros_like(d_agg)
        np.add.at(d_h, self.edge_src, contrib[self.edge_dst])
        return d_h

    def mean_pool(self, h):
        pooled = np.zeros((self.n_graphs, h.shape[1]))
        np.add.at(pooled, self.graph_id, h)
        return pooled / self.node_counts[:, None]

    def mean_pool_backward(self, d_pooled):
        return (d_pooled / self.node_counts[:, None])[self.graph_id]

    def incoming_softmax(self, e):
        """Per-destination, per-channel softmax over incoming edges."""
        mx = np.full((self.n_nodes, e.shape[1]), -np.inf)
        np.maximum.at(mx, self.edge_dst, e)
        ex = np.exp(e - mx[self.edge_dst])
        den = np.zeros((self.n_nodes, e.shape[1]))
        np.add.at(den, self.edge_dst, ex)
        return ex / den[self.edge_dst]

    def incoming_softmax_backward(self, alpha, d_alpha):
        t = alpha * d_alpha
        tsum = np.zeros((self.n_nodes, alpha.shape[1]))
        np.add.at(tsum, self.edge_dst, t)
        return t - alpha * tsum[self.edge_dst]


# --- affine helper (KA-GAT projections) -----------------------------------

@dataclass
class AffineMap:
    """Dense affine map y = x W^T + b."""

    weight: np.ndarray  # [n_out, n_in]
    bias: np.ndarray    # [n_out]

    @classmethod
    def init(cls, n_in, n_out, rng):
        weight = rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_out, n_in))
        return cls(weight=weight, bias=np.zeros(n_out))

    @property
    def n_in(self):
        return self.weight.shape[1]

    @property
    def n_out(self):
        return self.weight.shape[0]

    def forward(self, x):
        return x @ self.weight.T + self.bias

    def backward(self, x, upstream):
        d_weight = upstream.T @ x
        d_bias = upstream.sum(axis=0)
        d_input = upstream @ self.weight
        return d_weight, d_bias, d_input

    def parameter_count(self):
        return self.weight.size + self.bias.size

    def parameters(self):
        yield "weight", self.weight
        yield "bias", self.bias

    def to_json_dict(self):
        return {"weight": self.weight.tolist(), "bias": self.bias.tolist()}

    @classmethod
    def from_json_dict(cls, doc):
        return cls(weight=np.asarray(doc["weight"], dtype=np.float64),
                   bias=np.asarray(doc["bias"], dtype=np.float64))


# --- loss ------------------------------------------------------------------

def bce_loss(probabilities, labels, mask):
    """Masked binary cross-entropy, summed over unmasked (graph, task)
    pairs; probabilities clamp to [1e-7, 1 - 1e-7] inside the logs."""
    p = np.clip(probabilities, PROB_CLAMP, 1.0 - PROB_CLAMP)
    terms = -(labels * np.log(p) + (1.0 - labels) * np.log1p(-p))
    return float((terms * mask).sum())


def bce_loss_and_logit_grad(probabilities, labels, mask):
    """Loss plus its gradient in the logits.

    For sigmoid outputs d loss / d logit = (p - y) on unmasked pairs;
    the clamp zeroes the gradient wherever p left the clamp interval,
    matching the flat loss there.
    """
    loss = bce_loss(probabilities, labels, mask)
    inside = ((probabilities >= PROB_CLAMP)
              & (probabilities <= 1.0 - PROB_CLAMP)).astype(np.float64)
    d_logits = (probabilities - labels) * mask * inside
    return loss, d_logits


# --- KA-GNN ----------------------------------------------------------------

def _stash(grads, prefix, layer_grads):
    grads[f"{prefix}.cos_coef"] = layer_grads.d_cos
    grads[f"{prefix}.sin_coef"] = layer_grads.d_sin
    if layer_grads.d_bias is not None:
        grads[f"{prefix}.bias"] = layer_grads.d_bias


@dataclass
class KaGnnTrace:
    """Intermediate values of one KaGnnModel forward pass."""

    batch: GraphBatch
    init_input: np.ndarray            # [N, node_dim + edge_dim]
    node_states: list                 # h^(0) .. h^(L), each [N, hidden]
    mp_inputs: list                   # input to each message KAN, [N, 2*hidden]
    pooled: np.ndarray                # [G, hidden]
    readout_inputs: list
    logits: np.ndarray                # [G, n_tasks]
    probabilities: np.ndarray


@dataclass
class KaGnnModel:
    """Residual message-passing network with KAN layers throughout."""

    kan_ini: FourierKanLayer
    mp_layers: list[FourierKanLayer]
    readout: KanStack

    variant = "kagnn"

    @classmethod
    def init(cls, n_tasks, n_harmonics=2, n_layers=1, hidden_dim=64,
             readout_depth=None, seed=0, node_dim=NODE_DIM, edge_dim=EDGE_DIM):
        n_tasks = check_positive_int(n_tasks, "n_tasks")
        n_layers = check_positive_int(n_layers, "n_layers")
        hidden_dim = check_positive_int(hidden_dim, "hidden_dim")
        rng = np.random.default_rng(seed)
        kan_ini = FourierKanLayer.init(node_dim + edge_dim, hidden_dim,
                                       n_harmonics, rng)
        mp_layers = [
            FourierKanLayer.init(2 * hidden_dim, hidden_dim, n_harmonics, rng)
            for _ in range(n_layers)
        ]
        readout = KanStack(_readout_layers(hidden_dim, n_tasks, n_harmonics,
                                           readout_depth, rng))
        return cls(kan_ini=kan_ini, mp_layers=mp_layers, readout=readout)

    @property
    def hidden_dim(self):
        return self.kan_ini.n_out

    @property
    def n_tasks(self):
        return self.readout.n_out

    @property
    def n_harmonics(self):
        return self.kan_ini.n_harmonics

    @property
    def n_layers(self):
        return len(self.mp_layers)

    def forward(self, batch: GraphBatch) -> KaGnnTrace:
        init_input = np.concatenate(
            [batch.node_features, batch.incident_edge_mean()], axis=1)
        h = self.kan_ini.forward(init_input)
        node_states = [h]
        mp_inputs = []
        for layer in self.mp_layers:
            agg = batch.neighbor_mean(h)
            z = np.concatenate([h, agg], axis=1)
            mp_inputs.append(z)
            h = h + layer.forward(z)
            node_states.append(h)
        pooled = batch.mean_pool(h)
        logits, readout_inputs = self.readout.forward_trace(pooled)
        return KaGnnTrace(batch=batch, init_input=init_input,
                          node_states=node_states, mp_inputs=mp_inputs,
                          pooled=pooled, readout_inputs=readout_inputs,
                          logits=logits, probabilities=sigmoid(logits))

    def backward(self, trace: KaGnnTrace, d_logits):
        """Gradients of a scalar loss given d loss / d logits."""
        batch = trace.batch
        hidden = self.hidden_dim
        grads: dict[str, np.ndarray] = {}
        ro_grads, d_pooled = self.readout.backward(trace.readout_inputs,
                                                   d_logits)
        for t, lg in enumerate(ro_grads):
            _stash(grads, f"readout.{t}", lg)
        d_h = batch.mean_pool_backward(d_pooled)
        for l in reversed(range(len(self.mp_layers))):
            lg = self.mp_layers[l].backward(trace.mp_inputs[l], d_h)
            _stash(grads, f"mp_layers.{l}", lg)
            # residual: h' = h + KAN([h, agg(h)])
            d_h = (d_h + lg.d_input[:, :hidden]
                   + batch.neighbor_mean_backward(lg.d_input[:, hidden:]))
        lg = self.kan_ini.backward(trace.init_input, d_h)
        _stash(grads, "kan_ini", lg)
        return grads

    def parameters(self):
        for name, arr in self.kan_ini.parameters():
            yield f"kan_ini.{name}", arr
        for l, layer in enumerate(self.mp_layers):
            for name, arr in layer.parameters():
                yield f"mp_layers.{l}.{name}", arr
        for name, arr in self.readout.parameters():
            yield f"readout.{name}", arr

    def parameter_count(self):
        return (self.kan_ini.parameter_count()
                + sum(l.parameter_count() for l in self.mp_layers)
                + self.readout.parameter_count())

    def to_json_dict(self):
        return {
            "kan_ini": self.kan_ini.to_json_dict(),
            "mp_layers": [l.to_json_dict() for l in self.mp_layers],
            "readout": self.readout.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, doc):
        return cls(
            kan_ini=FourierKanLayer.from_json_dict(doc["kan_ini"]),
            mp_layers=[FourierKanLayer.from_json_dict(d)
                       for d in doc["mp_layers"]],
            readout=KanStack.from_json_dict(doc["readout"]),
        )


def _readout_layers(hidden_dim, n_tasks, n_harmonics, readout_depth, rng):
    if readout_depth is None:
        readout_depth = 1 if n_tasks == 1 else 2
    readout_depth = check_positive_int(readout_depth, "readout_depth")
    widths = [hidden_dim] * readout_depth + [n_tasks]
    return [
        FourierKanLayer.init(widths[i], widths[i + 1], n_harmonics, rng)
        for i in range(readout_depth)
    ]


# --- KA-GAT ----------------------------------------------------------------

@dataclass
class KaGatTrace:
    batch: GraphBatch
    init_input: np.ndarray
    node_states: list                 # h^(0) .. h^(L)
    edge_states: list                 # e^(0) .. e^(L), each [2M, hidden]
    alphas: list                      # attention weights per layer
    zu_states: list                   # projected neighbor states per layer
    mixed: list                       # input to each node KAN
    pooled: np.ndarray
    readout_inputs: list
    logits: np.ndarray
    probabilities: np.ndarray


@dataclass
class KaGatModel:
    """Edge-attention variant: directed edge states gate neighbor
    messages through a per-destination softmax."""

    kan_ini: FourierKanLayer
    edge_proj_dst: AffineMap          # f_v  (92 -> hidden)
    edge_proj_edge: AffineMap         # f_uv (21 -> hidden)
    edge_proj_src: AffineMap          # f_u  (92 -> hidden)
    node_projs: list[AffineMap]       # per layer, hidden -> hidden
    nbr_projs: list[AffineMap]        # per layer, hidden -> hidden
    mp_kans: list[FourierKanLayer]    # per layer, hidden -> hidden
    edge_kans: list[FourierKanLayer]  # per layer, hidden -> hidden
    readout: KanStack

    variant = "kagat"

    @classmethod
    def init(cls, n_tasks, n_harmonics=2, n_layers=1, hidden_dim=64,
             readout_depth=None, seed=0, node_dim=NODE_DIM, edge_dim=EDGE_DIM):
        n_tasks = check_positive_int(n_tasks, "n_tasks")
        n_layers = check_positive_int(n_layers, "n_layers")
        hidden_dim = check_positive_int(hidden_dim, "hidden_dim")
        rng = np.random.default_rng(seed)
        kan_ini = FourierKanLayer.init(node_dim + edge_dim, hidden_dim,
                                       n_harmonics, rng)
        edge_proj_dst = AffineMap.init(node_dim, hidden_dim, rng)
        edge_proj_edge = AffineMap.init(edge_dim, hidden_dim, rng)
        edge_proj_src = AffineMap.init(node_dim, hidden_dim, rng)
        node_projs, nbr_projs, mp_kans, edge_kans = [], [], [], []
        for _ in range(n_layers):
            node_projs.append(AffineMap.init(hidden_dim, hidden_dim, rng))
            nbr_projs.append(AffineMap.init(hidden_dim, hidden_dim, rng))
            mp_kans.append(FourierKanLayer.init(hidden_dim, hidden_dim,
                                                n_harmonics, rng))
            edge_kans.append(FourierKanLayer.init(hidden_dim, hidden_dim,
                                                  n_harmonics, rng))
        readout = KanStack(_readout_layers(hidden_dim, n_tasks, n_harmonics,
                                           readout_depth, rng))
        return cls(kan_ini=kan_ini, edge_proj_dst=edge_proj_dst,
                   edge_proj_edge=edge_proj_edge, edge_proj_src=edge_proj_src,
                   node_projs=node_projs, nbr_projs=nbr_projs,
                   mp_kans=mp_kans, edge_kans=edge_kans, readout=readout)

    @property
    def hidden_dim(self):
        return self.kan_ini.n_out

    @property
    def n_tasks(self):
        return self.readout.n_out

    @property
    def n_harmonics(self):
        return self.kan_ini.n_harmonics

    @property
    def n_layers(self):
        return len(self.mp_kans)

    def forward(self, batch: GraphBatch) -> KaGatTrace:
        init_input = np.concatenate(
            [batch.node_features, batch.incident_edge_mean()], axis=1)
        h = self.kan_ini.forward(init_input)
        x_src = batch.node_features[batch.edge_src]
        x_dst = batch.node_features[batch.edge_dst]
        e = (self.edge_proj_dst.forward(x_dst)
             + self.edge_proj_edge.forward(batch.edge_features)
             + self.edge_proj_src.forward(x_src))
        node_states, edge_states = [h], [e]
        alphas, zu_states, mixed = [], [], []
        for l in range(self.n_layers):
            z_node = self.node_projs[l].forward(h)
            z_nbr = self.nbr_projs[l].forward(h)
            alpha = batch.incoming_softmax(e)
            messages = z_nbr[batch.edge_src] * alpha
            m = z_node + batch.scatter_to_dst(messages)
            alphas.append(alpha)
            zu_states.append(z_nbr)
            mixed.append(m)
            h = self.mp_kans[l].forward(m)       # no residual here
            e = self.edge_kans[l].forward(e)
            node_states.append(h)
            edge_states.append(e)
        pooled = batch.mean_pool(h)
        logits, readout_inputs = self.readout.forward_trace(pooled)
        return KaGatTrace(batch=batch, init_input=init_input,
                          node_states=node_states, edge_states=edge_states,
                          alphas=alphas, zu_states=zu_states, mixed=mixed,
                          pooled=pooled, readout_inputs=readout_inputs,
                          logits=logits, probabilities=sigmoid(logits))

    def backward(self, trace: KaGatTrace, d_logits):
        batch = trace.batch
        grads: dict[str, np.ndarray] = {}
        ro_grads, d_pooled = self.readout.backward(trace.readout_inputs,
                                                   d_logits)
        for t, lg in enumerate(ro_grads):
            _stash(grads, f"readout.{t}", lg)
        d_h = batch.mean_pool_backward(d_pooled)
        d_e = np.zeros((batch.n_directed_edges, self.hidden_dim))
        for l in reversed(range(self.n_layers)):
            lg_edge = self.edge_kans[l].backward(trace.edge_states[l], d_e)
            _stash(grads, f"edge_kans.{l}", lg_edge)
            d_e = lg_edge.d_input
            lg_node = self.mp_kans[l].backward(trace.mixed[l], d_h)
            _stash(grads, f"mp_kans.{l}", lg_node)
            d_m = lg_node.d_input
            # m = z_node + scatter_dst(z_nbr[src] * alpha)
            alpha = trace.alphas[l]
            z_nbr = trace.zu_states[l]
            d_messages = d_m[batch.edge_dst]
            d_alpha = d_messages * z_nbr[batch.edge_src]
            d_z_nbr = np.zeros_like(z_nbr)
            np.add.at(d_z_nbr, batch.edge_src, d_messages * alpha)
            d_e += batch.incoming_softmax_backward(alpha, d_alpha)
            h_in = trace.node_states[l]
            dw, db, d_h_node = self.node_projs[l].backward(h_in, d_m)
            grads[f"node_projs.{l}.weight"] = dw
            grads[f"node_projs.{l}.bias"] = db
            dw, db, d_h_nbr = self.nbr_projs[l].backward(h_in, d_z_nbr)
            grads[f"nbr_projs.{l}.weight"] = dw
            grads[f"nbr_projs.{l}.bias"] = db
            d_h = d_h_node + d_h_nbr
        lg = self.kan_ini.backward(trace.init_input, d_h)
        _stash(grads, "kan_ini", lg)
        x_src = batch.node_features[batch.edge_src]
        x_dst = batch.node_features[batch.edge_dst]
        for prefix, proj, inp in (
            ("edge_proj_dst", self.edge_proj_dst, x_dst),
            ("edge_proj_edge", self.edge_proj_edge, batch.edge_features),
            ("edge_proj_src", self.edge_proj_src, x_src),
        ):
            dw, db, _ = proj.backward(inp, d_e)
            grads[f"{prefix}.weight"] = dw
            grads[f"{prefix}.bias"] = db
        return grads

    def parameters(self):
        for name, arr in self.kan_ini.parameters():
            yield f"kan_ini.{name}", arr
        for prefix, proj in (("edge_proj_dst", self.edge_proj_dst),
                             ("edge_proj_edge", self.edge_proj_edge),
                             ("edge_proj_src", self.edge_proj_src)):
            for name, arr in proj.parameters():
                yield f"{prefix}.{name}", arr
        for group, items in (("node_projs", self.node_projs),
                             ("nbr_projs", self.nbr_projs),
                             ("mp_kans", self.mp_kans),
                             ("edge_kans", self.edge_kans)):
            for l, item in enumerate(items):
                for name, arr in item.parameters():
                    yield f"{group}.{l}.{name}", arr
        for name, arr in self.readout.parameters():
            yield f"readout.{name}", arr

    def parameter_count(self):
        total = self.kan_ini.parameter_count()
        total += (self.edge_proj_dst.parameter_count()
                  + self.edge_proj_edge.parameter_count()
                  + self.edge_proj_src.parameter_count())
        for group in (self.node_projs, self.nbr_projs, self.mp_kans,
                      self.edge_kans):
            total += sum(item.parameter_count() for item in group)
        return total + self.readout.parameter_count()

    def to_json_dict(self):
        return {
            "kan_ini": self.kan_ini.to_json_dict(),
            "edge_proj_dst": self.edge_proj_dst.to_json_dict(),
            "edge_proj_edge": self.edge_proj_edge.to_json_dict(),
            "edge_proj_src": self.edge_proj_src.to_json_dict(),
            "node_projs": [p.to_json_dict() for p in self.node_projs],
            "nbr_projs": [p.to_json_dict() for p in self.nbr_projs],
            "mp_kans": [l.to_json_dict() for l in self.mp_kans],
            "edge_kans": [l.to_json_dict() for l in self.edge_kans],
            "readout": self.readout.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, doc):
        return cls(
            kan_ini=FourierKanLayer.from_json_dict(doc["kan_ini"]),
            edge_proj_dst=AffineMap.from_json_dict(doc["edge_proj_dst"]),
            edge_proj_edge=AffineMap.from_json_dict(doc["edge_proj_edge"]),
            edge_proj_src=AffineMap.from_json_dict(doc["edge_proj_src"]),
            node_projs=[AffineMap.from_json_dict(d) for d in doc["node_projs"]],
            nbr_projs=[AffineMap.from_json_dict(d) for d in doc["nbr_projs"]],
            mp_kans=[FourierKanLayer.from_json_dict(d) for d in doc["mp_kans"]],
            edge_kans=[FourierKanLayer.from_json_dict(d)
                       for d in doc["edge_kans"]],
            readout=KanStack.from_json_dict(doc["readout"]),
        )


_VARIANTS = {"kagnn": KaGnnModel, "kagat": KaGatModel}


def init_model(variant, n_tasks, n_harmonics=2, n_layers=1, hidden_dim=64,
               readout_depth=None, seed=0):
    if variant not in _VARIANTS:
        raise ValueError(
            f"unknown variant {variant!r}, expected one of {sorted(_VARIANTS)}"
        )
    return _VARIANTS[variant].init(
        n_tasks=n_tasks, n_harmonics=n_harmonics, n_layers=n_layers,
        hidden_dim=hidden_dim, readout_depth=readout_depth, seed=seed)


# --- checkpoints -----------------------------------------------------------

def model_to_checkpoint_dict(model, cutoff=5.0):
    return {
        "schema": CHECKPOINT_SCHEMA,
        "variant": model.variant,
        "n_tasks": model.n_tasks,
        "n_harmonics": model.n_harmonics,
        "n_layers": model.n_layers,
        "hidden_dim": model.hidden_dim,
        "cutoff": float(cutoff),
        "weights": model.to_json_dict(),
    }


def model_from_checkpoint_dict(doc):
    """Returns (model, cutoff)."""
    schema = doc.get("schema")
    if schema != CHECKPOINT_SCHEMA:
        raise ValueError(
            f"unsupported checkpoint schema {schema!r}, "
            f"expected {CHECKPOINT_SCHEMA!r}"
        )
    variant = doc.get("variant")
    if variant not in _VARIANTS:
        raise ValueError(f"unknown checkpoint variant {variant!r}")
    model = _VARIANTS[variant].from_json_dict(doc["weights"])
    return model, float(doc.get("cutoff", 5.0))


def save_checkpoint(path, model, cutoff=5.0):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_checkpoint_dict(model, cutoff), fh)
        fh.write("\n")


def load_checkpoint(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_checkpoint_dict(json.load(fh))
