"""Molecular graph construction and featurization.

A molecule becomes an undirected graph over its atoms with two edge
kinds:

* covalent edges, one per chemical bond;
* cutoff edges, one per non-bonded atom pair whose Euclidean distance d
  satisfies d <= cutoff (boundary inclusive; default 5.0 Angstrom).

Node features (width 92)
    [0..63]   atomic-number one-hot over bins 1..64; Z > 64 clips into
              the last bin
    [64..77]  covalent radius, 14 uniform bins over [0.25, 2.10] A
    [78..91]  Pauling electronegativity, 14 uniform bins over [0.7, 4.0]

Edge features (width 21)
    [0..6]    bond direction one-hot: none, beginwedge, begindash,
              enddownright, endupright, eitherdouble, unknown
    [7..10]   bond type one-hot: single, double, triple, aromatic
    [11..12]  d, d^2
    [13..14]  ring one-hot: not-in-ring, in-ring
    [15..17]  q_u, q_v, q_u*q_v (partial charges)
    [18..20]  1/d, 1/d^6, 1/d^12

Covalent edges fill all 21 slots; cutoff edges carry only the geometric
and charge slots (11..12 and 15..20) and leave the chemical slots
([0..10], [13..14]) zero.  Out-of-range scalar values clamp into the
first or last bin; a pair at distance exactly 0 is rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .elements import element_info
from .errors import FeaturizationError, MoleculeParseError
from .molecules import Atom, Bond, Molecule
from .validation import check_nonnegative_float

__all__ = [
    "EDGE_DIM",
    "NODE_DIM",
    "EdgeKind",
    "GraphEdge",
    "MolecularGraph",
    "build_graph",
    "featurize_edge",
    "featurize_node",
    "graph_from_json_dict",
    "graph_to_json_dict",
    "read_graphs_jsonl",
    "write_graphs_jsonl",
]

NODE_DIM = 92
EDGE_DIM = 21

_Z_BINS = 64
_RADIUS_BINS = 14
_RADIUS_RANGE = (0.25, 2.10)
_EN_BINS = 14
_EN_RANGE = (0.7, 4.0)

# Edge slot map (see module docstring).
_DIRECTION_ORDER = ("none", "beginwedge", "begindash", "enddownright",
                    "endupright", "eitherdouble", "unknown")
_BOND_TYPE_ORDER = ("single", "double", "triple", "aromatic")
_SLOT_DIRECTION = 0
_SLOT_BOND_TYPE = 7
_SLOT_D = 11
_SLOT_D2 = 12
_SLOT_NOT_IN_RING = 13
_SLOT_IN_RING = 14
_SLOT_Q_U = 15
_SLOT_Q_V = 16
_SLOT_Q_PROD = 17
_SLOT_INV_D = 18
_SLOT_INV_D6 = 19
_SLOT_INV_D12 = 20


class EdgeKind(Enum):
    COVALENT = "covalent"
    CUTOFF = "cutoff"


@dataclass
class GraphEdge:
    u: int
    v: int
    kind: EdgeKind
    features: np.ndarray  # (EDGE_DIM,)


@dataclass
class MolecularGraph:
    """Featurized graph: dense node features plus an undirected edge list.

    labels is a float vector with one entry per task; mask marks which
    labels actually exist (False entries are excluded from loss and
    metrics and their label value is meaningless).
    """

    node_features: np.ndarray        # [n_atoms, NODE_DIM]
    edges: list[GraphEdge]
    labels: np.ndarray               # [n_tasks]
    mask: np.ndarray                 # [n_tasks] bool
    mol_id: str = ""

    @property
    def n_atoms(self):
        return self.node_features.shape[0]

    @property
    def n_tasks(self):
        return self.labels.shape[0]

    def edge_counts(self):
        """(covalent, cutoff) undirected edge counts."""
        n_cov = sum(1 for e in self.edges if e.kind is EdgeKind.COVALENT)
        return n_cov, len(self.edges) - n_cov

    def neighbor_lists(self):
        """Adjacency over the union edge set, neighbors in edge order."""
        adj: list[list[int]] = [[] for _ in range(self.n_atoms)]
        for e in self.edges:
            adj[e.u].append(e.v)
            adj[e.v].append(e.u)
        return adj


def _uniform_bin(value, lo, hi, n_bins):
    # Out-of-range values clamp into the end bins.
    idx = int(np.floor((value - lo) / (hi - lo) * n_bins))
    return min(max(idx, 0), n_bins - 1)


def featurize_node(atom: Atom) -> np.ndarray:
    """92-wide one-hot encoding of element identity, radius and
    electronegativity bins."""
    info = element_info(atom.element)
    vec = np.zeros(NODE_DIM)
    z_bin = min(info.atomic_number, _Z_BINS) - 1
    vec[z_bin] = 1.0
    vec[_Z_BINS + _uniform_bin(info.covalent_radius, *_RADIUS_RANGE,
                               _RADIUS_BINS)] = 1.0
    vec[_Z_BINS + _RADIUS_BINS + _uniform_bin(info.electronegativity,
                                              *_EN_RANGE, _EN_BINS)] = 1.0
    return vec


def _edge_features(atom_u: Atom, atom_v: Atom, kind: EdgeKind,
                   bond: Bond | None, mol_id: str) -> np.ndarray:
    d = float(np.linalg.norm(atom_u.position - atom_v.position))
    if d == 0.0:
        raise FeaturizationError(
            f"molecule {mol_id!r}: coincident atoms (distance 0) cannot "
            f"form an edge"
        )
    vec = np.zeros(EDGE_DIM)
    vec[_SLOT_D] = d
    vec[_SLOT_D2] = d * d
    q_u, q_v = atom_u.partial_charge, atom_v.partial_charge
    vec[_SLOT_Q_U] = q_u
    vec[_SLOT_Q_V] = q_v
    vec[_SLOT_Q_PROD] = q_u * q_v
    inv_d = 1.0 / d
    vec[_SLOT_INV_D] = inv_d
    vec[_SLOT_INV_D6] = inv_d ** 6
    vec[_SLOT_INV_D12] = inv_d ** 12
    if kind is EdgeKind.COVALENT:
        if bond is None:
            raise FeaturizationError(
                f"molecule {mol_id!r}: covalent edge requested for a pair "
                f"with no bond record"
            )
        vec[_SLOT_DIRECTION + _DIRECTION_ORDER.index(bond.direction.value)] = 1.0
        vec[_SLOT_BOND_TYPE + _BOND_TYPE_ORDER.index(bond.bond_type.value)] = 1.0
        vec[_SLOT_IN_RING if bond.in_ring else _SLOT_NOT_IN_RING] = 1.0
    return vec


def featurize_edge(mol: Molecule, u: int, v: int, kind: EdgeKind) -> np.ndarray:
    """Feature vector for the (u, v) edge of ``mol``; for covalent edges
    the bond record is looked up by the unordered pair."""
    n = mol.n_atoms
    if not (0 <= u < n and 0 <= v < n) or u == v:
        raise FeaturizationError(
            f"molecule {mol.id!r}: invalid edge pair ({u}, {v}) for "
            f"{n} atoms"
        )
    bond = None
    if kind is EdgeKind.COVALENT:
        for b in mol.bonds:
            if {b.i, b.j} == {u, v}:
                bond = b
                break
    return _edge_features(mol.atoms[u], mol.atoms[v], kind, bond, mol.id)


def build_graph(mol: Molecule, cutoff: float = 5.0) -> MolecularGraph:
    """Featurize a molecule into a MolecularGraph.

    The edge set is the union of one covalent edge per bond (in bond
    order) and one cutoff edge per non-bonded pair with d <= cutoff
    (pairs in lexicographic order).  cutoff = 0 yields a covalent-only
    graph.
    """
    cutoff = check_nonnegative_float(cutoff, "cutoff")
    try:
        mol.validate()
    except ValueError as exc:
        raise FeaturizationError(str(exc))

    node_features = np.stack([featurize_node(a) for a in mol.atoms])

    edges: list[GraphEdge] = []
    bonded: dict[tuple[int, int], Bond] = {}
    for b in mol.bonds:
        bonded[(min(b.i, b.j), max(b.i, b.j))] = b
        feats = _edge_features(mol.atoms[b.i], mol.atoms[b.j],
                               EdgeKind.COVALENT, b, mol.id)
        edges.append(GraphEdge(u=b.i, v=b.j, kind=EdgeKind.COVALENT,
                               features=feats))

    pos = mol.positions
    n = mol.n_atoms
    if n > 1:
        deltas = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((deltas ** 2).sum(axis=-1))
        iu, iv = np.triu_indices(n, k=1)
        within = dist[iu, iv] <= cutoff
        for u, v in zip(iu[within], iv[within]):
            pair = (int(u), int(v))
            if pair in bonded:
                continue
            feats = _edge_features(mol.atoms[pair[0]], mol.atoms[pair[1]],
                                   EdgeKind.CUTOFF, None, mol.id)
            edges.append(GraphEdge(u=pair[0], v=pair[1], kind=EdgeKind.CUTOFF,
                                   features=feats))

    labels = np.array([0.0 if lab is None else float(lab)
                       for lab in mol.labels])
    mask = np.array([lab is not None for lab in mol.labels], dtype=bool)
    return MolecularGraph(node_features=node_features, edges=edges,
                          labels=labels, mask=mask, mol_id=mol.id)


# --- featurized-graph JSON-lines ----------------------------------------

def graph_to_json_dict(graph: MolecularGraph) -> dict:
    labels = [
        (int(lab) if keep else None)
        for lab, keep in zip(graph.labels, graph.mask)
    ]
    return {
        "id": graph.mol_id,
        "node_features": graph.node_features.tolist(),
        "edges": [
            {"u": e.u, "v": e.v, "kind": e.kind.value,
             "features": e.features.tolist()}
            for e in graph.edges
        ],
        "labels": labels,
    }


def graph_from_json_dict(doc, *, source=None, line=None) -> MolecularGraph:
    def fail(msg):
        raise MoleculeParseError(msg, source=source, line=line)

    if not isinstance(doc, dict):
        fail("featurized record must be an object")
    try:
        node_features = np.asarray(doc["node_features"], dtype=np.float64)
    except (KeyError, ValueError):
        fail("missing or malformed 'node_features'")
    if node_features.ndim != 2 or node_features.shape[1] != NODE_DIM:
        fail(f"node_features must be [n, {NODE_DIM}], got {node_features.shape}")
    edges = []
    for idx, rec in enumerate(doc.get("edges", [])):
        try:
            kind = EdgeKind(rec["kind"])
            feats = np.asarray(rec["features"], dtype=np.float64)
            u, v = int(rec["u"]), int(rec["v"])
        except (KeyError, ValueError, TypeError):
            fail(f"edge {idx} malformed")
        if feats.shape != (EDGE_DIM,):
            fail(f"edge {idx} features must have length {EDGE_DIM}")
        if not (0 <= u < len(node_features) and 0 <= v < len(node_features)):
            fail(f"edge {idx} endpoints ({u}, {v}) out of range")
        edges.append(GraphEdge(u=u, v=v, kind=kind, features=feats))
    raw_labels = doc.get("labels", [])
    labels = np.array([0.0 if lab is None else float(lab) for lab in raw_labels])
    mask = np.array([lab is not None for lab in raw_labels], dtype=bool)
    return MolecularGraph(node_features=node_features, edges=edges,
                          labels=labels, mask=mask,
                          mol_id=str(doc.get("id", "")))


def write_graphs_jsonl(path, graphs):
    with open(path, "w", encoding="utf-8") as fh:
        for g in graphs:
            fh.write(json.dumps(graph_to_json_dict(g)) + "\n")


def read_graphs_jsonl(path) -> list[MolecularGraph]:
    graphs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                doc = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise MoleculeParseError(f"invalid JSON: {exc}",
                                         source=path, line=lineno)
            graphs.append(graph_from_json_dict(doc, source=path, line=lineno))
    return graphs
