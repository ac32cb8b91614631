"""Fourier-series KAN layers and KAN-based molecular graph networks.

The numerical core is plain numpy (float64) with hand-derived analytic
gradients; a thin scikit-learn-style estimator layer
(:mod:`kagnn.estimators`) wraps it for fit/transform/predict workflows,
and the ``kagnn`` console script exposes featurization, training,
evaluation, gradient checking and the univariate fitting harness.
"""

from .elements import ElementInfo, element_info, known_elements
from .errors import (
    EvaluationError,
    FeaturizationError,
    GradientCheckError,
    KagnnError,
    MoleculeParseError,
    TrainingDivergedError,
)
from .fourier import FourierKanLayer, KanStack, LayerGradients, parameter_count
from .graphs import (
    EDGE_DIM,
    NODE_DIM,
    EdgeKind,
    GraphEdge,
    MolecularGraph,
    build_graph,
    featurize_edge,
    featurize_node,
    read_graphs_jsonl,
    write_graphs_jsonl,
)
from .metrics import macro_roc_auc, roc_auc_binary
from .models import (
    AffineMap,
    GraphBatch,
    KaGatModel,
    KaGnnModel,
    bce_loss,
    bce_loss_and_logit_grad,
    init_model,
    load_checkpoint,
    save_checkpoint,
    sigmoid,
)
from .molecules import (
    Atom,
    Bond,
    BondDirection,
    BondType,
    Molecule,
    parse_molecule_json,
    parse_sdf,
    read_molecules_jsonl,
    read_sdf,
    write_molecules_jsonl,
)
from .optim import Adam
from .splits import SplitSpec, load_split, random_split
from .training import (
    EpochRecord,
    RunReport,
    TrainConfig,
    evaluate_model,
    fit_on_split,
    train_loop,
)

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "AffineMap",
    "Atom",
    "Bond",
    "BondDirection",
    "BondType",
    "EDGE_DIM",
    "ElementInfo",
    "EpochRecord",
    "EvaluationError",
    "EdgeKind",
    "FeaturizationError",
    "FourierKanLayer",
    "GradientCheckError",
    "GraphBatch",
    "GraphEdge",
    "KaGatModel",
    "KaGnnModel",
    "KagnnError",
    "KanStack",
    "LayerGradients",
    "MolecularGraph",
    "Molecule",
    "MoleculeParseError",
    "NODE_DIM",
    "RunReport",
    "SplitSpec",
    "TrainConfig",
    "TrainingDivergedError",
    "bce_loss",
    "bce_loss_and_logit_grad",
    "build_graph",
    "element_info",
    "evaluate_model",
    "featurize_edge",
    "featurize_node",
    "fit_on_split",
    "init_model",
    "known_elements",
    "load_checkpoint",
    "load_split",
    "macro_roc_auc",
    "parameter_count",
    "parse_molecule_json",
    "parse_sdf",
    "random_split",
    "read_graphs_jsonl",
    "read_molecules_jsonl",
    "read_sdf",
    "roc_auc_binary",
    "save_checkpoint",
    "sigmoid",
    "train_loop",
    "write_graphs_jsonl",
    "write_molecules_jsonl",
]
