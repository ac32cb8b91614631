"""Command-line interface: ``kagnn <subcommand>``.

Subcommands
    featurize   molecules (JSON-lines or SDF) -> featurized graph JSON-lines
    train       train a model, write checkpoint + report + per-epoch CSV
    eval        evaluate a checkpoint on a dataset (optionally its test fold)
    fitfn       univariate fitting harness (six targets, two arms)
    gradcheck   finite-difference verification of all analytic gradients
    sweep       hyperparameter grids (K, cutoff, batch/LR/layers) from a manifest

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

JSON outputs are byte-deterministic for a fixed seed and thread count;
wall-clock metadata goes to a separate ``meta.json``.  Relative data
paths that do not exist are retried under ``$KAGNN_DATA_DIR``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import (
    EvaluationError,
    GradientCheckError,
    KagnnError,
    MoleculeParseError,
    TrainingDivergedError,
)
from .fitfn import TARGETS, make_task, run_fit, sweep_k
from .gradcheck import run_gradcheck
from .graphs import build_graph, read_graphs_jsonl, write_graphs_jsonl
from .metrics import macro_roc_auc
from .models import GraphBatch, load_checkpoint, save_checkpoint
from .molecules import read_molecules_jsonl, read_sdf
from .splits import load_split, random_split
from .training import TrainConfig, train_loop

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; the contract wants 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _resolve_data_path(path_str):
    path = Path(path_str)
    if path.exists():
        return path
    root = os.environ.get("KAGNN_DATA_DIR")
    if root and not path.is_absolute():
        candidate = Path(root) / path
        if candidate.exists():
            return candidate
        raise FileNotFoundError(
            f"data file not found: {path_str} (also tried {candidate})"
        )
    raise FileNotFoundError(f"data file not found: {path_str}")


def _read_molecules(path, fmt=None):
    path = _resolve_data_path(path)
    if fmt is None:
        fmt = "sdf" if path.suffix.lower() == ".sdf" else "json"
    if fmt == "sdf":
        return read_sdf(path)
    return read_molecules_jsonl(path)


def _load_graphs(data_path, fmt, featurized, cutoff):
    if featurized:
        return read_graphs_jsonl(_resolve_data_path(data_path))
    molecules = _read_molecules(data_path, fmt)
    return [build_graph(mol, cutoff=cutoff) for mol in molecules]


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _write_meta(out_dir, t_start):
    _write_json(Path(out_dir) / "meta.json", {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_clock_seconds": time.time() - t_start,
    })


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# --- featurize ---------------------------------------------------------------

def cmd_featurize(args):
    molecules = _read_molecules(args.input, args.format)
    graphs = [build_graph(mol, cutoff=args.cutoff) for mol in molecules]
    write_graphs_jsonl(args.output, graphs)
    cov = sum(g.edge_counts()[0] for g in graphs)
    cut = sum(g.edge_counts()[1] for g in graphs)
    print(f"featurize: {len(graphs)} molecules -> {args.output} "
          f"(cutoff {args.cutoff} A, {cov} covalent edges, {cut} cutoff edges)")
    return EXIT_OK


# --- train -------------------------------------------------------------------

def _config_from_args(args):
    if args.config:
        with open(_resolve_data_path(args.config), encoding="utf-8") as fh:
            base = TrainConfig.from_json_dict(json.load(fh))
    else:
        base = TrainConfig()
    return base.with_overrides(
        variant=args.variant, n_harmonics=args.k, n_layers=args.layers,
        hidden_dim=args.hidden_dim, batch_size=args.batch_size,
        learning_rate=args.lr, epochs=args.epochs, cutoff=args.cutoff,
        seed=args.seed, patience=args.patience, threads=args.threads,
    )


def _report_files(out_dir, report, model):
    out_dir = Path(out_dir)
    save_checkpoint(out_dir / "checkpoint.json", model,
                    cutoff=report.config.cutoff)
    _write_json(out_dir / "report.json", report.to_json_dict())
    _write_csv(out_dir / "epochs.csv", ("epoch", "train_loss", "valid_auc"),
               [(r.epoch, r.train_loss, r.valid_auc) for r in report.epochs])


def cmd_train(args):
    t_start = time.time()
    config = _config_from_args(args)
    graphs = _load_graphs(args.data, args.format, args.featurized,
                          config.cutoff)
    if not graphs:
        raise ValueError(f"no molecules in {args.data}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    external_split = None
    if args.split:
        external_split = load_split(_resolve_data_path(args.split), len(graphs))

    runs = []
    for r in range(args.repeats):
        run_config = config.with_overrides(seed=config.seed + r)
        if external_split is not None:
            split = external_split
            seed_note = "external split; seed varies model init and shuffling"
        else:
            split = random_split(len(graphs), seed=run_config.seed)
            seed_note = "seed varies split, model init and shuffling"
        report, model = train_loop(graphs, run_config, split)
        run_dir = out_dir if args.repeats == 1 else out_dir / f"run_{r}"
        run_dir.mkdir(parents=True, exist_ok=True)
        _report_files(run_dir, report, model)
        runs.append({
            "seed": run_config.seed,
            "seed_note": seed_note,
            "test_auc": report.test_auc,
            "best_valid_auc": report.best_valid_auc,
            "best_epoch": report.best_epoch,
            "epochs_run": len(report.epochs),
            "parameter_count": report.parameter_count,
        })
        print(f"run {r}: seed {run_config.seed}, "
              f"parameters {report.parameter_count}, "
              f"best epoch {report.best_epoch}, test AUC {report.test_auc}")

    aucs = [run["test_auc"] for run in runs if run["test_auc"] is not None]
    summary = {
        "config": config.to_json_dict(),
        "repeats": args.repeats,
        "runs": runs,
        "test_auc_mean": float(np.mean(aucs)) if aucs else None,
        "test_auc_std": float(np.std(aucs)) if aucs else None,
    }
    _write_json(out_dir / "summary.json", summary)
    _write_meta(out_dir, t_start)
    if aucs:
        print(f"test AUC mean {summary['test_auc_mean']:.4f} "
              f"+/- {summary['test_auc_std']:.4f} over {args.repeats} run(s)")
    return EXIT_OK


# --- eval --------------------------------------------------------------------

def cmd_eval(args):
    model, checkpoint_cutoff = load_checkpoint(_resolve_data_path(args.checkpoint))
    cutoff = args.cutoff if args.cutoff is not None else checkpoint_cutoff
    graphs = _load_graphs(args.data, args.format, args.featurized, cutoff)
    if not graphs:
        raise ValueError(f"no molecules in {args.data}")
    if args.split:
        split = load_split(_resolve_data_path(args.split), len(graphs))
        graphs = [graphs[i] for i in split.test]
        fold = "test fold"
    else:
        fold = "all molecules"
    batch = GraphBatch(graphs)
    trace = model.forward(batch)
    macro, per_task = macro_roc_auc(trace.probabilities, batch.labels,
                                    batch.mask.astype(bool))
    print(f"eval: {len(graphs)} graphs ({fold}), "
          f"parameters {model.parameter_count()}, macro ROC-AUC {macro:.4f}")
    for t, auc in enumerate(per_task):
        status = "skipped (single-class)" if auc is None else f"{auc:.4f}"
        print(f"  task {t}: {status}")
    if args.out:
        _write_json(args.out, {
            "n_graphs": len(graphs),
            "fold": fold,
            "parameter_count": model.parameter_count(),
            "macro_auc": macro,
            "per_task": per_task,
        })
    return EXIT_OK


# --- fitfn -------------------------------------------------------------------

def cmd_fitfn(args):
    t_start = time.time()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.sweep_k:
        k_list = [int(tok) for tok in args.sweep_k.split(",") if tok.strip()]
        target = "polynomial" if args.target == "all" else args.target
        results = sweep_k(k_list, target=target,
                          seed=args.seed, n_samples=args.n_samples)
        _write_csv(out_dir / "sweep_k.csv",
                   ("k", "train_mse", "test_mse", "parameter_count"),
                   [(res.n_harmonics, res.train_mse, res.test_mse,
                     res.parameter_count) for res in results])
        summary = [{k: v for k, v in res.to_json_dict().items()
                    if not k.startswith("grid_")} for res in results]
        _write_json(out_dir / "sweep_summary.json", {"runs": summary})
        _write_meta(out_dir, t_start)
        for res in results:
            print(f"K={res.n_harmonics:4d}  train {res.train_mse:.3e}  "
                  f"test {res.test_mse:.3e}  params {res.parameter_count}")
        return EXIT_OK

    targets = sorted(TARGETS) if args.target == "all" else [args.target]
    arms = ("kan", "mlp") if args.arm == "both" else (args.arm,)
    summary_rows = []
    for target in targets:
        task = make_task(target, n_harmonics=args.k, n_samples=args.n_samples)
        for arm in arms:
            res = run_fit(task, arm, seed=args.seed)
            _write_csv(out_dir / f"fit_{target}_{arm}.csv",
                       ("x", "target", "prediction"),
                       list(zip(res.grid_x, res.grid_target,
                                res.grid_prediction)))
            summary_rows.append({k: v for k, v in res.to_json_dict().items()
                                 if not k.startswith("grid_")})
            print(f"{target:13s} {arm:4s} K={res.n_harmonics:4d} "
                  f"train {res.train_mse:.3e}  test {res.test_mse:.3e}  "
                  f"params {res.parameter_count}")
    _write_json(out_dir / "summary.json", {"runs": summary_rows})
    _write_meta(out_dir, t_start)
    return EXIT_OK


# --- gradcheck ---------------------------------------------------------------

def cmd_gradcheck(args):
    variants = (("kagnn", "kagat") if args.variant == "both"
                else (args.variant,))
    n_cases = 20 if args.quick else args.cases
    n_graphs = max(3, args.graphs if not args.quick else 3)
    results, ok = run_gradcheck(seed=args.seed, variants=variants,
                                n_cases=n_cases, n_graphs=n_graphs,
                                corrupt=args.corrupt_gradients)
    width = max(len(r.group) for r in results)
    print(f"{'group'.ljust(width)}  {'max_rel_err':>12}  {'tol':>8}  status")
    for r in results:
        status = "ok" if r.ok else "FAIL"
        print(f"{r.group.ljust(width)}  {r.max_rel_err:12.3e}  "
              f"{r.tol:8.0e}  {status}")
    if not ok:
        print("gradient check FAILED", file=sys.stderr)
        return EXIT_NUMERIC
    print("all gradient groups within tolerance")
    return EXIT_OK


# --- sweep -------------------------------------------------------------------

_SWEEP_AXES = ("n_harmonics", "cutoff", "batch_size", "learning_rate",
               "n_layers", "variant")


def cmd_sweep(args):
    t_start = time.time()
    with open(_resolve_data_path(args.manifest), encoding="utf-8") as fh:
        manifest = json.load(fh)
    unknown = set(manifest) - {"data", "format", "featurized", "base", "axes",
                               "repeats", "split"}
    if unknown:
        raise ValueError(f"unknown manifest fields: {sorted(unknown)}")
    if "data" not in manifest or "axes" not in manifest:
        raise ValueError("manifest needs 'data' and 'axes'")
    axes = manifest["axes"]
    bad_axes = set(axes) - set(_SWEEP_AXES)
    if bad_axes:
        raise ValueError(
            f"unsupported sweep axes {sorted(bad_axes)}; "
            f"supported: {_SWEEP_AXES}"
        )
    featurized = bool(manifest.get("featurized", False))
    if "cutoff" in axes and featurized:
        raise ValueError(
            "the cutoff axis needs raw molecules (featurized graphs have "
            "their edges baked in)"
        )
    base = TrainConfig.from_json_dict(manifest.get("base", {}))
    repeats = int(manifest.get("repeats", 1))
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")

    molecules = None
    if featurized:
        base_graphs = read_graphs_jsonl(_resolve_data_path(manifest["data"]))
    else:
        molecules = _read_molecules(manifest["data"], manifest.get("format"))
        base_graphs = [build_graph(m, cutoff=base.cutoff) for m in molecules]
    if not base_graphs:
        raise ValueError("sweep dataset is empty")
    n = len(base_graphs)
    external_split = (load_split(_resolve_data_path(manifest["split"]), n)
                      if manifest.get("split") else None)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    axis_reports = {}
    csv_rows = []
    for axis, values in axes.items():
        if not isinstance(values, list) or not values:
            raise ValueError(f"axis {axis!r} needs a non-empty list of values")
        entries = []
        for value in values:
            config = base.with_overrides(**{axis: value})
            if axis == "cutoff":
                graphs = [build_graph(m, cutoff=config.cutoff)
                          for m in molecules]
            else:
                graphs = base_graphs
            cov = sum(g.edge_counts()[0] for g in graphs)
            cut = sum(g.edge_counts()[1] for g in graphs)
            aucs = []
            param_count = None
            for r in range(repeats):
                run_config = config.with_overrides(seed=config.seed + r)
                split = (external_split if external_split is not None
                         else random_split(n, seed=run_config.seed))
                report, _model = train_loop(graphs, run_config, split)
                aucs.append(report.test_auc)
                param_count = report.parameter_count
            kept = [a for a in aucs if a is not None]
            entry = {
                "value": value,
                "test_aucs": aucs,
                "test_auc_mean": float(np.mean(kept)) if kept else None,
                "test_auc_std": float(np.std(kept)) if kept else None,
                "parameter_count": param_count,
                "edge_counts": {"covalent": cov, "cutoff": cut},
            }
            entries.append(entry)
            csv_rows.append((axis, value, entry["test_auc_mean"],
                             entry["test_auc_std"], param_count, cov, cut))
            print(f"sweep {axis}={value}: mean test AUC "
                  f"{entry['test_auc_mean']}, params {param_count}, "
                  f"edges {cov}+{cut}")
        axis_reports[axis] = entries

    _write_json(out_dir / "sweep_report.json", {
        "base": base.to_json_dict(),
        "repeats": repeats,
        "split": "external" if external_split is not None else "random-seeded",
        "axes": axis_reports,
    })
    _write_csv(out_dir / "sweep_summary.csv",
               ("axis", "value", "test_auc_mean", "test_auc_std",
                "parameter_count", "covalent_edges", "cutoff_edges"),
               csv_rows)
    _write_meta(out_dir, t_start)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="kagnn",
                     description="Fourier KAN molecular graph networks")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("featurize", help="molecules -> featurized graphs")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("json", "sdf"), default=None,
                   help="input format (default: by file extension)")
    p.add_argument("--cutoff", type=float, default=5.0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("json", "sdf"), default=None)
    p.add_argument("--featurized", action="store_true",
                   help="data is featurized graph JSON-lines")
    p.add_argument("--config", default=None, help="TrainConfig JSON file")
    p.add_argument("--split", default=None, help="split JSON file")
    p.add_argument("--out", required=True)
    p.add_argument("--variant", choices=("kagnn", "kagat"), default=None)
    p.add_argument("--k", type=int, default=None, help="harmonics per layer")
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--hidden-dim", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--cutoff", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--repeats", type=int, default=1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("json", "sdf"), default=None)
    p.add_argument("--featurized", action="store_true")
    p.add_argument("--split", default=None,
                   help="evaluate only the split's test fold")
    p.add_argument("--cutoff", type=float, default=None,
                   help="override the checkpoint's featurization cutoff")
    p.add_argument("--out", default=None, help="write metrics JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fitfn", help="univariate fitting harness")
    p.add_argument("--target", choices=sorted(TARGETS) + ["all"],
                   default="all")
    p.add_argument("--arm", choices=("kan", "mlp", "both"), default="both")
    p.add_argument("--k", type=int, default=None,
                   help="harmonics override (default: target's reference K)")
    p.add_argument("--n-samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweep-k", default=None,
                   help="comma-separated K list; runs the KAN arm per K")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fitfn)

    p = sub.add_parser("gradcheck", help="finite-difference gradient audit")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=100,
                   help="random layer cases")
    p.add_argument("--graphs", type=int, default=10,
                   help="molecules in the model-level check")
    p.add_argument("--variant", choices=("kagnn", "kagat", "both"),
                   default="both")
    p.add_argument("--quick", action="store_true",
                   help="smaller suite for smoke testing")
    p.add_argument("--corrupt-gradients", action="store_true",
                   help=argparse.SUPPRESS)  # negative-control test hook
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("sweep", help="hyperparameter grids from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (TrainingDivergedError, GradientCheckError, FloatingPointError) as exc:
        print(f"kagnn {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MoleculeParseError, EvaluationError, KagnnError, ValueError,
            OSError, json.JSONDecodeError) as exc:
        print(f"kagnn {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
