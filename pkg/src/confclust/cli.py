"""Command-line entry point: ``confclust {cluster,sweep,synth,eval,curve}``.

Exit status: 0 success, 2 bad input or parameter, 3 numeric failure (an
eigensolver did not converge), 4 sweep finished with failed cells.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .clustering import Clustering
from .config import DATA_FORMATS, STOP_RULES, load_config
from .assign import FINALIZE_POLICIES
from .corrgraph import compression_curve
from .errors import ConfclustError
from .evaluate import confusion_table, error_summary, partition_agreement
from .ingest import FEATURES_AS_ROWS, DataMatrix, POINTS_AS_ROWS, load_labels, write_dense_matrix, write_labels, write_sparse_matrix
from .pca import all_pair_scores, fit_pca, project
from .pipeline import load_inputs, run_pipeline, sweep
from .synth import NoiseSpec, VectorModelSpec, gen_vectors

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_NUMERIC = 3
EXIT_PARTIAL = 4


def _add_input_args(p):
    p.add_argument("--config", help="config file (INI sections: input, preprocess, params, output)")
    p.add_argument("--data", help="dense text matrix or Matrix Market file")
    p.add_argument("--data-format", choices=DATA_FORMATS)
    p.add_argument("--orientation", choices=(FEATURES_AS_ROWS, POINTS_AS_ROWS))
    p.add_argument("--ids", help="point id file for Matrix Market input")
    p.add_argument("--features", help="feature id file for Matrix Market input")
    p.add_argument("--labels", help="reference labels, point_id,label per line")
    p.add_argument("--library-size", type=float, help="scale every point to this total")
    p.add_argument("--log1p", action="store_const", const=True, help="apply log1p after scaling")


def _add_param_args(p, multi=False):
    nargs = "+" if multi else None
    p.add_argument("--k-prime", dest="k_prime", type=int, nargs=nargs)
    p.add_argument("--gamma", dest="gamma_percent", type=float, nargs=nargs, help="graph density, percent of pairs")
    p.add_argument("--delta", dest="delta_percent", type=float, nargs=nargs, help="neighbourhood size, percent of points")
    p.add_argument("--stop-threshold", type=int, help="prefix size below which extraction stops")
    p.add_argument("--stop-rule", choices=STOP_RULES)
    p.add_argument("--gap-ratio", type=float)
    p.add_argument("--min-z", type=float)
    p.add_argument("--target", type=int, help="cluster count for --stop-rule target_count")
    p.add_argument("--finalize", choices=FINALIZE_POLICIES)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", dest="dir", help="output directory")
    p.add_argument("--score-cache", help="binary pair-score cache to reuse or create")


_CONFIG_KEYS = (
    "data", "data_format", "orientation", "ids", "features", "labels", "library_size", "log1p",
    "stop_threshold", "stop_rule", "gap_ratio", "min_z", "target", "finalize", "seed", "dir", "score_cache",
)


def _config_from(args, grid=False):
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    if not grid:
        for k in ("k_prime", "gamma_percent", "delta_percent"):
            overrides[k] = getattr(args, k)
    return load_config(args.config, **overrides)


def _cmd_cluster(args):
    cfg = _config_from(args)
    report = run_pipeline(cfg)
    stages = report.payload["stages"]
    for s, info in stages.items():
        line = f"{s}: {info['n_clusters']} clusters, {info['unassigned']} unassigned"
        if "e_inf" in info:
            line += f", e_inf={info['e_inf']:.4f} e_avg={info['e_avg']:.4f}"
        print(line)
    if not cfg.dir:
        print(report.to_json())
    return EXIT_OK


def _cmd_sweep(args):
    cfg = _config_from(args, grid=True)
    result = sweep(cfg, args.k_prime, args.gamma_percent, args.delta_percent)
    for cell in result.cells:
        desc = f"k'={cell['k_prime']} gamma={cell['gamma_percent']} delta={cell['delta_percent']}"
        if cell["status"] == "ok":
            print(f"{desc}: {cell['n_primary']} primary clusters")
        else:
            print(f"{desc}: FAILED at {cell['failed_at']} ({cell['error']})")
    if not cfg.dir:
        print(result.to_json())
    return EXIT_PARTIAL if result.failed else EXIT_OK


def _cmd_synth(args):
    noise = NoiseSpec(args.noise, args.scale)
    sizes = tuple(args.sizes)
    spec = VectorModelSpec(k=len(sizes), d=args.d, sizes=sizes, distance_ratio=args.ratio, noise=noise, seed=args.seed)
    m, truth = gen_vectors(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.sparse:
        write_sparse_matrix(out / "matrix.mtx", DataMatrix(sp.csc_matrix(m.values), m.point_ids), out / "ids.txt")
    else:
        write_dense_matrix(out / "matrix.csv", m)
    write_labels(out / "labels.csv", m.point_ids, truth.to_array(m.point_ids))
    print(f"wrote {m.n_points} points x {m.n_features} features to {out}")
    return EXIT_OK


def _cmd_eval(args):
    ids, pred = Clustering.read_csv(args.predicted)
    truth = load_labels(args.truth)
    labels = truth.to_array(ids)
    table = confusion_table(pred, labels, truth.k)
    doc = {"confusion": table.to_json()}
    if table.total:
        s = error_summary(table)
        doc.update(e_inf=s.e_inf, e_avg=s.e_avg, e_mean=s.e_mean)
    ref = Clustering(np.where(labels > 0, labels - 1, -1), truth.k, "final")
    doc["ari"] = partition_agreement(pred, ref)
    print(table.format())
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_curve(args):
    cfg = _config_from(args)
    m, truth = load_inputs(cfg)
    if truth is None:
        raise ConfclustError("curve needs --labels")
    model = fit_pca(m, cfg.k_prime, seed=cfg.seed)
    scores = all_pair_scores(m, project(model, m), cfg.k_prime)
    curve = compression_curve(scores, truth, args.grid, m.point_ids)
    lines = ["percent,intra_fraction"] + [f"{p!r},{f!r}" for p, f in curve]
    text = "\n".join(lines) + "\n"
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confclust", description="Confident-set clustering of high-dimensional points.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="run the full pipeline once")
    _add_input_args(p)
    _add_param_args(p)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("sweep", help="run the pipeline over a k'/gamma/delta grid")
    _add_input_args(p)
    _add_param_args(p, multi=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("synth", help="write a synthetic dataset and its labels")
    p.add_argument("--out", required=True)
    p.add_argument("--d", type=int, default=400)
    p.add_argument("--sizes", type=int, nargs="+", default=[620, 560, 160, 580, 500, 450])
    p.add_argument("--ratio", type=float, default=0.95, help="mean intra / inter distance")
    p.add_argument("--noise", choices=("gaussian", "uniform"), default="gaussian")
    p.add_argument("--scale", type=float, default=1.0, help="noise std (gaussian) or half-width (uniform)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--sparse", action="store_true", help="write Matrix Market instead of CSV")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("eval", help="compare a cluster CSV with reference labels")
    p.add_argument("predicted", help="point_id,cluster rows (cluster 1-based or UNASSIGNED)")
    p.add_argument("truth", help="point_id,label rows")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("curve", help="share of same-label pairs among the top p%% compressed pairs")
    _add_input_args(p)
    p.add_argument("--k-prime", dest="k_prime", type=int)
    p.add_argument("--gamma", dest="gamma_percent", type=float, help=argparse.SUPPRESS)
    p.add_argument("--delta", dest="delta_percent", type=float, help=argparse.SUPPRESS)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid", type=float, nargs="+", default=[1, 2, 5, 10, 20, 50, 100])
    p.add_argument("--csv", help="write the curve here instead of stdout")
    p.set_defaults(func=_cmd_curve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfclustError as exc:
        where = f"[{exc.stage}] " if exc.stage else ""
        print(f"confclust: error: {where}{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"confclust: error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
