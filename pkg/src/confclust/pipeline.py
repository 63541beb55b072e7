"""End-to-end runs and parameter sweeps.

A run goes ingest -> pca -> corrgraph -> confident -> merge -> assign -> eval.
Its report has two top-level sections: ``report`` (everything that depends
only on inputs, config and seed) and ``runtime`` (wall-clock seconds, the
kernel backend, whether pair scores came from a cache, PCA diagnostics).
Two runs with the same inputs and config therefore produce byte-identical
``report`` sections, with or without a score cache.
"""

from __future__ import annotations

import itertools
import json
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .clustering import Clustering
from .config import RunConfig
from .confident import default_stop_threshold, extract_confident_sets
from .corrgraph import build_correlation_graph, graph_quality
from .errors import ConfclustError, ConvergenceWarning, EmptySet, FormatError, InvalidParameter, Undefined
from .evaluate import confusion_table, error_summary, partition_agreement
from .ingest import DataMatrix, GroundTruth, as_label_array, load_dense_matrix, load_labels, load_sparse_matrix, normalize
from .merge import delta_neighborhoods, form_primary_clusters
from .assign import finalize, majority_assign
from .pca import PairScores, all_pair_scores, fit_pca, project

STAGES = ("ingest", "pca", "corrgraph", "confident", "merge", "assign", "eval")
CLUSTER_STAGES = ("primary", "post_majority", "final")

TIE_RULES = {
    "pair_ranking": "score descending, inf first, ties by (i, j)",
    "eigenvector_ranking": "entry descending, ties by vertex index",
    "merge": "largest Z; ties by smallest (min, max) original set indices",
    "plurality": "largest overlap; ties and no overlap go to the lowest cluster",
}


def load_inputs(cfg: RunConfig) -> tuple[DataMatrix, GroundTruth | None]:
    """Read the dataset and optional labels named by ``cfg`` and apply normalization."""
    if cfg.data is None:
        raise InvalidParameter("no input data given")
    fmt = cfg.data_format
    if fmt == "auto":
        fmt = "mtx" if str(cfg.data).endswith((".mtx", ".mtx.gz")) else "dense"
    if fmt == "mtx":
        m = load_sparse_matrix(cfg.data, cfg.ids, cfg.features)
    else:
        m = load_dense_matrix(cfg.data, cfg.orientation)
    truth = load_labels(cfg.labels) if cfg.labels else None
    return m, truth


def _preprocess(cfg, m):
    if cfg.library_size is None and not cfg.log1p:
        return m
    return normalize(m, cfg.library_size, cfg.log1p)


@dataclass(eq=False)
class RunReport:
    payload: dict
    runtime: dict
    clusterings: dict[str, Clustering] = field(default_factory=dict)
    scores: PairScores | None = None
    merge: object = None
    point_ids: tuple[str, ...] = ()
    failed_at: str | None = None

    @property
    def primary(self) -> Clustering | None:
        return self.clusterings.get("primary")

    def payload_json(self) -> str:
        return json.dumps(self.payload, indent=2, sort_keys=True, allow_nan=False)

    def to_json(self) -> str:
        doc = {"report": self.payload, "runtime": self.runtime}
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json() + "\n")
        for stage, c in self.clusterings.items():
            c.write_csv(out / f"labels_{stage}.csv", self.point_ids)
        if self.merge is not None:
            self.merge.write_z_history(out / "z_history.csv")


def _stage_summary(c: Clustering, labels):
    out = {
        "n_clusters": c.n_clusters,
        "sizes": c.sizes.tolist(),
        "unassigned": int(c.unassigned.size),
    }
    if labels is not None:
        table = confusion_table(c, labels)
        out["confusion"] = table.to_json()
        if table.total:
            s = error_summary(table)
            out.update(e_inf=s.e_inf, e_avg=s.e_avg, e_mean=s.e_mean)
    return out


def run_pipeline(
    cfg: RunConfig,
    data: DataMatrix | None = None,
    truth: GroundTruth | np.ndarray | None = None,
    scores: PairScores | None = None,
) -> RunReport:
    """Run every stage for one configuration.

    ``data``/``truth`` bypass file loading; ``scores`` reuses precomputed
    pair scores (they must match the data and ``k_prime``).  On failure the
    raised error carries ``stage`` and ``report`` (the partial report,
    already written to ``cfg.dir`` if set).
    """
    payload: dict = {"config": cfg.to_dict()}
    runtime: dict = {"backend": kernels.BACKEND, "seconds": {}}
    report = RunReport(payload, runtime)
    stage = "ingest"
    clock = time.perf_counter()

    def done(name):
        nonlocal clock
        now = time.perf_counter()
        runtime["seconds"][name] = now - clock
        clock = now

    try:
        if data is None:
            data, truth = load_inputs(cfg)
        m = _preprocess(cfg, data)
        n = m.n_points
        report.point_ids = m.point_ids
        labels = None
        if truth is not None:
            labels = as_label_array(truth, n, m.point_ids)
            if not np.any(labels > 0):
                labels = None
        fully_labeled = labels is not None and bool(np.all(labels > 0))
        payload["data"] = {"n_points": n, "n_features": m.n_features, "labeled": labels is not None}
        done(stage)

        stage = "pca"
        if scores is None and cfg.score_cache and Path(cfg.score_cache).exists():
            scores = PairScores.load(cfg.score_cache)
        if scores is not None:
            if scores.n != n or scores.k_prime != cfg.k_prime:
                raise FormatError(
                    f"cached scores are for n={scores.n}, k'={scores.k_prime}; need n={n}, k'={cfg.k_prime}"
                )
            runtime["scores_from_cache"] = True
        else:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", ConvergenceWarning)
                model = fit_pca(m, cfg.k_prime, tol=cfg.pca_tol, seed=cfg.seed)
            for w in caught:
                if not issubclass(w.category, ConvergenceWarning):
                    warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
            scores = all_pair_scores(m, project(model, m), cfg.k_prime)
            if cfg.score_cache:
                scores.save(cfg.score_cache)
            runtime["scores_from_cache"] = False
            runtime["pca"] = {
                "eigenvalues": model.eigenvalues.tolist(),
                "converged": model.metadata["converged"],
                "iterations": model.metadata["iterations"],
            }
        payload["pca"] = {"k_prime": cfg.k_prime}
        report.scores = scores
        done(stage)

        stage = "corrgraph"
        g = build_correlation_graph(scores, cfg.gamma_percent)
        payload["graph"] = {"n_edges": g.n_edges, "gamma_percent": cfg.gamma_percent}
        if fully_labeled:
            q = graph_quality(g, labels)
            payload["graph"].update(alpha=q.alpha, beta=q.beta)
        done(stage)

        stage = "confident"
        derived = cfg.stop_threshold is None
        t_stop = default_stop_threshold(cfg.gamma_percent, n) if derived else cfg.stop_threshold
        ex = extract_confident_sets(g, t_stop, tol=cfg.eig_tol, max_iter=cfg.eig_max_iter, seed=cfg.seed)
        payload["confident"] = ex.to_json(labels if fully_labeled else None)
        if not ex.sets:
            raise EmptySet(f"no confident set found ({ex.stop_reason})")
        done(stage)

        stage = "merge"
        nb = delta_neighborhoods(scores, cfg.delta_percent)
        rule = cfg.stopping_rule()
        mr = form_primary_clusters(ex, nb, rule)
        report.merge = mr
        report.clusterings["primary"] = mr.clustering
        payload["merge"] = {
            "status": mr.status,
            "rule": rule.describe(),
            "neighborhood_size": nb.size,
            "lineage": [list(g_) for g_ in mr.lineage],
            "z_history": mr.history_json(),
        }
        done(stage)

        stage = "assign"
        post = majority_assign(mr.clustering, nb)
        final = finalize(post, nb, cfg.finalize)
        report.clusterings["post_majority"] = post
        report.clusterings["final"] = final
        payload["assign"] = {"majority_t": post.metadata["majority_t"], "finalize": cfg.finalize}
        if "recurse" in final.metadata:
            payload["assign"]["recurse"] = final.metadata["recurse"]
        done(stage)

        stage = "eval"
        payload["stages"] = {s: _stage_summary(report.clusterings[s], labels) for s in CLUSTER_STAGES}
        payload["interpretation"] = {
            "stop_threshold": t_stop,
            "stop_threshold_derived": derived,
            "percent_units": "gamma and delta are percentages",
            "e_avg": "sum of per-cluster errors; e_mean is their mean",
            "ties": TIE_RULES,
        }
        done(stage)
    except ConfclustError as exc:
        exc.stage = stage
        exc.report = report
        report.failed_at = stage
        payload["failed_at"] = {"stage": stage, "error": type(exc).__name__, "message": str(exc)}
        if cfg.dir:
            report.write(cfg.dir)
        raise
    if cfg.dir:
        report.write(cfg.dir)
    return report


@dataclass(eq=False)
class SweepReport:
    cells: list[dict]
    reports: list[RunReport | None]
    ari: list[list[float | None]]

    @property
    def failed(self) -> list[dict]:
        return [c for c in self.cells if c["status"] != "ok"]

    def to_json(self) -> str:
        return json.dumps({"cells": self.cells, "ari": self.ari}, indent=2, sort_keys=True, allow_nan=False)


def sweep(
    base: RunConfig,
    k_primes=None,
    gammas=None,
    deltas=None,
    data: DataMatrix | None = None,
    truth=None,
    use_cache: bool = True,
) -> SweepReport:
    """Run the pipeline over the grid ``k_primes x gammas x deltas``.

    Pair scores are computed once per ``k_prime`` and shared by the cells
    that use it.  A failing cell is recorded and the sweep carries on.
    """
    k_primes = list(k_primes or [base.k_prime])
    gammas = list(gammas or [base.gamma_percent])
    deltas = list(deltas or [base.delta_percent])
    if data is None:
        data, truth = load_inputs(base)
    cache: dict[int, PairScores] = {}
    cells, reports = [], []
    for kp, gamma, delta in itertools.product(k_primes, gammas, deltas):
        cfg = base.replace(k_prime=kp, gamma_percent=gamma, delta_percent=delta, dir=None, score_cache=None)
        cell = {"k_prime": kp, "gamma_percent": gamma, "delta_percent": delta}
        try:
            rep = run_pipeline(cfg, data, truth, cache.get(kp) if use_cache else None)
        except ConfclustError as exc:
            cell.update(status="failed", failed_at=exc.stage, error=f"{type(exc).__name__}: {exc}")
            rep = exc.report if getattr(exc, "report", None) is not None else None
            if rep is not None and rep.scores is not None and use_cache:
                cache.setdefault(kp, rep.scores)
            cells.append(cell)
            reports.append(None)
            continue
        if use_cache:
            cache.setdefault(kp, rep.scores)
        stages = rep.payload["stages"]
        cell["status"] = "ok"
        cell["n_primary"] = stages["primary"]["n_clusters"]
        for s in CLUSTER_STAGES:
            cell[f"unassigned_{s}"] = stages[s]["unassigned"]
            for key in ("e_inf", "e_avg", "e_mean"):
                if key in stages[s]:
                    cell[f"{key}_{s}"] = stages[s][key]
        cells.append(cell)
        reports.append(rep)

    size = len(cells)
    ari: list[list[float | None]] = [[None] * size for _ in range(size)]
    for a in range(size):
        for b in range(a, size):
            if reports[a] is None or reports[b] is None:
                continue
            try:
                v = partition_agreement(reports[a].primary, reports[b].primary)
            except Undefined:
                v = None
            ari[a][b] = ari[b][a] = v
    result = SweepReport(cells, reports, ari)
    if base.dir:
        out = Path(base.dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.json").write_text(result.to_json() + "\n")
    return result


__all__ = ["RunReport", "SweepReport", "run_pipeline", "sweep", "load_inputs", "STAGES"]
