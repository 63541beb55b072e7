"""Accuracy metrics against reference labels.

Per-cluster error is the fraction of a cluster outside its majority
reference class.  ``e_inf`` is the largest of these and ``e_avg`` their
plain sum (the literal definition, despite the name); ``e_mean`` is the
arithmetic mean for readers who expect an average.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .clustering import Clustering
from .errors import EmptyCluster, InvalidParameter, MissingLabel, Undefined


@dataclass(frozen=True, eq=False)
class ConfusionTable:
    """``counts[r, c]`` = members of cluster ``r`` carrying reference label ``c + 1``."""

    counts: np.ndarray
    n_unassigned: int = 0
    n_unlabeled: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def row_errors(self) -> list[float | None]:
        return [cluster_error(r) if r.sum() else None for r in self.counts]

    def to_json(self) -> dict:
        return {
            "counts": self.counts.tolist(),
            "errors": self.row_errors(),
            "identities": [cluster_identity(r) if r.sum() else None for r in self.counts],
            "n_unassigned": self.n_unassigned,
            "n_unlabeled": self.n_unlabeled,
        }

    def format(self, row_prefix: str = "C") -> str:
        k = self.counts.shape[1]
        header = [""] + [f"V_{j + 1}" for j in range(k)] + ["error"]
        rows = [header]
        for i, r in enumerate(self.counts):
            err = f"{cluster_error(r):.4f}" if r.sum() else "-"
            rows.append([f"{row_prefix}_{i + 1}"] + [str(int(v)) for v in r] + [err])
        widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
        return "\n".join(" ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows)


def confusion_table(c: Clustering, truth_labels, k: int | None = None) -> ConfusionTable:
    """Cross-tabulate assigned, labeled vertices; unassigned and unlabeled are counted apart."""
    truth = np.asarray(truth_labels, dtype=np.int64)
    if truth.shape != c.labels.shape:
        raise InvalidParameter("labels and clustering disagree on n")
    k = int(truth.max()) if k is None else k
    assigned = c.labels >= 0
    labeled = truth > 0
    use = assigned & labeled
    idx = c.labels[use] * k + (truth[use] - 1)
    counts = np.bincount(idx, minlength=c.n_clusters * k).reshape(c.n_clusters, k)
    return ConfusionTable(counts, int((~assigned).sum()), int((assigned & ~labeled).sum()))


def _row(counts_row):
    row = np.asarray(counts_row)
    if row.ndim != 1 or row.size == 0:
        raise InvalidParameter("expected a non-empty 1-d count vector")
    if np.any(row < 0):
        raise InvalidParameter("counts must be non-negative")
    if not row.any():
        raise EmptyCluster("cluster has no labeled members")
    return row


def cluster_identity(counts_row) -> int:
    """1-based index of the majority reference class; ties go to the smallest index."""
    return int(np.argmax(_row(counts_row))) + 1


def cluster_error(counts_row) -> float:
    row = _row(counts_row)
    return float(1.0 - row.max() / row.sum())


class ErrorSummary(NamedTuple):
    e_inf: float
    e_avg: float
    e_mean: float


def error_summary(table: ConfusionTable | np.ndarray) -> ErrorSummary:
    counts = table.counts if isinstance(table, ConfusionTable) else np.asarray(table)
    errors = [cluster_error(r) for r in counts if np.asarray(r).sum() > 0]
    if not errors:
        raise EmptyCluster("no non-empty cluster to summarize")
    return ErrorSummary(max(errors), float(sum(errors)), float(sum(errors) / len(errors)))


def zeta(members, truth_labels) -> float:
    """Share of ``members`` that belong to their most common reference class."""
    members = np.asarray(members, dtype=np.int64)
    if members.size == 0:
        raise InvalidParameter("zeta of an empty set")
    labs = np.asarray(truth_labels, dtype=np.int64)[members]
    if np.any(labs <= 0):
        raise MissingLabel("set contains unlabeled vertices")
    return float(np.bincount(labs).max() / members.size)


def _comb2(x):
    x = np.asarray(x, dtype=object)
    return int(sum(v * (v - 1) // 2 for v in x.ravel()))


def adjusted_rand_index(a, b) -> float:
    """Adjusted Rand index of two label vectors over the same vertices."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.size == 0:
        raise Undefined("ARI needs two equally long, non-empty labelings")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    index = _comb2(table)
    sum_a = _comb2(table.sum(axis=1))
    sum_b = _comb2(table.sum(axis=0))
    total = _comb2([a.size])
    expected = sum_a * sum_b / total if total else 0.0
    maximum = (sum_a + sum_b) / 2
    if maximum == expected:
        # both trivial (all singletons or one block) and hence identical
        return 1.0
    return float((index - expected) / (maximum - expected))


def partition_agreement(a, b) -> float:
    """ARI between two clusterings restricted to vertices assigned in both."""
    la = a.labels if isinstance(a, Clustering) else np.asarray(a)
    lb = b.labels if isinstance(b, Clustering) else np.asarray(b)
    if la.shape != lb.shape:
        raise InvalidParameter("clusterings cover different vertex sets")
    both = (la >= 0) & (lb >= 0)
    if not both.any():
        raise Undefined("no vertex is assigned in both clusterings")
    return adjusted_rand_index(la[both], lb[both])
