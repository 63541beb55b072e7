"""Approximate correlation graph from the most compressed pairs.

The graph links the top ``gamma`` percent of pairs ranked by compression
ratio.  Against known labels its quality is summarized by ``alpha`` (share
of same-cluster pairs that became edges) and ``beta`` (share of edges that
cross clusters).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, InvalidParameter, MissingLabel
from .ingest import as_label_array
from .pca import PairScores


def percent_count(percent: float, total: int) -> int:
    """``floor(percent / 100 * total)`` evaluated on the decimal value of ``percent``."""
    return math.floor(Fraction(repr(float(percent))) * total / 100)


def _check_percent(name, value):
    if not (0 < value <= 100):
        raise InvalidParameter(f"{name} must lie in (0, 100], got {value}")


@dataclass(frozen=True, eq=False)
class CorrelationGraph:
    """Undirected simple graph with CSR adjacency (sorted neighbor lists)."""

    n: int
    edges: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    gamma_percent: float | None = None

    @classmethod
    def from_edges(cls, n: int, edges, gamma_percent=None) -> "CorrelationGraph":
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise InvalidParameter("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise InvalidParameter("self-loops are not allowed")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        key = np.unique(lo * n + hi)
        lo, hi = key // n, key % n
        edges = np.column_stack([lo, hi])
        heads = np.concatenate([lo, hi])
        tails = np.concatenate([hi, lo])
        order = np.lexsort((tails, heads))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(heads, minlength=n), out=indptr[1:])
        return cls(n, edges, indptr, tails[order], gamma_percent)

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        pos = np.searchsorted(nb, v)
        return bool(pos < nb.size and nb[pos] == v)

    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def write_edgelist(self, path) -> None:
        """One ``i j`` line per edge, 0-based, ``i < j``."""
        with open(path, "w") as fh:
            for i, j in self.edges:
                fh.write(f"{i} {j}\n")

    @classmethod
    def read_edgelist(cls, path, n: int) -> "CorrelationGraph":
        data = np.loadtxt(path, dtype=np.int64, ndmin=2)
        return cls.from_edges(n, data.reshape(-1, 2))


@dataclass(frozen=True)
class GraphQuality:
    alpha: float
    beta: float


def build_correlation_graph(scores: PairScores, gamma_percent: float) -> CorrelationGraph:
    """Link the ``floor(gamma/100 * C(n,2))`` most compressed pairs.

    Ranking is by score descending with ``inf`` first; equal scores are
    broken by ``(i, j)`` lexicographic order.
    """
    _check_percent("gamma_percent", gamma_percent)
    count = percent_count(gamma_percent, len(scores))
    positions = scores.top(count)
    i, j = scores.pairs(positions)
    return CorrelationGraph.from_edges(scores.n, np.column_stack([i, j]), gamma_percent)


def _labels_for(truth, n, point_ids):
    labels = as_label_array(truth, n, point_ids)
    if np.any(labels <= 0):
        missing = int(np.flatnonzero(labels <= 0)[0])
        raise MissingLabel(f"vertex {missing} has no ground-truth label")
    return labels


def graph_quality(g: CorrelationGraph, truth, point_ids=None) -> GraphQuality:
    labels = _labels_for(truth, g.n, point_ids)
    sizes = np.bincount(labels)
    intra_pairs = int(np.sum(sizes * (sizes - 1) // 2))
    if g.n_edges == 0:
        return GraphQuality(0.0 if intra_pairs else 1.0, 0.0)
    same = labels[g.edges[:, 0]] == labels[g.edges[:, 1]]
    intra = int(same.sum())
    alpha = intra / intra_pairs if intra_pairs else 1.0
    beta = (g.n_edges - intra) / g.n_edges
    return GraphQuality(alpha, beta)


def compression_curve(scores: PairScores, truth, grid, point_ids=None) -> list[tuple[float, float]]:
    """Share of same-cluster pairs among the top ``p`` percent, for each ``p`` in ``grid``."""
    grid = list(grid)
    for p in grid:
        _check_percent("curve percent", p)
    labels = _labels_for(truth, scores.n, point_ids)
    if labels.shape[0] != scores.n:
        raise DimensionMismatch("labels and scores disagree on n")
    order = scores.order()
    i, j = scores.pairs(order)
    running = np.cumsum(labels[i] == labels[j])
    out = []
    for p in grid:
        count = percent_count(p, len(scores))
        frac = float(running[count - 1] / count) if count else math.nan
        out.append((float(p), frac))
    return out
