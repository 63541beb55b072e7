"""Spectral extraction of disjoint confident sets.

Each round takes the top eigenvector of the residual graph, ranks its
vertices by eigenvector entry, keeps the longest prefix that is at least
half dense, drops prefix vertices whose induced degree is at most half the
prefix size, and removes the survivors from the residual graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corrgraph import CorrelationGraph
from .errors import ConvergenceError, EmptySet, InvalidParameter, NoEdges


def default_stop_threshold(gamma_percent: float, n: int) -> int:
    """``max(20, round(2/3 * gamma * 100 * n / 5000))``, rounding halves up."""
    return max(20, int(math.floor((2.0 / 3.0) * gamma_percent * 100 * (n / 5000) + 0.5)))


class ResidualView:
    """The subgraph of ``graph`` induced on vertices still marked alive."""

    def __init__(self, graph: CorrelationGraph, alive=None):
        self.graph = graph
        if alive is None:
            alive = np.ones(graph.n, dtype=bool)
        self.alive = np.asarray(alive, dtype=bool)
        self.vertices = np.flatnonzero(self.alive)
        keep = self.alive[graph.edges[:, 0]] & self.alive[graph.edges[:, 1]]
        self.edges = graph.edges[keep]

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def local_adjacency(self):
        """Adjacency restricted to ``self.vertices`` (local indexing)."""
        import scipy.sparse as sp

        local = np.full(self.n, -1, dtype=np.int64)
        local[self.vertices] = np.arange(self.vertices.size)
        a, b = local[self.edges[:, 0]], local[self.edges[:, 1]]
        m = self.vertices.size
        data = np.ones(2 * a.size)
        return sp.csr_matrix((data, (np.concatenate([a, b]), np.concatenate([b, a]))), shape=(m, m))


def _as_view(g):
    return g if isinstance(g, ResidualView) else ResidualView(g)


@dataclass
class EigenInfo:
    eigenvalue: float
    iterations: int
    residual: float


def top_eigenvector(g, tol: float = 1e-8, max_iter: int = 100_000, seed: int = 0, return_info: bool = False):
    """Dominant adjacency eigenpair of a (residual) graph by power iteration.

    Iterates on ``A + I`` from a seeded positive start so bipartite pieces
    cannot oscillate.  Converged when ``||Av - lam v|| <= tol * max(lam, 1)``.
    Entries below ``100 * tol`` in magnitude (the size of leftover
    components at convergence) are snapped to zero so vertices outside the
    dominant component tie and fall back to index order.
    Returns ``(eigenvalue, vector)`` where ``vector`` has one entry per
    vertex of the full graph (zero for removed vertices); with
    ``return_info`` an :class:`EigenInfo` is appended.
    """
    view = _as_view(g)
    if view.n_edges == 0:
        raise NoEdges("graph has no edges")
    adj = view.local_adjacency()
    rng = np.random.default_rng(seed)
    x = rng.random(adj.shape[0]) + 0.5
    x /= np.linalg.norm(x)
    best = (math.inf, 0.0, x)
    lam = 0.0
    for it in range(1, max_iter + 1):
        ax = adj @ x
        lam = float(x @ ax)
        res = float(np.linalg.norm(ax - lam * x))
        if res < best[0]:
            best = (res, lam, x)
        if res <= tol * max(lam, 1.0):
            break
        y = ax + x
        x = y / np.linalg.norm(y)
    else:
        res, lam, x = best
        full = np.zeros(view.n)
        full[view.vertices] = x
        raise ConvergenceError(
            f"power iteration stalled at residual {res:.3g} after {max_iter} iterations",
            eigenvalue=lam, vector=full, residual=res,
        )
    x = np.where(np.abs(x) < 100 * tol, 0.0, x)
    x /= np.linalg.norm(x)
    total = x.sum()
    if total < 0 or (total == 0 and x[np.flatnonzero(x)[0]] < 0):
        x = -x
    full = np.zeros(view.n)
    full[view.vertices] = x
    if return_info:
        return lam, full, EigenInfo(lam, it, res)
    return lam, full


def select_dense_prefix(v, g) -> np.ndarray:
    """Longest prefix (``t >= 3``) of the eigenvector ranking that is half dense.

    Residual vertices are ranked by entry of ``v`` descending, ties by
    index.  Returns the prefix vertices in rank order, or an empty array if
    no ``t >= 3`` has at least ``C(t, 2) / 2`` induced edges.
    """
    view = _as_view(g)
    v = np.asarray(v, dtype=np.float64)
    verts = view.vertices
    if verts.size < 3 or view.n_edges == 0:
        return np.empty(0, dtype=np.int64)
    ranked = verts[np.lexsort((verts, -v[verts]))]
    rank = np.full(view.n, -1, dtype=np.int64)
    rank[ranked] = np.arange(ranked.size)
    # an edge joins the prefix once its later endpoint does
    joins = np.maximum(rank[view.edges[:, 0]], rank[view.edges[:, 1]])
    edges_upto = np.cumsum(np.bincount(joins, minlength=ranked.size))
    t = np.arange(1, ranked.size + 1, dtype=np.int64)
    ok = (4 * edges_upto >= t * (t - 1)) & (t >= 3)
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return np.empty(0, dtype=np.int64)
    return ranked[: hits[-1] + 1]


def induced_degrees(vertices, g) -> np.ndarray:
    view = _as_view(g)
    vertices = np.asarray(vertices, dtype=np.int64)
    inside = np.zeros(view.n, dtype=bool)
    inside[vertices] = True
    e = view.edges[inside[view.edges[:, 0]] & inside[view.edges[:, 1]]]
    deg = np.bincount(e.ravel(), minlength=view.n)
    return deg[vertices]


@dataclass(frozen=True, eq=False)
class ConfidentSet:
    members: np.ndarray
    order_found: int
    prefix_size_c: int
    mean_degree_filter: float
    prefix: np.ndarray = field(repr=False)
    eigenvalue: float = float("nan")

    def __len__(self):
        return self.members.size


def filter_low_degree(prefix, g, order_found: int = 0) -> ConfidentSet:
    """Keep prefix vertices whose induced degree is strictly above ``c / 2``."""
    prefix = np.asarray(prefix, dtype=np.int64)
    if prefix.size == 0:
        raise InvalidParameter("prefix must be non-empty")
    c = prefix.size
    deg = induced_degrees(prefix, g)
    keep = np.sort(prefix[2 * deg > c])
    if keep.size == 0:
        raise EmptySet(f"no vertex of the {c}-vertex prefix has induced degree > {c / 2}")
    return ConfidentSet(keep, order_found, c, c / 2, prefix)


@dataclass(eq=False)
class ExtractionResult:
    sets: list[ConfidentSet]
    remaining: np.ndarray
    eigen_history: list[EigenInfo]
    n: int
    stop_threshold: int
    stop_reason: str

    def labels(self) -> np.ndarray:
        """Per-vertex set index (0-based order found), ``-1`` for remaining vertices."""
        out = np.full(self.n, -1, dtype=np.int64)
        for s in self.sets:
            out[s.members] = s.order_found
        return out

    def to_json(self, truth_labels=None) -> dict:
        from .evaluate import zeta

        rows = []
        for s in self.sets:
            row = {"order": s.order_found, "size": int(s.members.size), "c": s.prefix_size_c}
            if truth_labels is not None:
                row["zeta"] = zeta(s.members, truth_labels)
            rows.append(row)
        return {
            "stop_threshold": self.stop_threshold,
            "stop_reason": self.stop_reason,
            "sets": rows,
            "remaining": int(self.remaining.size),
            "eigen_history": [
                {"eigenvalue": h.eigenvalue, "iterations": h.iterations, "residual": h.residual}
                for h in self.eigen_history
            ],
        }


def extract_confident_sets(
    g: CorrelationGraph,
    stop_threshold: int,
    tol: float = 1e-8,
    max_iter: int = 100_000,
    seed: int = 0,
) -> ExtractionResult:
    """Repeat eigenvector -> dense prefix -> degree filter until the prefix shrinks below the threshold.

    The set from the round whose prefix first falls below
    ``stop_threshold`` is kept; extraction also ends when the residual graph
    has no edges, no half-dense prefix exists, or the filter empties.
    """
    if stop_threshold < 3:
        raise InvalidParameter("stop threshold must be at least 3")
    alive = np.ones(g.n, dtype=bool)
    sets: list[ConfidentSet] = []
    history: list[EigenInfo] = []
    reason = "no_edges"
    rnd = 0
    while True:
        view = ResidualView(g, alive)
        if view.n_edges == 0:
            reason = "no_edges"
            break
        try:
            _, v, info = top_eigenvector(view, tol=tol, max_iter=max_iter, seed=seed + rnd, return_info=True)
        except ConvergenceError as exc:
            exc.round_index = rnd
            raise
        history.append(info)
        prefix = select_dense_prefix(v, view)
        if prefix.size == 0:
            reason = "no_dense_prefix"
            break
        try:
            cs = filter_low_degree(prefix, view, order_found=rnd)
        except EmptySet:
            reason = "empty_filter"
            break
        cs = ConfidentSet(cs.members, rnd, cs.prefix_size_c, cs.mean_degree_filter, cs.prefix, info.eigenvalue)
        sets.append(cs)
        alive[cs.members] = False
        rnd += 1
        if prefix.size < stop_threshold:
            reason = "below_threshold"
            break
    return ExtractionResult(sets, np.flatnonzero(alive), history, g.n, stop_threshold, reason)
