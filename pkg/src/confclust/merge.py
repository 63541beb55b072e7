"""Greedy merging of confident sets into primary clusters.

For sets ``A`` and ``B`` the directed affinity ``Y(A, B)`` is the mean, over
``u`` in ``A``, of how many of ``u``'s close neighbours (its top ``delta``
percent of partners by compression ratio) fall in ``B``.  The pair with
the largest ``Z = Y(A, B) * Y(B, A)`` is merged, the scores are recomputed,
and the loop continues until a stopping rule fires.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .clustering import Clustering
from .confident import ExtractionResult
from .corrgraph import percent_count
from .errors import InvalidParameter
from .pca import PairScores


@dataclass(frozen=True, eq=False)
class Neighborhoods:
    """Each vertex's partners ranked by compression ratio (descending, ties by index).

    ``ranked`` may be deeper than the ``size`` used for merging so the
    majority vote can read its own prefix length from the same ranking.
    """

    delta_percent: float
    size: int
    ranked: np.ndarray

    @property
    def n(self) -> int:
        return self.ranked.shape[0]

    @property
    def depth(self) -> int:
        return self.ranked.shape[1]

    @property
    def lists(self) -> np.ndarray:
        return self.ranked[:, : self.size]

    def top(self, m: int) -> np.ndarray:
        if m > self.depth:
            raise InvalidParameter(f"ranking depth {self.depth} is shorter than {m}")
        return self.ranked[:, :m]


def neighborhood_size(delta_percent: float, n: int) -> int:
    return min(percent_count(delta_percent, n - 1), n - 1)


def majority_size(delta_percent: float, n: int) -> int:
    return percent_count(delta_percent, n)


def delta_neighborhoods(scores: PairScores, delta_percent: float, depth: int | None = None) -> Neighborhoods:
    """Top ``floor(delta/100 * (n-1))`` partners per vertex.

    The ranking is stored to ``max(size, floor(delta/100 * n))`` entries
    (or ``depth`` if larger), capped at ``n - 1``.
    """
    if not (0 < delta_percent <= 100):
        raise InvalidParameter(f"delta_percent must lie in (0, 100], got {delta_percent}")
    n = scores.n
    size = neighborhood_size(delta_percent, n)
    want = max(size, majority_size(delta_percent, n), depth or 0)
    want = min(want, n - 1)
    ranked = kernels.rank_neighbors(scores.scores, n, want)
    return Neighborhoods(float(delta_percent), size, np.asarray(ranked))


def pair_affinity(a, b, nb: Neighborhoods) -> float:
    """Mean number of each ``a`` member's close neighbours that lie in ``b``."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        raise InvalidParameter("affinity needs two non-empty sets")
    in_b = np.zeros(nb.n, dtype=bool)
    in_b[b] = True
    if np.any(in_b[a]):
        raise InvalidParameter("sets must be disjoint")
    return float(in_b[nb.lists[a]].sum() / a.size)


@dataclass(frozen=True)
class StoppingRule:
    """When to stop merging.

    ``gap``: stop before a merge whose ``Z_max`` is below ``gap_ratio`` times
    the previous accepted ``Z_max``, or below ``min_z``.
    ``target_count``: stop once ``target`` sets remain.
    ``z_floor``: stop before a merge whose ``Z_max`` is below ``min_z``.
    """

    kind: str = "gap"
    gap_ratio: float = 0.25
    min_z: float = 1.0
    target: int | None = None

    def __post_init__(self):
        if self.kind not in ("gap", "target_count", "z_floor"):
            raise InvalidParameter(f"unknown stopping rule {self.kind!r}")
        if self.kind == "target_count" and (self.target is None or self.target < 1):
            raise InvalidParameter("target_count needs target >= 1")
        if self.kind == "gap" and not (0 < self.gap_ratio <= 1):
            raise InvalidParameter("gap_ratio must lie in (0, 1]")
        if self.min_z < 0:
            raise InvalidParameter("min_z must be non-negative")

    @classmethod
    def gap(cls, ratio: float = 0.25, min_z: float = 1.0) -> "StoppingRule":
        return cls("gap", gap_ratio=ratio, min_z=min_z)

    @classmethod
    def target_count(cls, target: int) -> "StoppingRule":
        return cls("target_count", target=target, min_z=0.0)

    @classmethod
    def z_floor(cls, floor: float) -> "StoppingRule":
        return cls("z_floor", min_z=floor)

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "gap":
            out.update(gap_ratio=self.gap_ratio, min_z=self.min_z)
        elif self.kind == "z_floor":
            out.update(min_z=self.min_z)
        else:
            out.update(target=self.target)
        return out


@dataclass(frozen=True)
class MergeStep:
    round: int
    set_a: tuple[int, ...]
    set_b: tuple[int, ...]
    z_max: float
    size_a: int
    size_b: int
    accepted: bool


@dataclass(eq=False)
class MergeResult:
    clustering: Clustering
    z_history: list[MergeStep]
    status: str
    lineage: list[tuple[int, ...]] = field(default_factory=list)

    def write_z_history(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["round", "set_a", "set_b", "z_max", "size_a", "size_b", "accepted"])
            for s in self.z_history:
                w.writerow([
                    s.round, "+".join(map(str, s.set_a)), "+".join(map(str, s.set_b)),
                    repr(s.z_max), s.size_a, s.size_b, int(s.accepted),
                ])

    def history_json(self) -> list[dict]:
        return [
            {
                "round": s.round, "set_a": list(s.set_a), "set_b": list(s.set_b),
                "z_max": s.z_max, "size_a": s.size_a, "size_b": s.size_b, "accepted": s.accepted,
            }
            for s in self.z_history
        ]


def affinity_matrix(owner, n_sets, nb: Neighborhoods) -> np.ndarray:
    """``Y[i, j]`` for all live sets given a per-vertex owner array (``-1`` = none)."""
    members = np.flatnonzero(owner >= 0)
    if members.size == 0:
        return np.zeros((n_sets, n_sets))
    src = np.repeat(owner[members], nb.size)
    dst = owner[nb.lists[members].ravel()]
    keep = dst >= 0
    counts = np.bincount(src[keep] * n_sets + dst[keep], minlength=n_sets * n_sets)
    counts = counts.reshape(n_sets, n_sets).astype(np.float64)
    sizes = np.bincount(owner[members], minlength=n_sets)
    return counts / sizes[:, None]


def form_primary_clusters(
    extraction: ExtractionResult | list,
    nb: Neighborhoods,
    stop: StoppingRule | None = None,
    n: int | None = None,
) -> MergeResult:
    """Merge confident sets greedily by the product score until ``stop`` fires.

    ``extraction`` is an :class:`ExtractionResult` or a plain list of vertex
    sets (their list position then stands in for the order found).  Ties on
    ``Z_max`` go to the pair whose lowest original set indices are
    lexicographically smallest.
    """
    stop = stop or StoppingRule()
    if isinstance(extraction, ExtractionResult):
        groups = [(s.order_found,) for s in extraction.sets]
        members = [np.asarray(s.members, dtype=np.int64) for s in extraction.sets]
        n = extraction.n
    else:
        members = [np.asarray(s, dtype=np.int64) for s in extraction]
        groups = [(i,) for i in range(len(members))]
        n = nb.n if n is None else n
    if not members:
        raise InvalidParameter("need at least one confident set")
    owner = np.full(n, -1, dtype=np.int64)
    for i, m in enumerate(members):
        if np.any(owner[m] >= 0):
            raise InvalidParameter("confident sets overlap")
        owner[m] = i

    history: list[MergeStep] = []
    previous = None
    status = "single_set"
    rnd = 0
    while True:
        r = len(members)
        if stop.kind == "target_count" and r <= stop.target:
            status = "target_reached"
            break
        if r < 2:
            status = "single_set"
            break
        y = affinity_matrix(owner, r, nb)
        z = y * y.T
        np.fill_diagonal(z, -np.inf)
        z_max = float(z.max())
        if z_max <= 0:
            status = "exhausted_scores"
            break
        ii, jj = np.nonzero(np.triu(z == z_max, 1))
        keys = [(min(groups[a][0], groups[b][0]), max(groups[a][0], groups[b][0])) for a, b in zip(ii, jj)]
        pick = min(range(len(keys)), key=keys.__getitem__)
        a, b = int(ii[pick]), int(jj[pick])

        reason = None
        if stop.kind == "gap":
            if previous is not None and z_max < stop.gap_ratio * previous:
                reason = "gap"
            elif z_max < stop.min_z:
                reason = "z_floor"
        elif stop.kind == "z_floor" and z_max < stop.min_z:
            reason = "z_floor"
        step = MergeStep(rnd, groups[a], groups[b], z_max, int(members[a].size), int(members[b].size), reason is None)
        history.append(step)
        if reason is not None:
            status = reason
            break

        members[a] = np.union1d(members[a], members[b])
        groups[a] = tuple(sorted(groups[a] + groups[b]))
        del members[b], groups[b]
        owner[owner == b] = a
        owner[owner > b] -= 1
        previous = z_max
        rnd += 1

    clustering = Clustering.from_sets(n, members, stage="primary")
    clustering.metadata["lineage"] = [list(g) for g in groups]
    return MergeResult(clustering, history, status, groups)
