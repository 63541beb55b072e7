"""Second-round assignment of vertices left out of the primary clusters."""

from __future__ import annotations

import numpy as np

from .clustering import UNASSIGNED, Clustering
from .errors import InvalidParameter
from .merge import Neighborhoods, majority_size

FINALIZE_POLICIES = ("leave", "plurality", "recurse_report")


def _overlap_counts(labels, rows, ranked, k):
    """``counts[r, c]`` = how many entries of ``ranked[r]`` carry label ``c``."""
    owners = labels[ranked]
    r_idx = np.repeat(np.arange(rows.size), ranked.shape[1])
    flat = owners.ravel()
    keep = flat >= 0
    counts = np.bincount(r_idx[keep] * k + flat[keep], minlength=rows.size * k)
    return counts.reshape(rows.size, k)


def majority_assign(pc: Clustering, nb: Neighborhoods, delta_percent: float | None = None) -> Clustering:
    """Give each unassigned vertex to the primary cluster holding a strict majority of its top ``t``.

    ``t = floor(delta * n / 100)``.  Votes are counted against the primary
    clusters only, so the outcome does not depend on processing order.
    """
    if pc.stage != "primary":
        raise InvalidParameter(f"majority assignment expects a primary clustering, got {pc.stage!r}")
    delta = nb.delta_percent if delta_percent is None else delta_percent
    n = pc.n
    t = majority_size(delta, n)
    if t < 1:
        raise InvalidParameter(f"delta={delta} gives an empty vote (t=0) for n={n}")
    labels = pc.labels.copy()
    todo = pc.unassigned
    if todo.size and pc.n_clusters:
        counts = _overlap_counts(pc.labels, todo, nb.top(t)[todo], pc.n_clusters)
        wins = 2 * counts > t
        n_wins = wins.sum(axis=1)
        # disjoint clusters cannot both hold more than half of t slots
        assert np.all(n_wins <= 1)
        chosen = n_wins == 1
        labels[todo[chosen]] = np.argmax(wins[chosen], axis=1)
    return pc.with_stage(labels, "post_majority", majority_t=t)


def finalize(c: Clustering, nb: Neighborhoods, policy: str = "leave", delta_percent: float | None = None) -> Clustering:
    """Settle what the majority vote left over.

    ``leave`` keeps them unassigned.  ``plurality`` sends each to the
    cluster with the largest overlap in its top ``t`` (ties, including no
    overlap at all, go to the lowest cluster index).  ``recurse_report``
    assigns nothing and records a descriptor of the leftover sub-dataset in
    ``metadata["recurse"]``.
    """
    if policy not in FINALIZE_POLICIES:
        raise InvalidParameter(f"unknown finalize policy {policy!r}")
    if c.stage != "post_majority":
        raise InvalidParameter(f"finalize expects a post-majority clustering, got {c.stage!r}")
    labels = c.labels.copy()
    leftover = c.unassigned
    extra = {"finalize_policy": policy}
    if policy == "plurality" and leftover.size and c.n_clusters:
        delta = nb.delta_percent if delta_percent is None else delta_percent
        t = majority_size(delta, c.n)
        counts = _overlap_counts(c.labels, leftover, nb.top(t)[leftover], c.n_clusters)
        labels[leftover] = np.argmax(counts, axis=1)
    elif policy == "recurse_report":
        extra["recurse"] = {"n_points": int(leftover.size), "vertices": leftover.tolist()}
    return c.with_stage(labels, "final", **extra)


__all__ = ["Clustering", "UNASSIGNED", "FINALIZE_POLICIES", "majority_assign", "finalize"]
