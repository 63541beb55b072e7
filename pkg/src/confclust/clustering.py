"""Partition-with-remainder shared by the merge, assignment and evaluation stages."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateId, EmptyInput, InvalidParameter, ParseError

STAGES = ("primary", "post_majority", "final")
UNASSIGNED = -1


@dataclass(frozen=True, eq=False)
class Clustering:
    """Cluster index per vertex (``-1`` = unassigned) plus the pipeline stage.

    Cluster indices are 0-based in memory; exported files and reports use
    1-based cluster numbers.
    """

    labels: np.ndarray
    n_clusters: int
    stage: str = "primary"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if self.stage not in STAGES:
            raise InvalidParameter(f"unknown stage {self.stage!r}")
        if labels.size and (labels.min() < UNASSIGNED or labels.max() >= self.n_clusters):
            raise InvalidParameter("cluster label out of range")

    @classmethod
    def from_sets(cls, n: int, sets, stage: str = "primary") -> "Clustering":
        labels = np.full(n, UNASSIGNED, dtype=np.int64)
        for idx, members in enumerate(sets):
            members = np.asarray(members, dtype=np.int64)
            if np.any(labels[members] != UNASSIGNED):
                raise InvalidParameter("clusters overlap")
            labels[members] = idx
        return cls(labels, len(sets), stage)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def clusters(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == c) for c in range(self.n_clusters)]

    @property
    def unassigned(self) -> np.ndarray:
        return np.flatnonzero(self.labels == UNASSIGNED)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels[self.labels >= 0], minlength=self.n_clusters)

    def with_stage(self, labels, stage, **metadata) -> "Clustering":
        meta = dict(self.metadata)
        meta.update(metadata)
        return Clustering(labels, self.n_clusters, stage, meta)

    def write_csv(self, path, point_ids) -> None:
        """``point_id,cluster`` rows; cluster numbers are 1-based, else ``UNASSIGNED``."""
        with open(path, "w") as fh:
            for pid, lab in zip(point_ids, self.labels):
                fh.write(f"{pid},{lab + 1 if lab >= 0 else 'UNASSIGNED'}\n")

    @classmethod
    def read_csv(cls, path, stage: str = "final") -> tuple[tuple[str, ...], "Clustering"]:
        """Inverse of :meth:`write_csv`; returns ``(point_ids, clustering)``."""
        ids, labels = [], []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                parts = [p.strip() for p in line.replace("\t", ",").split(",")]
                if len(parts) < 2:
                    raise ParseError("expected point_id,cluster", line=lineno)
                pid, value = parts[0], parts[1]
                if value.upper() == "UNASSIGNED":
                    labels.append(UNASSIGNED)
                else:
                    try:
                        num = int(value)
                    except ValueError:
                        if not labels and not ids:
                            continue  # header row
                        raise ParseError(f"bad cluster number {value!r}", line=lineno, column=2) from None
                    if num < 1:
                        raise ParseError("cluster numbers start at 1", line=lineno, column=2)
                    labels.append(num - 1)
                ids.append(pid)
        if not ids:
            raise EmptyInput(f"{path} has no rows")
        if len(set(ids)) != len(ids):
            seen = set()
            for p in ids:
                if p in seen:
                    raise DuplicateId(p)
                seen.add(p)
        labels = np.asarray(labels, dtype=np.int64)
        return tuple(ids), cls(labels, int(labels.max()) + 1 if labels.size else 0, stage)
