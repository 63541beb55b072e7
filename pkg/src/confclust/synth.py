"""Seeded generators for synthetic benchmarks.

* :func:`gen_vectors` draws points as ``center + noise`` with independent
  noise per coordinate.  Point ``i`` uses its own PCG64 stream spawned
  from ``SeedSequence(seed)`` (stream index = column index), so columns can
  be generated in any order or in parallel with identical results.
* :func:`gen_sbm` draws a stochastic block model graph.
* :func:`gen_planted_dense` plants a clique in an Erdos-Renyi background.

Default parameters are our own choices; they are tuned so that mean
intra-cluster distance is 95% of mean inter-cluster distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corrgraph import CorrelationGraph
from .errors import InvalidParameter
from .ingest import DataMatrix, GroundTruth

DEFAULT_SIZES = (620, 560, 160, 580, 500, 450)


@dataclass(frozen=True)
class NoiseSpec:
    """Coordinate-wise noise of one cluster: ``gaussian`` (std ``scale``) or ``uniform`` (half-width ``scale``)."""

    kind: str = "gaussian"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise InvalidParameter(f"unknown noise kind {self.kind!r}")
        if not (self.scale >= 0 and math.isfinite(self.scale)):
            raise InvalidParameter("noise scale must be finite and non-negative")

    @property
    def variance(self) -> float:
        return self.scale**2 if self.kind == "gaussian" else self.scale**2 / 3.0

    def draw(self, rng: np.random.Generator, d: int) -> np.ndarray:
        if self.kind == "gaussian":
            return self.scale * rng.standard_normal(d)
        return rng.uniform(-self.scale, self.scale, d)


@dataclass(frozen=True)
class VectorModelSpec:
    """Random vector model.

    ``centers`` is either an explicit ``k x d`` array or ``None``, in which
    case cluster ``j`` is centred at ``a * e_j`` with ``a`` chosen so that
    the expected intra/inter distance ratio equals ``distance_ratio``.
    ``noise`` is one :class:`NoiseSpec` for all clusters or one per cluster.
    """

    k: int = 6
    d: int = 400
    sizes: tuple[int, ...] = DEFAULT_SIZES
    centers: np.ndarray | None = field(default=None, compare=False)
    distance_ratio: float = 0.95
    noise: NoiseSpec | tuple[NoiseSpec, ...] = NoiseSpec()
    seed: int = 1

    def __post_init__(self):
        if self.k < 1 or self.d < 1:
            raise InvalidParameter("k and d must be positive")
        if len(self.sizes) != self.k or any(s < 1 for s in self.sizes):
            raise InvalidParameter("need k positive cluster sizes")
        noise = self.noise
        if isinstance(noise, NoiseSpec):
            noise = (noise,) * self.k
        noise = tuple(noise)
        if len(noise) != self.k:
            raise InvalidParameter("need one noise spec per cluster")
        object.__setattr__(self, "noise", noise)
        if self.centers is not None:
            c = np.asarray(self.centers, dtype=np.float64)
            if c.shape != (self.k, self.d):
                raise InvalidParameter(f"centers must be {self.k} x {self.d}")
            object.__setattr__(self, "centers", c)
        elif not (0 < self.distance_ratio <= 1):
            raise InvalidParameter("distance_ratio must lie in (0, 1]")
        elif self.k > self.d:
            raise InvalidParameter("orthogonal centers need k <= d")

    @property
    def n(self) -> int:
        return int(sum(self.sizes))

    def center_matrix(self) -> np.ndarray:
        if self.centers is not None:
            return self.centers
        # intra: 2 d s2; inter: 2 d s2 + |c_i - c_j|^2 = 2 d s2 + 2 a^2
        s2 = float(np.mean([ns.variance for ns in self.noise]))
        a = math.sqrt(s2 * self.d * (1.0 / self.distance_ratio**2 - 1.0))
        c = np.zeros((self.k, self.d))
        c[np.arange(self.k), np.arange(self.k)] = a
        return c


def gen_vectors(spec: VectorModelSpec | None = None) -> tuple[DataMatrix, GroundTruth]:
    """Sample ``spec.n`` points, cluster by cluster in declaration order."""
    spec = spec or VectorModelSpec()
    centers = spec.center_matrix()
    streams = np.random.SeedSequence(spec.seed).spawn(spec.n)
    x = np.empty((spec.d, spec.n))
    labels = np.repeat(np.arange(1, spec.k + 1), spec.sizes)
    for i, ss in enumerate(streams):
        j = labels[i] - 1
        x[:, i] = centers[j] + spec.noise[j].draw(np.random.default_rng(ss), spec.d)
    ids = tuple(f"p{i:06d}" for i in range(1, spec.n + 1))
    m = DataMatrix(x, ids, metadata={"generator": "vectors", "seed": spec.seed})
    return m, GroundTruth.from_array(labels, ids)


@dataclass(frozen=True)
class SbmSpec:
    sizes: tuple[int, ...]
    p_in: float
    p_out: float
    seed: int = 0

    def __post_init__(self):
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise InvalidParameter("block sizes must be positive")
        if not (0 <= self.p_out < self.p_in <= 1):
            raise InvalidParameter(f"need 0 <= p_out < p_in <= 1, got p_in={self.p_in}, p_out={self.p_out}")


def _bernoulli_edges(rng, n, prob_of_pair):
    i, j = np.triu_indices(n, 1)
    keep = rng.random(i.size) < prob_of_pair(i, j)
    return np.column_stack([i[keep], j[keep]])


def gen_sbm(spec: SbmSpec) -> tuple[CorrelationGraph, GroundTruth]:
    """Each pair is an edge independently with ``p_in`` inside a block, ``p_out`` across."""
    labels = np.repeat(np.arange(1, len(spec.sizes) + 1), spec.sizes)
    n = labels.size
    rng = np.random.default_rng(spec.seed)
    edges = _bernoulli_edges(rng, n, lambda i, j: np.where(labels[i] == labels[j], spec.p_in, spec.p_out))
    return CorrelationGraph.from_edges(n, edges), GroundTruth.from_array(labels)


def gen_planted_dense(n: int, clique_size: int, p_bg: float, seed: int = 0) -> tuple[CorrelationGraph, np.ndarray]:
    """G(n, p_bg) with a clique planted on a uniformly random vertex subset.

    Returns the graph and the sorted planted vertices.
    """
    if n < 1 or not (0 <= clique_size <= n):
        raise InvalidParameter("need 0 <= clique_size <= n")
    if not (0 <= p_bg <= 1):
        raise InvalidParameter("p_bg must be a probability")
    rng = np.random.default_rng(seed)
    planted = np.sort(rng.choice(n, size=clique_size, replace=False))
    inside = np.zeros(n, dtype=bool)
    inside[planted] = True
    edges = _bernoulli_edges(rng, n, lambda i, j: np.where(inside[i] & inside[j], 1.0, p_bg))
    return CorrelationGraph.from_edges(n, edges), planted
