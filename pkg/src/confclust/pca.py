"""Truncated PCA and pairwise k'-PC compression ratios.

The compression ratio of a pair is the length of their difference divided
by the length of its projection onto the top ``k'`` principal components.
Pairs whose difference lies mostly outside the principal subspace score
high, which is evidence that they belong to the same cluster.
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ConvergenceWarning, DimensionMismatch, FormatError, InvalidParameter
from .ingest import DataMatrix

CACHE_MAGIC = b"CCPAIRS1"
_HEADER = struct.Struct("<8sQI")


@dataclass(frozen=True)
class PcaModel:
    k_prime: int
    mean_vector: np.ndarray
    components: np.ndarray
    """``k' x d`` array; rows are orthonormal principal directions."""
    eigenvalues: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def n_features(self) -> int:
        return self.components.shape[1]


@dataclass(frozen=True)
class ProjectedMatrix:
    coords: np.ndarray
    """``k' x n`` projected coordinates, one column per point."""

    @property
    def n_points(self) -> int:
        return self.coords.shape[1]


def _orient(vectors):
    # vectors are columns; make each one's largest-magnitude entry positive
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def fit_pca(
    m: DataMatrix,
    k_prime: int,
    tol: float = 1e-8,
    max_iter: int = 1000,
    seed: int = 0,
    center: bool = True,
    oversample: int | None = None,
) -> PcaModel:
    """Top-``k_prime`` principal components by seeded randomized subspace iteration.

    The covariance is ``Xc Xc^T / n`` with ``Xc`` the mean-centered columns
    (pass ``center=False`` to skip centering).  Iteration stops once every
    wanted Ritz pair has ``||C v - lam v|| <= tol * lam_1``.  Running out of
    iterations is not fatal: a ``ConvergenceWarning`` is issued and the
    model carries ``metadata["converged"] = False``.
    """
    d, n = m.n_features, m.n_points
    if not 1 <= k_prime <= min(d, n - 1):
        raise InvalidParameter(f"k_prime={k_prime} must lie in [1, {min(d, n - 1)}]")
    if not tol > 0:
        raise InvalidParameter("tol must be positive")
    x = m.dense()
    mean = x.mean(axis=1) if center else np.zeros(d)
    xc = x - mean[:, None]

    if d <= n:
        cov = (xc @ xc.T) / n

        def apply(q):
            return cov @ q
    else:
        def apply(q):
            return xc @ (xc.T @ q) / n

    if oversample is None:
        oversample = max(10, k_prime)
    block = min(d, k_prime + oversample)
    rng = np.random.default_rng(seed)
    # Householder QR yields orthonormal columns even for rank-deficient input
    q, _ = np.linalg.qr(apply(rng.standard_normal((d, block))))

    converged = False
    residuals = np.full(k_prime, np.inf)
    it = 0
    for it in range(1, max_iter + 1):
        w = apply(q)
        h = q.T @ w
        h = (h + h.T) / 2
        theta, s = np.linalg.eigh(h)
        top = np.argsort(-theta, kind="stable")[:k_prime]
        vals = theta[top]
        vecs = q @ s[:, top]
        cv = w @ s[:, top]
        residuals = np.linalg.norm(cv - vecs * vals, axis=0)
        scale = max(vals[0], 0.0)
        if np.all(residuals <= tol * scale):
            converged = True
            break
        q, _ = np.linalg.qr(w)

    if not converged:
        warnings.warn(
            f"PCA did not converge in {max_iter} iterations (max residual {residuals.max():.3g})",
            ConvergenceWarning,
            stacklevel=2,
        )
    vals = np.clip(vals, 0.0, None)
    vecs = _orient(vecs)
    meta = {"converged": converged, "iterations": it, "residuals": residuals.tolist(), "centered": center}
    return PcaModel(k_prime, mean, np.ascontiguousarray(vecs.T), vals, meta)


def project(model: PcaModel, m: DataMatrix) -> ProjectedMatrix:
    if m.n_features != model.n_features:
        raise DimensionMismatch(f"model has {model.n_features} features, data has {m.n_features}")
    x = m.dense()
    return ProjectedMatrix(model.components @ (x - model.mean_vector[:, None]))


def compression_ratio(m: DataMatrix, p: ProjectedMatrix, i: int, j: int) -> float:
    """``||x_i - x_j|| / ||p_i - p_j||``, or ``inf`` when the projections coincide."""
    n = m.n_points
    if i == j:
        raise InvalidParameter("compression ratio needs two distinct points")
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidParameter(f"indices ({i}, {j}) out of range for n={n}")
    if p.n_points != n:
        raise DimensionMismatch("projection and data disagree on n")
    x = m.dense()
    num = np.linalg.norm(x[:, i] - x[:, j])
    den = np.linalg.norm(p.coords[:, i] - p.coords[:, j])
    if den == 0.0:
        return math.inf
    return float(num / den)


def condensed_index(n, i, j):
    """Position of the unordered pair ``{i, j}`` (``i != j``) in condensed storage."""
    i, j = np.minimum(i, j), np.maximum(i, j)
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def pair_from_index(n, idx):
    """Inverse of :func:`condensed_index`: arrays ``(i, j)`` with ``i < j``."""
    idx = np.asarray(idx, dtype=np.int64)
    total = n * (n - 1) // 2
    # row i starts at i*n - i*(i+1)/2; solve the quadratic, then correct rounding
    i = (n - 2 - np.floor(np.sqrt(np.maximum(4.0 * n * (n - 1) - 8.0 * idx - 7, 0)) / 2 - 0.5)).astype(np.int64)
    i = np.clip(i, 0, max(n - 2, 0))
    start = i * n - i * (i + 1) // 2
    low = start > idx
    while np.any(low):
        i[low] -= 1
        start = i * n - i * (i + 1) // 2
        low = start > idx
    nxt = (i + 1) * n - (i + 1) * (i + 2) // 2
    high = (nxt <= idx) & (idx < total)
    while np.any(high):
        i[high] += 1
        nxt = (i + 1) * n - (i + 1) * (i + 2) // 2
        high = (nxt <= idx) & (idx < total)
    start = i * n - i * (i + 1) // 2
    j = idx - start + i + 1
    return i, j


@dataclass(frozen=True)
class PairScores:
    """Compression ratio for every unordered pair, stored once per pair.

    Storage is condensed row-major over ``i < j``, so sorting by position is
    the same as sorting lexicographically by ``(i, j)``.
    """

    scores: np.ndarray
    n: int
    k_prime: int = 0

    def __post_init__(self):
        expected = self.n * (self.n - 1) // 2
        if self.scores.shape != (expected,):
            raise DimensionMismatch(f"{self.scores.shape[0]} scores for n={self.n} (expected {expected})")

    def __len__(self):
        return self.scores.shape[0]

    def get(self, i: int, j: int) -> float:
        if i == j:
            raise InvalidParameter("no score for a point with itself")
        return float(self.scores[condensed_index(self.n, i, j)])

    def row(self, u: int) -> np.ndarray:
        """Scores of ``u`` against every vertex; the entry for ``u`` itself is ``-inf``."""
        from ._pure import _square_rows

        return _square_rows(self.scores, self.n, u, u + 1)[0]

    def order(self) -> np.ndarray:
        """All pair positions sorted by score descending (``inf`` first), ties by position."""
        return np.argsort(-self.scores, kind="stable")

    def top(self, count: int) -> np.ndarray:
        """Positions of the ``count`` best pairs, in the same order as :meth:`order`."""
        total = len(self)
        count = int(count)
        if count <= 0:
            return np.empty(0, dtype=np.int64)
        if count >= total:
            return self.order()
        neg = -self.scores
        kth = np.partition(neg, count - 1)[count - 1]
        better = np.flatnonzero(neg < kth)
        tied = np.flatnonzero(neg == kth)[: count - better.size]
        chosen = np.concatenate([better, tied])
        return chosen[np.lexsort((chosen, neg[chosen]))]

    def pairs(self, positions) -> tuple[np.ndarray, np.ndarray]:
        return pair_from_index(self.n, positions)

    def save(self, path) -> None:
        """Binary cache: magic, ``n`` (u64), ``k'`` (u32), then little-endian float64 scores."""
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(CACHE_MAGIC, self.n, self.k_prime))
            fh.write(self.scores.astype("<f8", copy=False).tobytes())

    @classmethod
    def load(cls, path) -> "PairScores":
        raw = Path(path).read_bytes()
        if len(raw) < _HEADER.size:
            raise FormatError(f"{path}: truncated score cache")
        magic, n, k_prime = _HEADER.unpack_from(raw)
        if magic != CACHE_MAGIC:
            raise FormatError(f"{path}: not a score cache")
        body = raw[_HEADER.size:]
        expected = n * (n - 1) // 2
        if len(body) != 8 * expected:
            raise FormatError(f"{path}: expected {expected} scores, found {len(body) // 8}")
        scores = np.frombuffer(body, dtype="<f8").astype(np.float64)
        return cls(scores, int(n), int(k_prime))


def all_pair_scores(m: DataMatrix, p: ProjectedMatrix, k_prime: int | None = None) -> PairScores:
    """Compression ratio of all ``n(n-1)/2`` pairs (compiled kernel when available)."""
    if p.n_points != m.n_points:
        raise DimensionMismatch(f"projection has {p.n_points} points, data has {m.n_points}")
    x = np.ascontiguousarray(m.dense().T)
    coords = np.ascontiguousarray(p.coords.T)
    scores = kernels.pair_scores(x, coords)
    return PairScores(np.asarray(scores), m.n_points, k_prime if k_prime is not None else p.coords.shape[0])
