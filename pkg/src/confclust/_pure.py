"""Pure numpy versions of the compiled kernels in ``_core.pyx``."""

import numpy as np

_BLOCK_ELEMENTS = 1 << 22


def pair_scores(x, p):
    """Condensed compression ratios for points stored as rows of ``x`` and ``p``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    p = np.ascontiguousarray(p, dtype=np.float64)
    n = x.shape[0]
    out = np.empty(n * (n - 1) // 2, dtype=np.float64)
    pos = 0
    for i in range(n - 1):
        dx = x[i + 1:] - x[i]
        dp = p[i + 1:] - p[i]
        num = np.einsum("ij,ij->i", dx, dx)
        den = np.einsum("ij,ij->i", dp, dp)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.sqrt(num / den)
        r[den == 0.0] = np.inf
        out[pos:pos + len(r)] = r
        pos += len(r)
    return out


def _square_rows(scores, n, start, stop):
    """Rows ``start:stop`` of the symmetric score matrix, diagonal set to -inf."""
    rows = np.empty((stop - start, n), dtype=np.float64)
    for r, u in enumerate(range(start, stop)):
        v = np.arange(u)
        rows[r, :u] = scores[v * n - v * (v + 1) // 2 + u - v - 1]
        base = u * n - u * (u + 1) // 2 - u - 1
        rows[r, u + 1:] = scores[base + u + 1: base + n]
        rows[r, u] = -np.inf
    return rows


def rank_neighbors(scores, n, depth):
    """Per-vertex top-``depth`` partners by score, descending, ties by index."""
    out = np.empty((n, depth), dtype=np.int64)
    if depth == 0 or n == 0:
        return out
    block = max(1, _BLOCK_ELEMENTS // max(n, 1))
    for start in range(0, n, block):
        stop = min(n, start + block)
        rows = _square_rows(scores, n, start, stop)
        order = np.argsort(-rows, axis=1, kind="stable")
        out[start:stop] = order[:, :depth]
    return out
