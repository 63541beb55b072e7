"""Kernel dispatch: the compiled extension when built, numpy otherwise.

Set ``CONFCLUST_PURE=1`` before import to force the numpy kernels.
"""

import os

from . import _pure

BACKEND = "pure"

if os.environ.get("CONFCLUST_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _pure
    else:
        BACKEND = "compiled"
else:
    _impl = _pure

pair_scores = _impl.pair_scores
rank_neighbors = _impl.rank_neighbors

__all__ = ["BACKEND", "pair_scores", "rank_neighbors"]
