import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from confclust import RunConfig, gen_vectors, run_pipeline
from confclust.merge import Neighborhoods

settings.register_profile(
    "repo", max_examples=60, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def synth_default():
    """Default synthetic dataset (6 clusters, d=400, n=2870, seed 1)."""
    m, truth = gen_vectors()
    return m, truth, truth.to_array(m.point_ids)


@pytest.fixture(scope="session")
def default_report(synth_default):
    m, truth, _ = synth_default
    return run_pipeline(RunConfig(), m, truth)


def clique_edges(vertices):
    v = list(vertices)
    return np.array([(a, b) for i, a in enumerate(v) for b in v[i + 1:]], dtype=np.int64).reshape(-1, 2)


# Planted instance for the stopping rule: five confident sets whose
# directed link totals give merge scores 2.86, 2.57, 0.21 and 0.045.
PLANTED_SIZES = (10, 10, 20, 20, 10)
PLANTED_LINKS = {(0, 1): 22, (1, 0): 13, (3, 2): 257, (2, 3): 4, (0, 2): 12, (2, 0): 14, (4, 0): 9, (0, 4): 3}
PLANTED_LIST_LEN = 30
PLANTED_FILLERS = 100


def planted_merge_instance():
    """Return ``(sets, Neighborhoods)`` with link counts set by ``PLANTED_LINKS``."""
    starts = np.cumsum((0,) + PLANTED_SIZES)
    sets = [np.arange(starts[i], starts[i + 1]) for i in range(len(PLANTED_SIZES))]
    fillers = np.arange(starts[-1], starts[-1] + PLANTED_FILLERS)
    n = int(fillers[-1]) + 1
    ranked = np.empty((n, PLANTED_LIST_LEN), dtype=np.int64)
    for u in range(n):
        row = []
        for (a, b), total in PLANTED_LINKS.items():
            if u in sets[a]:
                pos = u - starts[a]
                count = total // sets[a].size + (pos < total % sets[a].size)
                target = sets[b]
                row += [int(target[(pos + r) % target.size]) for r in range(count)]
        row += [int(f) for f in fillers if f != u][: PLANTED_LIST_LEN - len(row)]
        ranked[u] = row
    return sets, Neighborhoods(100.0 * PLANTED_LIST_LEN / (n - 1), PLANTED_LIST_LEN, ranked)
