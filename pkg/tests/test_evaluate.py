from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from confclust.clustering import Clustering
from confclust.errors import EmptyCluster, MissingLabel, Undefined
from confclust.evaluate import (
    adjusted_rand_index,
    cluster_error,
    cluster_identity,
    confusion_table,
    error_summary,
    partition_agreement,
    zeta,
)

# confusion rows of the primary clustering table at gamma = 5%
PRIMARY_TABLE = np.array([
    [0, 0, 0, 0, 465, 0],
    [4, 783, 0, 0, 3, 1],
    [0, 0, 0, 889, 14, 0],
    [0, 1, 0, 0, 1, 650],
    [917, 6, 0, 0, 0, 0],
    [0, 0, 174, 0, 0, 0],
])

# the comparison method's 9-cluster table at resolution 0.4
SEURAT_04 = np.array([
    [1013, 6, 2, 1, 0, 1],
    [0, 0, 3, 954, 30, 0],
    [3, 3, 2, 0, 3, 732],
    [0, 485, 0, 0, 4, 1],
    [4, 430, 0, 0, 0, 9],
    [0, 0, 0, 0, 410, 0],
    [0, 0, 236, 0, 100, 0],
    [2, 0, 17, 0, 259, 0],
    [0, 0, 0, 0, 33, 0],
])


def test_identity_examples():
    assert cluster_identity(PRIMARY_TABLE[1]) == 2
    assert cluster_identity(PRIMARY_TABLE[5]) == 3
    assert cluster_identity([5, 5]) == 1


def test_identity_empty_row():
    with pytest.raises(EmptyCluster):
        cluster_identity([0, 0, 0])


def test_error_examples():
    assert cluster_error(PRIMARY_TABLE[1]) == pytest.approx(8 / 791)
    assert cluster_error(PRIMARY_TABLE[2]) == pytest.approx(14 / 903)
    assert cluster_error([0, 465, 0]) == 0


def test_seurat_summary():
    s = error_summary(SEURAT_04)
    assert s.e_inf == pytest.approx(100 / 336)
    assert s.e_avg == pytest.approx(0.463, abs=0.005)
    assert s.e_mean == pytest.approx(s.e_avg / 9)


def test_summary_trivial():
    assert tuple(error_summary(np.array([[7, 0]])))[:2] == (0.0, 0.0)
    s = error_summary(np.array([[9, 1], [8, 2]]))
    assert (s.e_inf, s.e_avg) == pytest.approx((0.2, 0.3))


def test_zeta():
    labels = np.array([2, 2, 2, 1, 1])
    assert zeta([0, 1, 2], labels) == 1.0
    labels = np.array([1] * 98 + [2, 3])
    assert zeta(np.arange(100), labels) == 0.98


def test_zeta_missing_label():
    with pytest.raises(MissingLabel):
        zeta([0, 1], np.array([1, 0]))


def test_confusion_counts_exclude_unassigned_and_unlabeled():
    c = Clustering(np.array([0, 0, 1, -1, 1]), 2, "final")
    t = confusion_table(c, np.array([1, 2, 2, 1, 0]), 2)
    assert t.counts.tolist() == [[1, 1], [0, 1]]
    assert (t.n_unassigned, t.n_unlabeled, t.total) == (1, 1, 3)


def test_table_format():
    c = Clustering(np.array([0, 0, 1]), 2, "final")
    text = confusion_table(c, np.array([1, 1, 2])).format()
    assert text.splitlines()[0].split() == ["V_1", "V_2", "error"]


def test_ari_identical_and_relabelled():
    a = np.array([0, 0, 1, 1, 2])
    assert adjusted_rand_index(a, a) == 1.0
    assert adjusted_rand_index(a, 5 - a) == 1.0


def test_ari_singletons_vs_one_block():
    assert adjusted_rand_index(np.arange(4), np.zeros(4)) == 0.0


def test_ari_random_labelings_near_zero():
    values = [
        adjusted_rand_index(*np.random.default_rng(seed).integers(0, 4, (2, 200)))
        for seed in range(20)
    ]
    assert max(abs(v) for v in values) <= 0.05


def brute_ari(a, b):
    """Pair-counting ARI straight from the definition."""
    n = len(a)
    same_a = [a[i] == a[j] for i, j in combinations(range(n), 2)]
    same_b = [b[i] == b[j] for i, j in combinations(range(n), 2)]
    both = sum(x and y for x, y in zip(same_a, same_b))
    pairs = n * (n - 1) / 2
    expected = sum(same_a) * sum(same_b) / pairs
    top = (sum(same_a) + sum(same_b)) / 2
    return 1.0 if top == expected else (both - expected) / (top - expected)


labelings = st.integers(2, 25).flatmap(
    lambda n: st.tuples(arrays(np.int64, n, elements=st.integers(0, 4)), arrays(np.int64, n, elements=st.integers(0, 4)))
)


@given(labelings)
def test_ari_matches_pair_counting(ab):
    a, b = ab
    assert adjusted_rand_index(a, b) == pytest.approx(brute_ari(a, b), abs=1e-12)
    assert adjusted_rand_index(a, a) == 1.0


def test_partition_agreement_restricts_to_common():
    a = Clustering(np.array([0, 0, 1, 1, -1]), 2, "primary")
    b = Clustering(np.array([1, 1, 0, -1, 0]), 2, "primary")
    assert partition_agreement(a, b) == 1.0


def test_partition_agreement_no_overlap():
    a = Clustering(np.array([0, -1]), 1, "primary")
    b = Clustering(np.array([-1, 0]), 1, "primary")
    with pytest.raises(Undefined):
        partition_agreement(a, b)


tables = arrays(np.int64, st.tuples(st.integers(1, 6), st.integers(1, 5)), elements=st.integers(0, 40))


@given(tables, st.integers(1, 7))
def test_summary_properties(t, scale):
    if not t.sum(axis=1).any():
        return
    s = error_summary(t)
    assert s.e_avg >= s.e_inf - 1e-15
    for row in t:
        if row.sum():
            assert cluster_error(row * scale) == pytest.approx(cluster_error(row))


@given(st.integers(1, 4), st.integers(0, 10_000))
def test_zeta_agrees_with_cluster_error(k, seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(1, k + 1, 30)
    assign = rng.integers(0, 3, 30)
    c = Clustering(assign, 3, "primary")
    t = confusion_table(c, labels, k)
    assert t.total == 30
    for j, members in enumerate(c.clusters):
        if members.size:
            assert zeta(members, labels) == pytest.approx(1 - cluster_error(t.counts[j]))
