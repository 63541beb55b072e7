import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from confclust.errors import InvalidParameter
from confclust.synth import NoiseSpec, SbmSpec, VectorModelSpec, gen_planted_dense, gen_sbm, gen_vectors


def pairwise_sq(x):
    g = (x * x).sum(axis=0)
    return np.maximum(g[:, None] + g[None, :] - 2 * x.T @ x, 0)


def test_zero_noise_gives_centers():
    spec = VectorModelSpec(k=3, d=10, sizes=(4, 5, 6), noise=NoiseSpec("gaussian", 0.0))
    m, truth = gen_vectors(spec)
    labels = truth.to_array(m.point_ids)
    c = spec.center_matrix()
    np.testing.assert_array_equal(m.values, c[labels - 1].T)
    d2 = pairwise_sq(m.values)
    same = labels[:, None] == labels[None, :]
    assert np.all(d2[same] == 0)


def test_seed_determinism():
    spec = VectorModelSpec(k=2, d=30, sizes=(20, 15), seed=9)
    a, _ = gen_vectors(spec)
    b, _ = gen_vectors(spec)
    assert np.array_equal(a.values, b.values)
    c, _ = gen_vectors(VectorModelSpec(k=2, d=30, sizes=(20, 15), seed=10))
    assert not np.array_equal(a.values, c.values)


def test_columns_use_independent_streams():
    # a prefix of the sizes reproduces the same leading columns
    a, _ = gen_vectors(VectorModelSpec(k=2, d=12, sizes=(5, 3), seed=4))
    b, _ = gen_vectors(VectorModelSpec(k=2, d=12, sizes=(5, 7), seed=4))
    np.testing.assert_array_equal(a.values[:, :8], b.values[:, :8])


def test_default_sizes_and_labels(synth_default):
    m, truth, labels = synth_default
    assert (m.n_features, m.n_points) == (400, 2870)
    assert np.bincount(labels)[1:].tolist() == [620, 560, 160, 580, 500, 450]
    assert np.all(np.diff(labels) >= 0)


def test_default_distance_ratio(synth_default):
    m, _, labels = synth_default
    rng = np.random.default_rng(0)
    idx = rng.choice(m.n_points, 600, replace=False)
    d = np.sqrt(pairwise_sq(m.values[:, idx]))
    lab = labels[idx]
    iu = np.triu_indices(idx.size, 1)
    same = (lab[:, None] == lab[None, :])[iu]
    ratio = d[iu][same].mean() / d[iu][~same].mean()
    assert 0.9 <= ratio <= 1.0


def test_noise_mean(synth_default):
    m, truth, labels = synth_default
    c = VectorModelSpec().center_matrix()
    noise = m.values - c[labels - 1].T
    n, d = m.n_points, m.n_features
    assert abs(noise.mean()) <= 4 / math.sqrt(n * d)


def test_uniform_noise_bounds():
    spec = VectorModelSpec(k=2, d=20, sizes=(30, 30), noise=NoiseSpec("uniform", 0.5))
    m, truth = gen_vectors(spec)
    noise = m.values - spec.center_matrix()[truth.to_array(m.point_ids) - 1].T
    assert np.abs(noise).max() <= 0.5


@pytest.mark.parametrize("kwargs", [
    dict(sizes=(1, 2)),
    dict(k=2, sizes=(0, 3)),
    dict(k=2, sizes=(2, 3), distance_ratio=1.5),
    dict(k=2, sizes=(2, 3), noise=(NoiseSpec(),)),
])
def test_bad_vector_spec(kwargs):
    with pytest.raises(InvalidParameter):
        VectorModelSpec(**kwargs)


def test_bad_noise():
    with pytest.raises(InvalidParameter):
        NoiseSpec("gaussian", -1)
    with pytest.raises(InvalidParameter):
        NoiseSpec("cauchy", 1)


def test_sbm_disjoint_cliques():
    g, truth = gen_sbm(SbmSpec((4, 3), 1.0, 0.0))
    assert g.n_edges == 6 + 3
    labels = truth.to_array([str(i) for i in range(7)])
    assert np.all(labels[g.edges[:, 0]] == labels[g.edges[:, 1]])


def test_sbm_intra_count_binomial():
    g, truth = gen_sbm(SbmSpec((50, 50), 0.9, 0.02, seed=5))
    labels = truth.to_array([str(i) for i in range(100)])
    intra = int(np.sum(labels[g.edges[:, 0]] == labels[g.edges[:, 1]]))
    trials = 2 * math.comb(50, 2)
    mean, sd = 0.9 * trials, math.sqrt(trials * 0.9 * 0.1)
    assert abs(intra - mean) <= 3 * sd


@pytest.mark.parametrize("p_in,p_out", [(0.3, 0.3), (0.2, 0.5), (1.2, 0.1), (0.5, -0.1)])
def test_sbm_bad_probabilities(p_in, p_out):
    with pytest.raises(InvalidParameter):
        SbmSpec((5, 5), p_in, p_out)


def test_planted_without_background():
    g, planted = gen_planted_dense(30, 8, 0.0, seed=2)
    assert g.n_edges == math.comb(8, 2)
    assert set(np.unique(g.edges).tolist()) == set(planted.tolist())


def test_planted_full_clique():
    g, planted = gen_planted_dense(12, 12, 0.1, seed=0)
    assert g.n_edges == math.comb(12, 2) and planted.tolist() == list(range(12))


def test_planted_bounds():
    with pytest.raises(InvalidParameter):
        gen_planted_dense(10, 11, 0.1)


@given(st.integers(0, 2**31), st.integers(3, 40), st.floats(0, 0.5))
def test_generators_deterministic(seed, n, p):
    g1, s1 = gen_planted_dense(n, n // 2, p, seed)
    g2, s2 = gen_planted_dense(n, n // 2, p, seed)
    assert np.array_equal(g1.edges, g2.edges) and np.array_equal(s1, s2)
    h1, _ = gen_sbm(SbmSpec((n, 5), 0.6, p / 2, seed))
    h2, _ = gen_sbm(SbmSpec((n, 5), 0.6, p / 2, seed))
    assert np.array_equal(h1.edges, h2.edges)
