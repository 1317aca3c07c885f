import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdpgmap.errors import ConfigError, InputError, ModelViolationError
from rdpgmap.graphs import (
    BallsConfig,
    DEFAULT_BLOCK_MATRIX,
    DEFAULT_BLOCK_SIZES,
    Graph,
    SphereCapsConfig,
    gen_balls,
    gen_sbm,
    gen_sphere_caps,
    karate,
    prob_from_latent,
    sample_rdpg,
)


def test_graph_canonicalizes():
    g = Graph(4, [(1, 0), (0, 1), (2, 3)])
    assert g.edges == ((0, 1), (2, 3))
    assert g.m == 2
    assert g == Graph(4, [(0, 1), (3, 2)])
    assert list(g.degrees()) == [1, 1, 1, 1]


def test_graph_rejects_bad_edges():
    with pytest.raises(InputError):
        Graph(3, [(0, 0)])
    with pytest.raises(InputError):
        Graph(3, [(0, 3)])
    with pytest.raises(InputError):
        Graph(0, [])


def test_from_adjacency_round_trip():
    g = Graph(5, [(0, 1), (1, 4), (2, 3)])
    assert Graph.from_adjacency(g.adjacency()) == g
    with pytest.raises(InputError):
        Graph.from_adjacency(np.array([[0, 1], [1, 1]]))
    with pytest.raises(InputError):
        Graph.from_adjacency(np.array([[0, 1], [0, 0]]))


def test_prob_from_latent_gram():
    x = np.array([[0.5, 0.5], [0.5, 0.0], [0.0, 0.5]])
    p = prob_from_latent(x)
    assert np.allclose(p, x @ x.T)
    bad = np.array([[2.0, 0.0], [2.0, 0.0]])
    with pytest.raises(ModelViolationError):
        prob_from_latent(bad)


def test_sample_rdpg_deterministic_and_extreme():
    p, _ = gen_sbm(sizes=(3, 3, 3))
    g1 = sample_rdpg(p, seed=9)
    g2 = sample_rdpg(p, seed=9)
    assert g1 == g2
    assert sample_rdpg(np.zeros((6, 6)), seed=1).m == 0
    ones = np.ones((5, 5))
    assert sample_rdpg(ones, seed=1).m == 10


@given(st.integers(0, 2**32 - 1))
def test_sample_respects_probabilities(seed):
    # edges may only appear where the probability is positive
    p = np.zeros((5, 5))
    p[0, 1] = p[1, 0] = 1.0
    g = sample_rdpg(p, seed=seed)
    assert g.edges == ((0, 1),)


def test_gen_sbm_defaults_match_block_structure():
    p, labels = gen_sbm()
    n = sum(DEFAULT_BLOCK_SIZES)
    assert p.shape == (n, n)
    assert labels.shape == (n,)
    b = DEFAULT_BLOCK_MATRIX
    for i in range(n):
        for j in range(n):
            if i != j:
                assert p[i, j] == b[labels[i], labels[j]]
    w = np.linalg.eigvalsh(p)
    assert w.min() > -1e-10


def test_gen_sbm_rejects_bad_sizes():
    with pytest.raises(ConfigError):
        gen_sbm(sizes=(0, 3, 3))
    with pytest.raises(ConfigError):
        gen_sbm(sizes=(3, 3))


def test_gen_sphere_caps_valid():
    x, labels = gen_sphere_caps(SphereCapsConfig(n=30, seed=2))
    assert x.shape == (30, 3)
    assert np.allclose(np.linalg.norm(x, axis=1), 1.0)
    p = prob_from_latent(x)
    assert p.min() >= 0.0 and p.max() <= 1.0 + 1e-12
    assert set(labels) == {0, 1}


def test_gen_balls_valid():
    x, labels = gen_balls(BallsConfig(n=24, seed=4))
    p = prob_from_latent(x)
    assert p.min() >= 0.0 and p.max() <= 1.0 + 1e-12
    assert labels.shape == (24,)


def test_generators_seeded():
    a, _ = gen_sphere_caps(SphereCapsConfig(n=12, seed=7))
    b, _ = gen_sphere_caps(SphereCapsConfig(n=12, seed=7))
    assert np.array_equal(a, b)
    c, _ = gen_balls(BallsConfig(n=12, seed=7))
    d, _ = gen_balls(BallsConfig(n=12, seed=7))
    assert np.array_equal(c, d)


def test_karate_shape():
    g, labels = karate()
    assert g.n == 34 and g.m == 78
    assert labels.shape == (34,)
    assert set(labels) == {0, 1}
    deg = g.degrees()
    # the two faction leaders are the highest-degree nodes
    assert deg[0] == 16 and deg[33] == 17
