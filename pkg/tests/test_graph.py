import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from opiniond.errors import InvalidParameterError, PreconditionError
from opiniond.graph import (AdaptiveGraph, erdos_renyi, format_edge_list, random_neighbor,
                            random_node, read_edge_list, rewire_edge, write_edge_list)
from opiniond.rng import RandomStream


def test_er_zero_degree_has_no_edges():
    g = erdos_renyi(10, 0, RandomStream(3))
    assert g.edge_count == 0
    g.check_invariants()


def test_er_two_nodes_full_probability():
    g = erdos_renyi(2, 1, RandomStream(11))
    assert g.edges().tolist() == [[0, 1]]


@pytest.mark.parametrize("n,k", [(1, 0), (5, 5), (5, -1)])
def test_er_invalid(n, k):
    with pytest.raises(InvalidParameterError):
        erdos_renyi(n, k, RandomStream(0))


def test_er_mean_degree_over_seeds():
    means = [2 * erdos_renyi(1000, 10, RandomStream(s)).edge_count / 1000 for s in range(50)]
    assert 9.5 <= np.mean(means) <= 10.5


def test_er_degree_distribution_binomial():
    n, k = 500, 8
    degs = np.concatenate([erdos_renyi(n, k, RandomStream(100 + s)).degrees() for s in range(20)])
    binom = stats.binom(n - 1, k / (n - 1))
    # pool the tails so every expected count is at least 5
    lo, hi = 2, 15
    observed = [np.sum(degs <= lo)] + [np.sum(degs == x) for x in range(lo + 1, hi)] + [np.sum(degs >= hi)]
    probs = [binom.cdf(lo)] + [binom.pmf(x) for x in range(lo + 1, hi)] + [binom.sf(hi - 1)]
    expected = np.array(probs) * degs.size
    chi2 = np.sum((np.array(observed) - expected) ** 2 / expected)
    # degrees within one graph are weakly dependent; pooled test is the stated oracle
    assert stats.chi2.sf(chi2, len(observed) - 1) > 0.01


def test_er_is_deterministic():
    a = erdos_renyi(200, 6, RandomStream(8))
    b = erdos_renyi(200, 6, RandomStream(8))
    assert a.adjacency() == b.adjacency()


def test_random_node_single():
    g = AdaptiveGraph(1)
    rng = RandomStream(0)
    assert all(random_node(g, rng) == 0 for _ in range(50))


def test_random_node_uniform():
    g = AdaptiveGraph(4)
    rng = RandomStream(1)
    counts = np.bincount([random_node(g, rng) for _ in range(100_000)], minlength=4)
    assert np.all(np.abs(counts / 1e5 - 0.25) < 0.01)
    assert stats.chisquare(counts).pvalue > 0.01


def test_random_node_deterministic():
    g = AdaptiveGraph(100)
    rng = RandomStream(77)
    assert random_node(g, rng.copy()) == random_node(g, rng.copy())


def test_random_neighbor_singleton_and_isolated():
    g = AdaptiveGraph.from_edges(5, [(0, 3)])
    rng = RandomStream(0)
    assert random_neighbor(g, 0, rng) == 3
    assert random_neighbor(g, 1, rng) is None


def test_random_neighbor_uniform():
    g = AdaptiveGraph.from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    rng = RandomStream(2)
    counts = np.bincount([random_neighbor(g, 0, rng) for _ in range(100_000)], minlength=5)[1:]
    assert np.all(np.abs(counts / 1e5 - 0.25) < 0.01)


def test_rewire_complete_graph_has_no_target():
    g = AdaptiveGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    for new in (0, 1, 2):
        with pytest.raises(PreconditionError):
            rewire_edge(g, 0, 1, new)
    assert g.edge_count == 3


def test_rewire_path():
    g = AdaptiveGraph.from_edges(3, [(0, 1), (1, 2)])
    rewire_edge(g, 0, 1, 2)
    assert g.edges().tolist() == [[0, 2], [1, 2]]
    assert g.edge_count == 2
    g.check_invariants()


def test_rewire_missing_edge():
    g = AdaptiveGraph.from_edges(4, [(0, 1)])
    with pytest.raises(PreconditionError):
        rewire_edge(g, 0, 2, 3)


def test_add_edge_rejects_self_loop_and_duplicate():
    g = AdaptiveGraph(3)
    with pytest.raises(PreconditionError):
        g.add_edge(1, 1)
    g.add_edge(0, 1)
    with pytest.raises(PreconditionError):
        g.add_edge(1, 0)


@settings(max_examples=200)
@given(seed=st.integers(0, 2**32), moves=st.integers(1, 60))
def test_random_rewires_keep_invariants(seed, moves):
    rng = RandomStream(seed)
    g = erdos_renyi(12, 4, rng)
    m = g.edge_count
    for _ in range(moves):
        a = random_node(g, rng)
        old = random_neighbor(g, a, rng)
        new = random_node(g, rng)
        if old is None or new == a or g.has_edge(a, new):
            continue
        rewire_edge(g, a, old, new)
        assert g.edge_count == m
    g.check_invariants()


def test_from_adjacency_rejects_asymmetric():
    with pytest.raises(PreconditionError):
        AdaptiveGraph.from_adjacency([[1], []])


def test_edge_list_round_trip(tmp_path):
    g = erdos_renyi(30, 4, RandomStream(4))
    e = g.edges()
    text = format_edge_list(e)
    lines = text.splitlines()
    pairs = [tuple(map(int, line.split())) for line in lines]
    assert pairs == sorted(pairs) and all(u < v for u, v in pairs)
    write_edge_list(e, tmp_path / "e.txt")
    np.testing.assert_array_equal(read_edge_list(tmp_path / "e.txt"), e)
    write_edge_list(np.empty((0, 2), dtype=np.int64), tmp_path / "empty.txt")
    assert read_edge_list(tmp_path / "empty.txt").shape == (0, 2)
