import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from lacd.errors import DimensionError, InvalidGraphError
from lacd.network import Network, block_counts, check_labels, edge_block_sums


@st.composite
def graphs_with_labels(draw, max_n=20, max_k=4):
    n = draw(st.integers(1, max_n))
    K = draw(st.integers(1, max_k))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [p for p, k in zip(pairs, keep) if k]
    labels = draw(st.lists(st.integers(1, K + 1), min_size=n, max_size=n))
    return n, edges, np.array(labels), K


def test_block_counts_empty_graph():
    B, d = block_counts(Network(4), [1, 2, 1, 2], 1)
    assert B.shape == (4, 2)
    assert not B.any() and not d.any()


def test_block_counts_path():
    # node 2's only neighbour is node 1, which sits in block 1
    B, d = block_counts(Network(3, [(0, 1), (1, 2)]), [1, 1, 2], 1)
    np.testing.assert_array_equal(B, [[1, 0], [1, 1], [1, 0]])
    np.testing.assert_array_equal(d, [1, 2, 1])


def test_block_counts_complete_graph():
    edges = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    B, d = block_counts(Network(4, edges), [1, 1, 1, 1], 1)
    np.testing.assert_array_equal(B, [[3, 0]] * 4)
    np.testing.assert_array_equal(d, [3] * 4)


def test_block_counts_dimension_mismatch():
    with pytest.raises(DimensionError):
        block_counts(Network(3), [1, 1], 1)


def test_edge_block_sums_examples():
    O, sizes, pairs = edge_block_sums(Network(4, [(0, 1), (2, 3)]), [1, 1, 2, 2], 1)
    np.testing.assert_array_equal(O, [[2, 0], [0, 2]])
    np.testing.assert_array_equal(sizes, [2, 2])
    np.testing.assert_array_equal(pairs, [[2, 4], [4, 2]])
    O, _, _ = edge_block_sums(Network(2, [(0, 1)]), [1, 2], 1)
    np.testing.assert_array_equal(O, [[0, 1], [1, 0]])
    O, _, _ = edge_block_sums(Network(3), [1, 2, 2], 1)
    assert not O.any()


@given(graphs_with_labels())
def test_block_counts_match_dense_oracle(case):
    n, edges, e, K = case
    B, d = block_counts(Network(n, edges), e, K)
    B_ref, d_ref = oracles.block_counts(n, edges, e, K)
    np.testing.assert_array_equal(B, B_ref)
    np.testing.assert_array_equal(d, d_ref)
    np.testing.assert_array_equal(B.sum(axis=1), d)
    assert d.sum() == 2 * len(edges)


@given(graphs_with_labels())
def test_edge_block_sums_match_oracle(case):
    n, edges, c, K = case
    O, sizes, pairs = edge_block_sums(Network(n, edges), c, K)
    O_ref, s_ref, p_ref = oracles.edge_block_sums(n, edges, c, K)
    np.testing.assert_array_equal(O, O_ref)
    np.testing.assert_array_equal(sizes, s_ref)
    np.testing.assert_array_equal(pairs, p_ref)
    np.testing.assert_array_equal(O, O.T)
    assert O.sum() == 2 * len(edges)


@pytest.mark.parametrize("edges, msg", [
    ([(0, 0)], "self-loop"),
    ([(0, 1), (1, 0)], "duplicate"),
    ([(0, 5)], "outside"),
])
def test_network_rejects_bad_edges(edges, msg):
    with pytest.raises(InvalidGraphError, match=msg):
        Network(3, edges)


def test_network_is_immutable_and_hashable():
    net = Network(3, [(2, 1), (0, 1)])
    np.testing.assert_array_equal(net.edges, [[0, 1], [1, 2]])
    with pytest.raises(ValueError):
        net.edges[0, 0] = 2
    assert net == Network(3, [(1, 0), (1, 2)])
    assert hash(net) == hash(Network(3, [(1, 2), (0, 1)]))
    assert list(net.neighbors(1)) == [0, 2]
    assert net.nodes == ("0", "1", "2")


def test_network_node_names():
    net = Network(2, [(0, 1)], nodes=["a", "b"])
    assert net.nodes == ("a", "b")
    with pytest.raises(InvalidGraphError):
        Network(2, [(0, 1)], nodes=["a", "a"])


def test_check_labels():
    with pytest.raises(DimensionError):
        check_labels([0, 1], 1)
    with pytest.raises(DimensionError):
        check_labels([1, 3], 1)
    with pytest.raises(DimensionError):
        check_labels([1, 2], 0)
    np.testing.assert_array_equal(check_labels([1.0, 2.0], 1), [1, 2])
