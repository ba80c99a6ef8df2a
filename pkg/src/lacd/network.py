"""Graph, covariate and label containers plus block-count primitives.

Nodes are indexed from 0; group labels are 1-based, with ``K + 1``
reserved for the background group.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, InvalidGraphError

#: Largest ``n`` for which :meth:`Network.dense` will materialise a matrix.
DENSE_LIMIT = 2000


class Network:
    """Undirected simple graph stored as a CSR adjacency matrix.

    Parameters
    ----------
    n : int
        Number of nodes.
    edges : array-like of shape (m, 2)
        Unordered node pairs. Self-loops, duplicates (in either
        orientation) and out-of-range endpoints raise
        :class:`InvalidGraphError`.
    nodes : sequence of str, optional
        External node identifiers, defaulting to ``"0", ..., "n-1"``.
        Not part of equality.
    """

    __slots__ = ("_n", "_edges", "_adj", "_degree", "_nodes")

    def __init__(self, n, edges=(), nodes=None):
        n = int(n)
        if n < 0:
            raise InvalidGraphError("node count must be nonnegative")
        if nodes is not None:
            nodes = tuple(str(v) for v in nodes)
            if len(nodes) != n or len(set(nodes)) != n:
                raise InvalidGraphError("nodes must be n distinct identifiers")
        self._nodes = nodes
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= n:
                raise InvalidGraphError(f"edge endpoint outside [0, {n})")
            if np.any(e[:, 0] == e[:, 1]):
                bad = int(np.flatnonzero(e[:, 0] == e[:, 1])[0])
                raise InvalidGraphError(f"self-loop at node {int(e[bad, 0])}")
        e = np.sort(e, axis=1)
        keys = e[:, 0] * n + e[:, 1]
        order = np.argsort(keys, kind="stable")
        keys = keys[order]
        if keys.size > 1 and np.any(keys[1:] == keys[:-1]):
            dup = int(keys[1:][keys[1:] == keys[:-1]][0])
            raise InvalidGraphError(f"duplicate edge ({dup // n}, {dup % n})")
        e = e[order]
        e.setflags(write=False)
        self._n = n
        self._edges = e
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        adj = sp.csr_matrix(
            (np.ones(rows.size, dtype=np.int64), (rows, cols)), shape=(n, n)
        )
        adj.sort_indices()
        self._adj = adj
        self._degree = np.diff(adj.indptr).astype(np.int64)
        self._degree.setflags(write=False)

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> np.ndarray:
        """Read-only ``(m, 2)`` array of pairs with ``i < j``, lexicographically sorted."""
        return self._edges

    @property
    def nodes(self) -> tuple:
        if self._nodes is None:
            return tuple(str(i) for i in range(self._n))
        return self._nodes

    @property
    def n_edges(self) -> int:
        return int(self._edges.shape[0])

    @property
    def degree(self) -> np.ndarray:
        return self._degree

    def neighbors(self, i: int) -> np.ndarray:
        a = self._adj
        return a.indices[a.indptr[i] : a.indptr[i + 1]]

    def adjacency(self) -> sp.csr_matrix:
        """Sparse symmetric 0/1 adjacency (a copy)."""
        return self._adj.copy()

    def dense(self, limit: int = DENSE_LIMIT) -> np.ndarray:
        if self._n > limit:
            raise DimensionError(f"n={self._n} exceeds dense limit {limit}")
        return self._adj.toarray()

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self):
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self):
        return f"Network(n={self._n}, n_edges={self.n_edges})"


def add_intercept(X) -> np.ndarray:
    """Return the design matrix ``[1, X]`` for an ``(n, P)`` covariate matrix."""
    X = check_covariates(X)
    return np.hstack([np.ones((X.shape[0], 1)), X])


def check_covariates(X, n=None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionError("covariates must be a 2-D array")
    if n is not None and X.shape[0] != n:
        raise DimensionError(f"covariate rows {X.shape[0]} != node count {n}")
    if not np.all(np.isfinite(X)):
        raise DimensionError("covariates contain non-finite values")
    return X


def check_labels(labels, K: int, n=None) -> np.ndarray:
    """Validate a 1-based label vector over groups ``1..K+1``."""
    if K < 1:
        raise DimensionError("K must be at least 1")
    c = np.asarray(labels)
    if c.ndim != 1:
        raise DimensionError("labels must be one-dimensional")
    if n is not None and c.shape[0] != n:
        raise DimensionError(f"label length {c.shape[0]} != node count {n}")
    if c.size and not np.issubdtype(c.dtype, np.integer):
        if not np.all(c == np.round(c)):
            raise DimensionError("labels must be integers")
    c = c.astype(np.int64)
    if c.size and (c.min() < 1 or c.max() > K + 1):
        raise DimensionError(f"labels must lie in 1..{K + 1}")
    return c


def one_hot(labels, n_groups: int) -> np.ndarray:
    c = np.asarray(labels, dtype=np.int64)
    Z = np.zeros((c.size, n_groups))
    Z[np.arange(c.size), c - 1] = 1.0
    return Z


def block_counts(net: Network, e, K: int):
    """Per-node edge counts into each block of the blocking vector ``e``.

    Returns
    -------
    B : ndarray of shape (n, K + 1), int64
        ``B[i, k]`` is the number of neighbours ``j`` of ``i`` with
        ``e[j] == k + 1``.
    d : ndarray of shape (n,), int64
        Node degrees (row sums of ``B``).
    """
    e = check_labels(e, K, net.n)
    H = one_hot(e, K + 1).astype(np.int64)
    B = np.asarray(net._adj @ H, dtype=np.int64).reshape(net.n, K + 1)
    return B, net.degree.copy()


def edge_block_sums(net: Network, c, K: int):
    """Ordered-pair link counts between groups.

    Returns ``(O, sizes, pairs)`` where ``O[k, l]`` sums ``A_ij`` over
    ordered pairs with ``c_i = k+1, c_j = l+1`` (so a within-group edge is
    counted twice), ``sizes[k]`` is the group size and ``pairs[k, l]`` is
    ``n_k n_l`` off the diagonal and ``n_k (n_k - 1)`` on it.
    """
    c = check_labels(c, K, net.n)
    G = K + 1
    e = net.edges
    O = np.zeros((G, G), dtype=np.int64)
    if e.size:
        np.add.at(O, (c[e[:, 0]] - 1, c[e[:, 1]] - 1), 1)
        O = O + O.T
    sizes = np.bincount(c - 1, minlength=G).astype(np.int64)
    pairs = np.outer(sizes, sizes)
    pairs[np.diag_indices(G)] = sizes * (sizes - 1)
    return O, sizes, pairs
