"""Starting blocking vectors for the outer loop of :func:`lacd.em.fit`."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from sklearn.cluster import KMeans


def degree_quantile_labels(degree, K) -> np.ndarray:
    """Split nodes into ``K + 1`` equal blocks by decreasing degree.

    The highest-degree block is labelled 1 and the lowest ``K + 1``.
    """
    n = len(degree)
    order = np.argsort(-np.asarray(degree), kind="stable")
    e = np.empty(n, dtype=np.int64)
    e[order] = np.arange(n) * (K + 1) // n + 1
    return e


def random_labels(rng, n, K) -> np.ndarray:
    return rng.integers(1, K + 2, size=n)


def spectral_labels(net, n_groups, seed=0) -> np.ndarray:
    """Regularised spectral clustering into ``n_groups`` clusters (1-based).

    Leading eigenvectors of ``(D + tI)^{-1/2} A (D + tI)^{-1/2}`` with
    ``t`` the mean degree, rows normalised to unit length, then k-means.
    """
    n = net.n
    A = net.adjacency().astype(float)
    deg = net.degree.astype(float)
    tau = max(deg.mean(), 1e-3)
    s = 1.0 / np.sqrt(deg + tau)
    L = sp.diags(s) @ A @ sp.diags(s)
    k = min(n_groups, n - 1)
    if n <= 2 * k + 1 or n < 64:
        vals, vecs = np.linalg.eigh(L.toarray())
        vecs = vecs[:, np.argsort(vals)[::-1][:k]]
    else:
        v0 = np.random.Generator(np.random.PCG64(seed)).random(n)
        vals, vecs = spla.eigsh(L, k=k, which="LA", v0=v0)
        vecs = vecs[:, np.argsort(vals)[::-1]]
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    vecs = vecs / np.where(norms > 0, norms, 1.0)
    km = KMeans(n_clusters=n_groups, n_init=10, random_state=seed).fit(vecs)
    return km.labels_.astype(np.int64) + 1


def cluster_densities(net, labels, n_groups) -> np.ndarray:
    """Within-cluster edge density for each cluster (0 for singletons)."""
    e = net.edges
    inside = np.zeros(n_groups)
    if e.size:
        same = labels[e[:, 0]] == labels[e[:, 1]]
        inside = np.bincount(labels[e[same, 0]] - 1, minlength=n_groups).astype(float)
    sizes = np.bincount(labels - 1, minlength=n_groups).astype(float)
    pairs = sizes * (sizes - 1) / 2
    return np.divide(inside, pairs, out=np.zeros(n_groups), where=pairs > 0)


def background_rotations(net, labels, K) -> list:
    """One relabelling of ``labels`` per choice of background cluster.

    Communities keep decreasing within-cluster density order; the first
    entry puts the least cohesive cluster in the background.
    """
    dens = cluster_densities(net, labels, K + 1)
    order = list(np.argsort(-dens, kind="stable"))
    out = []
    for bg in reversed(order):
        rest = [g for g in order if g != bg]
        mapping = np.empty(K + 1, dtype=np.int64)
        mapping[rest] = np.arange(1, K + 1)
        mapping[bg] = K + 1
        out.append(mapping[labels - 1])
    return out


def perturb(rng, labels, K, fraction) -> np.ndarray:
    """Reassign a random ``fraction`` of nodes to uniformly drawn groups."""
    e = labels.copy()
    hit = rng.random(e.size) < fraction
    e[hit] = rng.integers(1, K + 2, size=int(hit.sum()))
    return e


def induced_subgraph(net, keep):
    """Subgraph on the nodes where ``keep`` is true, reindexed from 0."""
    from .network import Network

    idx = np.flatnonzero(keep)
    pos = np.full(net.n, -1, dtype=np.int64)
    pos[idx] = np.arange(idx.size)
    e = net.edges
    inside = keep[e[:, 0]] & keep[e[:, 1]]
    return Network(idx.size, pos[e[inside]])


def covariate_labels(net, X, K, seed=0, quantile=0.5) -> list:
    """Covariate-informed starts, two per covariate column.

    For each column and sign, nodes below the ``quantile`` of the signed
    covariate go to the background and the rest are split into ``K``
    communities by spectral clustering of their induced subgraph.
    """
    X = np.asarray(X, dtype=float).reshape(net.n, -1)
    out = []
    for p in range(X.shape[1]):
        for sign in (1.0, -1.0):
            x = sign * X[:, p]
            keep = x > np.quantile(x, quantile)
            if keep.sum() <= K:
                continue
            sub = induced_subgraph(net, keep)
            e = np.full(net.n, K + 1, dtype=np.int64)
            e[keep] = spectral_labels(sub, K, seed) if K > 1 else 1
            out.append(e)
    return out
