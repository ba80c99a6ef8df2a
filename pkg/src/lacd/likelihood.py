"""Complete-data blockmodel log-likelihoods at plug-in estimates.

Used both to rank restarts inside :func:`lacd.em.fit` and by the BIC/ICL
criteria in :mod:`lacd.select`.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.special import xlogy

from .network import add_intercept, check_covariates, check_labels, edge_block_sums

log = logging.getLogger(__name__)


def _bernoulli_block(O, pairs, P):
    return xlogy(O, P) + xlogy(pairs - O, 1.0 - P)


def joint_log_likelihood(net, X, c_hat, beta_hat, K=None, P=None) -> float:
    """Blockmodel joint log-likelihood of labels and adjacency.

    Plug-ins: ``pi_k = n_k / sum_{k'<=K} n_k'`` and ``P_kl = O_kl / n_kl``
    (0 where ``n_kl = 0``), with the ordered-pair block sum halved. Pass
    ``P`` to evaluate at other link probabilities. ``K`` defaults to
    ``max(c_hat) - 1``, which is only right if the background is nonempty.
    """
    c = np.asarray(c_hat, dtype=np.int64)
    if K is None:
        K = max(int(c.max()) - 1, 1)
    c = check_labels(c, K, net.n)
    design = add_intercept(check_covariates(X, net.n))
    beta = np.asarray(beta_hat, dtype=float)
    if beta.shape != (design.shape[1],) or not np.all(np.isfinite(beta)):
        raise ValueError("beta must be finite with one entry per design column")
    eta = design @ beta
    y = (c <= K).astype(float)
    value = float(np.sum(y * eta - np.logaddexp(0.0, eta)))

    O, sizes, pairs = edge_block_sums(net, c, K)
    community = sizes[:K]
    if community.sum() > 0:
        value += float(np.sum(xlogy(community, community / community.sum())))
    else:
        log.warning("all nodes in background; community term is empty")
    if P is None:
        P = np.divide(O, pairs, out=np.zeros(O.shape), where=pairs > 0)
    value += 0.5 * float(_bernoulli_block(O, pairs, np.asarray(P, dtype=float)).sum())
    return value


def degree_corrected_block(net, members) -> float:
    """Bernoulli log-likelihood of the subgraph on ``members`` under
    ``p_ij = d_i d_j / (2m)`` (clipped), with ``d`` the within-subgraph
    degrees and ``m`` its edge count."""
    idx = np.flatnonzero(members)
    if idx.size < 2:
        return 0.0
    e = net.edges
    inside = members[e[:, 0]] & members[e[:, 1]]
    pos = np.full(net.n, -1, dtype=np.int64)
    pos[idx] = np.arange(idx.size)
    sub = pos[e[inside]]
    d = np.bincount(sub.ravel(), minlength=idx.size).astype(float)
    two_m = d.sum()
    if two_m == 0:
        return 0.0
    eps = 1e-12
    theta = d / np.sqrt(two_m)
    # non-edge term over all unordered pairs, then correct on the edges
    total = 0.0
    for start in range(0, idx.size, 1024):
        block = np.clip(np.outer(theta[start:start + 1024], theta), eps, 1 - eps)
        rows = np.arange(start, min(start + 1024, idx.size))
        upper = np.arange(idx.size)[None, :] > rows[:, None]
        total += float(np.log1p(-block)[upper].sum())
    p_edge = np.clip(theta[sub[:, 0]] * theta[sub[:, 1]], eps, 1 - eps)
    total += float(np.sum(np.log(p_edge) - np.log1p(-p_edge)))
    return total


def robust_joint_log_likelihood(net, X, c_hat, beta_hat, K=None) -> float:
    """As :func:`joint_log_likelihood`, but the background-internal block
    is scored under a degree-corrected model instead of a single ``P``."""
    c = np.asarray(c_hat, dtype=np.int64)
    if K is None:
        K = max(int(c.max()) - 1, 1)
    value = joint_log_likelihood(net, X, c, beta_hat, K)
    O, _, pairs = edge_block_sums(net, c, K)
    Pbb = O[K, K] / pairs[K, K] if pairs[K, K] > 0 else 0.0
    value -= 0.5 * float(_bernoulli_block(O[K, K], pairs[K, K], Pbb))
    return value + degree_corrected_block(net, c == K + 1)
