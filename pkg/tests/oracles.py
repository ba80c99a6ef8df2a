"""Slow, direct reference computations used to check the package.

Written from the model formulas with plain loops (and mpmath where
precision matters); nothing here imports the code under test.
"""

import itertools
import math

import mpmath
import numpy as np


def dense_adjacency(n, edges):
    A = np.zeros((n, n), dtype=np.int64)
    for i, j in edges:
        A[i, j] = A[j, i] = 1
    return A


def block_counts(n, edges, e, K):
    A = dense_adjacency(n, edges)
    B = np.zeros((n, K + 1), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if A[i, j]:
                B[i, e[j] - 1] += 1
    return B, A.sum(axis=1)


def edge_block_sums(n, edges, c, K):
    A = dense_adjacency(n, edges)
    O = np.zeros((K + 1, K + 1), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            O[c[i] - 1, c[j] - 1] += A[i, j]
    sizes = np.array([sum(1 for x in c if x == k) for k in range(1, K + 2)])
    pairs = np.array([[sizes[k] * (sizes[l] - (1 if k == l else 0)) for l in range(K + 1)]
                      for k in range(K + 1)])
    return O, sizes, pairs


def posterior(variant, B, design, beta, pi, rates, dps=50):
    """Posterior label probabilities by the direct product formula."""
    with mpmath.workdps(dps):
        n, G = B.shape
        K = G - 1
        Z = np.zeros((n, G))
        for i in range(n):
            eta = mpmath.fsum(mpmath.mpf(float(a)) * mpmath.mpf(float(b))
                              for a, b in zip(design[i], beta))
            s = 1 / (1 + mpmath.exp(-eta))
            w = []
            for l in range(G):
                mix = s * mpmath.mpf(float(pi[l])) if l < K else 1 - s
                if variant == "multinomial":
                    ker = mpmath.mpf(1)
                    for k in range(G):
                        ker *= mpmath.mpf(float(rates[l, k])) ** int(B[i, k])
                else:
                    cols = range(K) if variant == "robust" else range(G)
                    mu = mpmath.fsum(mpmath.mpf(float(rates[l, k])) for k in cols)
                    ker = mpmath.exp(-mu)
                    for k in cols:
                        ker *= mpmath.mpf(float(rates[l, k])) ** int(B[i, k])
                w.append(mix * ker)
            tot = mpmath.fsum(w)
            Z[i] = [float(x / tot) for x in w]
        return Z


def sigmoid(t):
    return 1.0 / (1.0 + math.exp(-t)) if t >= 0 else math.exp(t) / (1.0 + math.exp(t))


def logistic_gradient_ascent(design, w, steps=200000, lr=None):
    """Plain fixed-step gradient ascent on the weighted logistic objective."""
    n, p = design.shape
    beta = np.zeros(p)
    lr = lr or 4.0 / np.linalg.norm(design, 2) ** 2
    for _ in range(steps):
        prob = 1.0 / (1.0 + np.exp(-(design @ beta)))
        g = design.T @ (w - prob)
        beta += lr * g
        if np.max(np.abs(g)) < 1e-12:
            break
    return beta


def grid_argmax(f, lo, hi, points=20001, rounds=4):
    """1-D argmax by repeated grid refinement."""
    for _ in range(rounds):
        xs = np.linspace(lo, hi, points)
        vals = np.array([f(x) for x in xs])
        k = int(np.argmax(vals))
        step = xs[1] - xs[0]
        lo, hi = xs[max(k - 1, 0)] - step, xs[min(k + 1, points - 1)] + step
    return xs[k]


def rand_pair_counts(a, b):
    """Pair-counting ARI by enumerating all unordered pairs."""
    n = len(a)
    same_both = same_a = same_b = 0
    for i, j in itertools.combinations(range(n), 2):
        sa, sb = a[i] == a[j], b[i] == b[j]
        same_a += sa
        same_b += sb
        same_both += sa and sb
    total = n * (n - 1) // 2
    expected = same_a * same_b / total
    max_index = (same_a + same_b) / 2
    if max_index == expected:
        return 1.0
    return (same_both - expected) / (max_index - expected)


def misclassification_brute(c_hat, c_true, G):
    n = len(c_hat)
    best = n
    for perm in itertools.permutations(range(1, G + 1)):
        wrong = sum(1 for x, y in zip(c_hat, c_true) if x != perm[y - 1])
        best = min(best, wrong)
    return best / n


def background_fraction(beta0, slope, nodes=200001):
    """E[1 - sigmoid(beta0 + slope x)] for x ~ U(-1, 1), by the trapezoid rule."""
    xs = np.linspace(-1.0, 1.0, nodes)
    f = 1.0 / (1.0 + np.exp(beta0 + slope * xs))
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    return float(trapezoid(f, xs) / 2.0)


def joint_loglik(n, edges, X, c, beta, K, P=None):
    """Blockmodel joint log-likelihood by summing over node pairs directly."""
    A = dense_adjacency(n, edges)
    design = np.hstack([np.ones((n, 1)), np.asarray(X, dtype=float).reshape(n, -1)])
    total = 0.0
    for i in range(n):
        eta = float(design[i] @ beta)
        y = 1.0 if c[i] <= K else 0.0
        total += y * eta - math.log1p(math.exp(eta)) if eta < 30 else y * eta - eta
    sizes = [sum(1 for x in c if x == k) for k in range(1, K + 1)]
    m = sum(sizes)
    for s in sizes:
        if s:
            total += s * math.log(s / m)
    if P is None:
        O, _, pairs = edge_block_sums(n, edges, c, K)
        P = np.where(pairs > 0, O / np.maximum(pairs, 1), 0.0)
    for i in range(n):
        for j in range(i + 1, n):
            p = P[c[i] - 1, c[j] - 1]
            if A[i, j]:
                total += math.log(p) if p > 0 else -math.inf
            else:
                total += math.log1p(-p) if p < 1 else -math.inf
    return total
