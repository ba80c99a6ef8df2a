"""Partition agreement: adjusted Rand index and misclassification rate."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UnsupportedError

MAX_PERMUTATION_GROUPS = 8


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    rows: np.ndarray
    cols: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_labels(cls, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        if a.shape != b.shape or a.ndim != 1:
            raise DimensionError("label vectors must be 1-D and of equal length")
        _, ai = np.unique(a, return_inverse=True)
        _, bi = np.unique(b, return_inverse=True)
        counts = np.zeros((ai.max(initial=-1) + 1, bi.max(initial=-1) + 1), dtype=np.int64)
        np.add.at(counts, (ai, bi), 1)
        return cls(counts, counts.sum(axis=1), counts.sum(axis=0))


def _pairs(x):
    x = np.asarray(x, dtype=np.int64)
    return int(np.sum(x * (x - 1) // 2))


def adjusted_rand_index(a, b) -> float:
    """Hubert-Arabie adjusted Rand index.

    Returns 1.0 when the chance-corrected denominator vanishes (both
    partitions trivial in the same way), by convention.
    """
    t = ContingencyTable.from_labels(a, b)
    if t.n < 2:
        raise DimensionError("need at least two items")
    index = _pairs(t.counts)
    sa, sb = _pairs(t.rows), _pairs(t.cols)
    expected = sa * sb / (t.n * (t.n - 1) // 2)
    max_index = 0.5 * (sa + sb)
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


def misclassification_rate(c_hat, c_true, n_groups: int) -> float:
    """Fraction of disagreeing nodes under the best relabelling of ``c_true``.

    Labels are 1-based in ``1..n_groups``; exhaustive over ``n_groups!``
    permutations, so limited to 8 groups.
    """
    c_hat = np.asarray(c_hat, dtype=np.int64)
    c_true = np.asarray(c_true, dtype=np.int64)
    if c_hat.shape != c_true.shape:
        raise DimensionError("label vectors must have equal length")
    if n_groups > MAX_PERMUTATION_GROUPS:
        raise UnsupportedError(f"permutation search limited to {MAX_PERMUTATION_GROUPS} groups")
    for c in (c_hat, c_true):
        if c.size and (c.min() < 1 or c.max() > n_groups):
            raise DimensionError(f"labels must lie in 1..{n_groups}")
    n = c_hat.size
    if n == 0:
        return 0.0
    counts = np.zeros((n_groups, n_groups), dtype=np.int64)
    np.add.at(counts, (c_hat - 1, c_true - 1), 1)
    cols = np.arange(n_groups)
    best = max(
        counts[list(perm), cols].sum()
        for perm in itertools.permutations(range(n_groups))
    )
    return float((n - best) / n)
