"""Choosing the number of communities with BIC and ICL.

Both criteria plug the fitted labels into the full blockmodel joint
log-likelihood (logistic part, community proportions, and Bernoulli
block terms including the background block), whichever pseudo-likelihood
produced the labels.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import em
from .errors import FitError, SelectError
from .likelihood import joint_log_likelihood, robust_joint_log_likelihood  # noqa: F401

log = logging.getLogger(__name__)


def bic_penalty(n, K) -> float:
    return (K + 1) * (K + 2) / 2 * math.log(n * (n - 1) / 2)


def icl_penalty(n, K) -> float:
    return bic_penalty(n, K) + K * math.log(n)


def bic(net, X, fit, K=None) -> float:
    K = fit.K if K is None else K
    ll = joint_log_likelihood(net, X, fit.c_hat, fit.params.beta, K)
    return -2.0 * ll + bic_penalty(net.n, K)


def icl(net, X, fit, K=None) -> float:
    K = fit.K if K is None else K
    ll = joint_log_likelihood(net, X, fit.c_hat, fit.params.beta, K)
    return -2.0 * ll + icl_penalty(net.n, K)


@dataclass
class KRecord:
    K: int
    joint_loglik: float
    bic: float
    icl: float
    pll: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class SelectionReport:
    records: list
    chosen_K_bic: int
    chosen_K_icl: int
    failures: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        return {
            "records": [r.to_dict() for r in self.records],
            "chosen_K_bic": self.chosen_K_bic,
            "chosen_K_icl": self.chosen_K_icl,
            "failures": {str(k): v for k, v in self.failures.items()},
            "plug_in": "P_kl = O_kl / n_kl for every block, background included",
        }


def select_k(net, X, k_range, variant="robust", options=None) -> SelectionReport:
    """Fit each ``K`` in ``k_range`` with the same options and seeds and pick
    the minimisers of BIC and ICL (ties to the smaller ``K``)."""
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise SelectError("empty K range")
    options = options or em.FitOptions()
    records, failures, fits = [], {}, {}
    n = net.n
    for K in ks:
        if K < 1 or K >= n - 1:
            failures[K] = "K outside [1, n-2]"
            continue
        try:
            res = em.fit(net, X, K, variant, options)
        except FitError as exc:
            failures[K] = str(exc)
            continue
        ll = joint_log_likelihood(net, X, res.c_hat, res.params.beta, K)
        records.append(KRecord(K, ll, -2 * ll + bic_penalty(n, K),
                               -2 * ll + icl_penalty(n, K), res.pll))
        fits[K] = res
    if not records:
        raise SelectError(f"every K failed: {failures}")
    kb = min(records, key=lambda r: (r.bic, r.K)).K
    ki = min(records, key=lambda r: (r.icl, r.K)).K
    return SelectionReport(records, kb, ki, failures, fits)
