"""Synthetic networks from the covariate-augmented blockmodel.

Draw order for one network (all from a single ``numpy.random.Generator``
built on PCG64): covariates, relevance uniforms, community choices,
background intensities (heterogeneous mode only), then one uniform per
unordered node pair in ``numpy.triu_indices`` order. Keeping the order
fixed makes a network a pure function of its seed.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .errors import ConfigError
from .network import Network

P11_GRID = (0.15, 0.25)
BETA0_GRID = (-1.0, 0.0, 1.0)
SLOPE = 4.0
P_BETWEEN = 0.05
P_BACKGROUND = 0.10
U_MAX = 0.2
BACKGROUND_LINKS = ("constant", "intensity")


def uniform_covariates(rng, n, P):
    return rng.uniform(-1.0, 1.0, size=(n, P))


@dataclass(frozen=True, eq=False)
class GenConfig:
    n: int
    K: int
    beta: tuple
    pi: tuple
    P_within: np.ndarray
    u_max: Optional[float] = None
    covariates: Callable = field(default=uniform_covariates, compare=False)
    seed: Optional[int] = None
    #: heterogeneous mode only: background-community pairs link with the
    #: constant ``P_within[K, l]`` ("constant") or with the background
    #: node's intensity ``u_i`` ("intensity")
    background_link: str = "constant"

    @property
    def heterogeneous(self) -> bool:
        return self.u_max is not None

    @property
    def n_covariates(self) -> int:
        return len(self.beta) - 1

    def validate(self):
        if self.n < 1 or self.K < 1:
            raise ConfigError("n and K must be positive")
        pi = np.asarray(self.pi, dtype=float)
        if pi.shape != (self.K,) or np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-12:
            raise ConfigError("pi must be a length-K probability vector")
        P = np.asarray(self.P_within, dtype=float)
        if P.shape != (self.K + 1, self.K + 1):
            raise ConfigError("P_within must be (K+1) x (K+1)")
        if not np.allclose(P, P.T, rtol=0, atol=0):
            raise ConfigError("P_within must be symmetric")
        if np.any(P < 0) or np.any(P > 1):
            raise ConfigError("link probabilities must lie in [0, 1]")
        if len(self.beta) < 1 or not np.all(np.isfinite(self.beta)):
            raise ConfigError("beta must be a finite vector with intercept first")
        if self.u_max is not None and not 0.0 < self.u_max <= 1.0:
            raise ConfigError("u_max must lie in (0, 1]")
        if self.background_link not in BACKGROUND_LINKS:
            raise ConfigError(f"background_link must be one of {BACKGROUND_LINKS}")
        return self

    def with_seed(self, seed):
        return dataclasses.replace(self, seed=seed)


@dataclass(frozen=True, eq=False)
class SyntheticNetwork:
    net: Network
    X: np.ndarray
    c_true: np.ndarray
    K: int
    u: Optional[np.ndarray] = None


def generate(config: GenConfig, rng=None) -> SyntheticNetwork:
    """Draw one network; ``rng`` overrides ``config.seed`` when given."""
    config.validate()
    if rng is None:
        if config.seed is None:
            raise ConfigError("either config.seed or rng is required")
        rng = np.random.Generator(np.random.PCG64(config.seed))
    n, K = config.n, config.K
    X = np.asarray(config.covariates(rng, n, config.n_covariates), dtype=float)
    X = X.reshape(n, config.n_covariates)
    beta = np.asarray(config.beta, dtype=float)
    relevant = rng.random(n) < expit(beta[0] + X @ beta[1:])
    community = rng.choice(K, size=n, p=np.asarray(config.pi, dtype=float)) + 1
    c = np.where(relevant, community, K + 1).astype(np.int64)

    P = np.asarray(config.P_within, dtype=float)
    iu, ju = np.triu_indices(n, k=1)
    prob = P[c[iu] - 1, c[ju] - 1]
    u = None
    if config.heterogeneous:
        bg = c == K + 1
        u = np.zeros(n)
        u[bg] = rng.uniform(0.0, config.u_max, size=int(bg.sum()))
        bi, bj = bg[iu], bg[ju]
        both = bi & bj
        prob = np.where(both, np.sqrt(u[iu] * u[ju]), prob)
        if config.background_link == "intensity":
            prob = np.where(bi & ~bj, u[iu], prob)
            prob = np.where(bj & ~bi, u[ju], prob)
    hit = rng.random(iu.size) < prob
    net = Network(n, np.column_stack([iu[hit], ju[hit]]))
    return SyntheticNetwork(net, X, c, K, u)


def _check_grid(p11, beta0):
    if not (P11_GRID[0] - 1e-12 <= p11 <= P11_GRID[1] + 1e-12):
        raise ConfigError(f"p11={p11} outside [{P11_GRID[0]}, {P11_GRID[1]}]")
    if beta0 not in BETA0_GRID:
        raise ConfigError(f"beta0={beta0} not in {BETA0_GRID}")


def planted_matrix(K, p_within, p_between=P_BETWEEN, p_background=P_BACKGROUND):
    P = np.full((K + 1, K + 1), p_between)
    P[np.diag_indices(K)] = p_within
    P[K, :] = p_background
    P[:, K] = p_background
    return P


def scenario_table1(p11, beta0, seed=None) -> GenConfig:
    """Two communities plus a homogeneous background, ``n = 500``."""
    _check_grid(p11, beta0)
    return GenConfig(
        n=500, K=2, beta=(float(beta0), SLOPE), pi=(0.5, 0.5),
        P_within=planted_matrix(2, p11), seed=seed,
    ).validate()


def scenario_table2(p11, beta0, seed=None, background_link="constant") -> GenConfig:
    """As :func:`scenario_table1` with heterogeneous background, ``u ~ U(0, 0.2)``."""
    _check_grid(p11, beta0)
    return GenConfig(
        n=500, K=2, beta=(float(beta0), SLOPE), pi=(0.5, 0.5),
        P_within=planted_matrix(2, p11), u_max=U_MAX, seed=seed,
        background_link=background_link,
    ).validate()


#: Within-community probability for the model-selection study, which the
#: original design leaves unstated; the midpoint of the p11 grid.
SELECTION_P11 = 0.20


def scenario_table3(k_true=2, p11=SELECTION_P11, seed=None,
                    background_link="constant") -> GenConfig:
    """Model-selection designs: heterogeneous background with ``K = 2``
    (``n = 500``, 50% background) or ``K = 5`` (``n = 1000``, ``beta0 = 1``)."""
    if k_true == 2:
        return scenario_table2(p11, 0.0, seed, background_link)
    if k_true == 5:
        _check_grid(p11, 1.0)
        return GenConfig(
            n=1000, K=5, beta=(1.0, SLOPE), pi=(0.2,) * 5,
            P_within=planted_matrix(5, p11), u_max=U_MAX, seed=seed,
            background_link=background_link,
        ).validate()
    raise ConfigError("k_true must be 2 or 5")
