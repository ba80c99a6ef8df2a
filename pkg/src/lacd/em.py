"""Pseudo-likelihood EM for blockmodels with a covariate-driven background.

Three row models are available for the block-count matrix ``B``:

* ``poisson``     -- ``b_ik ~ Poisson(lambda_lk)`` over all ``K + 1`` blocks;
* ``multinomial`` -- ``b_i. | d_i ~ Multinomial(d_i, theta_l.)``;
* ``robust``      -- Poisson over the first ``K`` blocks only, so edges
  landing in the background block carry no model assumption.

In every variant the mixing weight of a community ``l <= K`` is
``sigmoid(x_i beta) * pi_l`` and that of the background is
``1 - sigmoid(x_i beta)``. :func:`fit` wraps the inner EM in an outer
loop that re-blocks the columns of the adjacency matrix with the current
hard labels until they stop changing.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import init, likelihood, logistic
from .errors import (
    ConfigError,
    DegenerateDegreeError,
    DimensionError,
    EmptyGroupError,
    FitError,
    NumericalError,
    SeparationError,
)
from .network import (
    Network,
    add_intercept,
    block_counts,
    check_covariates,
    check_labels,
    one_hot,
)

log = logging.getLogger(__name__)

RATE_FLOOR = 1e-10
MASS_EPS = 1e-8
ROW_TOL = 1e-10


class Variant(str, enum.Enum):
    POISSON = "poisson"
    MULTINOMIAL = "multinomial"
    ROBUST = "robust"


def _variant(v) -> Variant:
    try:
        return Variant(v)
    except ValueError:
        raise ValueError(f"unknown variant {v!r}") from None


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Fitted parameters.

    ``rates`` is the ``(K+1, K+1)`` Poisson rate matrix, the ``(K+1, K+1)``
    row-stochastic multinomial matrix, or the ``(K+1, K)`` robust rate
    matrix, depending on ``variant``.
    """

    variant: Variant
    beta: np.ndarray
    pi: np.ndarray
    rates: np.ndarray

    @property
    def K(self) -> int:
        return self.pi.shape[0]

    @property
    def mu(self) -> np.ndarray:
        return self.rates.sum(axis=1)

    def validate(self):
        K = self.K
        ncol = K if self.variant is Variant.ROBUST else K + 1
        if self.rates.shape != (K + 1, ncol):
            raise DimensionError(
                f"{self.variant.value} rates must be ({K + 1}, {ncol}), got {self.rates.shape}"
            )
        if abs(self.pi.sum() - 1.0) > 1e-9 or np.any(self.pi < 0):
            raise DimensionError("pi must be a probability vector")
        if np.any(self.rates < 0):
            raise DimensionError("rates must be nonnegative")
        if self.variant is Variant.MULTINOMIAL:
            if np.any(np.abs(self.rates.sum(axis=1) - 1.0) > 1e-9):
                raise DimensionError("multinomial rows must sum to 1")
        return self

    def to_dict(self):
        return {
            "variant": self.variant.value,
            "beta": self.beta.tolist(),
            "pi": self.pi.tolist(),
            "rates": self.rates.tolist(),
        }


@dataclass(eq=False)
class FitResult:
    Z: np.ndarray
    c_hat: np.ndarray
    e_final: np.ndarray
    params: ModelParams
    pll_trace: list
    outer_iterations: int
    restart_index: int
    stable: bool = True
    warnings: list = field(default_factory=list)
    restarts: list = field(default_factory=list)

    @property
    def K(self) -> int:
        return self.params.K

    @property
    def pll(self) -> float:
        return self.pll_trace[-1][-1]


def _log_kernel(variant, B, rates):
    K = rates.shape[0] - 1
    logr = np.log(np.maximum(rates, RATE_FLOOR))
    if variant is Variant.MULTINOMIAL:
        return B @ logr.T
    if variant is Variant.ROBUST:
        return B[:, :K] @ logr.T - rates.sum(axis=1)
    return B @ logr.T - rates.sum(axis=1)


def _log_weights(variant, B, design, params):
    eta = design @ params.beta
    K = params.K
    out = np.empty((B.shape[0], K + 1))
    with np.errstate(divide="ignore"):
        out[:, :K] = logistic.log_sigmoid(eta)[:, None] + np.log(params.pi)
    out[:, K] = logistic.log_sigmoid(-eta)
    out += _log_kernel(variant, B, params.rates)
    return out


def _posterior(variant, B, design, params):
    lw = _log_weights(variant, B, design, params)
    top = lw.max(axis=1, keepdims=True)
    bad = ~np.isfinite(top[:, 0])
    if np.any(bad):
        raise NumericalError(f"zero posterior mass at node {int(np.flatnonzero(bad)[0])}")
    Z = np.exp(lw - top)
    total = Z.sum(axis=1, keepdims=True)
    Z /= total
    return Z, float(np.sum(top[:, 0] + np.log(total[:, 0])))


def _check_B(B, K):
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[1] != K + 1:
        raise DimensionError(f"block counts must have K + 1 = {K + 1} columns")
    return B


def e_step(variant, B, X, params) -> np.ndarray:
    """Posterior label probabilities ``Z`` (``n x (K+1)``, rows sum to 1)."""
    variant = _variant(variant)
    B = _check_B(B, params.K)
    design = add_intercept(check_covariates(X, B.shape[0]))
    return _posterior(variant, B, design, params)[0]


def pseudo_log_likelihood(variant, B, X, params) -> float:
    """Marginal log pseudo-likelihood, up to an additive constant.

    The dropped constants are ``-sum log b_ik!`` (Poisson, robust) and the
    multinomial coefficients, so values are only comparable within a
    variant and a fixed ``B``.
    """
    variant = _variant(variant)
    B = _check_B(B, params.K)
    design = add_intercept(check_covariates(X, B.shape[0]))
    return _posterior(variant, B, design, params)[1]


def _best_on_segment(design, w, start, end):
    """Best point of the segment from ``start`` to ``end`` on a halving grid.

    Both ends lie inside the coefficient box, so the result does too, and
    it never scores below ``start``: a generalised M-step.
    """
    if start is None:
        return end
    best, f_best = start, logistic.objective(design, w, start)
    t = 1.0
    while t > 1e-6:
        cand = start + t * (end - start)
        f = logistic.objective(design, w, cand)
        if f > f_best:
            best, f_best = cand, f
            break
        t *= 0.5
    return best


def _m_step(variant, Z, B, design, beta_init=None):
    K = Z.shape[1] - 1
    mass = Z.sum(axis=0)
    for l in range(K + 1):
        if mass[l] < MASS_EPS:
            raise EmptyGroupError(l + 1)
    notes = []
    pi = mass[:K] / mass[:K].sum()
    if variant is Variant.MULTINOMIAL:
        num = Z.T @ B
        den = Z.T @ B.sum(axis=1)
        for l in range(K + 1):
            if den[l] <= 0:
                raise DegenerateDegreeError(l + 1)
        rates = num / den[:, None]
    else:
        Bc = B[:, :K] if variant is Variant.ROBUST else B
        rates = (Z.T @ Bc) / mass[:, None]
    w = np.clip(Z[:, :K].sum(axis=1), 0.0, 1.0)
    try:
        lf = logistic.newton(design, w, beta_init)
        beta = lf.beta
        if not lf.converged:
            notes.append("logistic M-step did not converge")
    except SeparationError as exc:
        beta = _best_on_segment(design, w, beta_init, exc.beta)
        notes.append("logistic separation: coefficients capped")
    return ModelParams(variant, beta, pi, rates), notes


def m_step(variant, Z, B, X, beta_init=None) -> ModelParams:
    """Closed-form updates of ``pi`` and the rate matrix, logistic fit for ``beta``.

    Separation in the logistic fit is tolerated: the capped estimate is used.
    """
    variant = _variant(variant)
    Z = np.asarray(Z, dtype=float)
    B = _check_B(B, Z.shape[1] - 1)
    design = add_intercept(check_covariates(X, B.shape[0]))
    return _m_step(variant, Z, B, design, beta_init)[0]


def _inner(variant, B, design, params, tol, max_iter):
    notes = []
    Z, ll = _posterior(variant, B, design, params)
    trace = [ll]
    for _ in range(max_iter):
        params, step_notes = _m_step(variant, Z, B, design, params.beta)
        notes.extend(step_notes)
        Z, ll_new = _posterior(variant, B, design, params)
        trace.append(ll_new)
        if ll_new - ll < tol * max(1.0, abs(ll)):
            break
        ll = ll_new
    return params, Z, trace, notes


def inner_em(variant, B, X, init_params, tol=1e-6, max_iter=200):
    """Run EM from ``init_params`` on fixed block counts ``B``.

    Stops once an iteration improves the pseudo-log-likelihood by less
    than ``tol * max(1, |pll|)``. Returns ``(params, Z, trace)``.
    """
    variant = _variant(variant)
    B = _check_B(B, init_params.K)
    design = add_intercept(check_covariates(X, B.shape[0]))
    params, Z, trace, _ = _inner(variant, B, design, init_params, tol, max_iter)
    return params, Z, trace


def hard_labels(Z) -> np.ndarray:
    """Row-wise argmax, 1-based; ties go to the smallest group index."""
    return np.argmax(Z, axis=1).astype(np.int64) + 1


@dataclass(frozen=True)
class FitOptions:
    """Restart budget and stopping rules for :func:`fit`.

    ``restarts`` counts every starting blocking vector. The pool is filled
    in this order: covariate-informed starts (two per covariate column),
    the ``K + 1`` background choices of the spectral partition, then
    perturbed copies of those, cycling. With ``extra_starts`` the
    degree-quantile split and uniform random labels are mixed in after
    the deterministic pool.
    """

    restarts: int = 8
    seed: int = 0
    inner_tol: float = 1e-6
    max_inner: int = 200
    max_outer: int = 20
    perturb_fraction: float = 0.1
    extra_starts: bool = False
    select_by: str = "auto"

    def __post_init__(self):
        if self.select_by not in SELECT_BY:
            raise ConfigError(f"select_by must be one of {SELECT_BY}")
        if self.restarts < 1 or self.max_outer < 1 or self.max_inner < 1:
            raise ConfigError("restarts, max_outer and max_inner must be positive")
        if not 0.0 <= self.perturb_fraction <= 1.0:
            raise ConfigError("perturb_fraction must lie in [0, 1]")


# "auto": degree-corrected background block for robust, plain joint otherwise
SELECT_BY = ("auto", "joint", "degree", "pll")


def restart_score(net, X, res, K, variant, select_by="auto") -> float:
    """Score used to rank restarts (higher is better)."""
    if select_by == "pll":
        return res.pll
    if select_by == "degree" or (select_by == "auto" and _variant(variant) is Variant.ROBUST):
        return likelihood.robust_joint_log_likelihood(net, X, res.c_hat, res.params.beta, K)
    return likelihood.joint_log_likelihood(net, X, res.c_hat, res.params.beta, K)


def initial_labels(net, K, options: FitOptions, init_X=None):
    """Starting blocking vectors for every restart, in order.

    ``init_X`` supplies the covariates used for covariate-informed starts
    (none when it has no columns). Random draws for restart ``r`` come
    from its own stream spawned off ``options.seed``.
    """
    streams = np.random.SeedSequence(options.seed).spawn(options.restarts + 1)
    kseed = int(streams[-1].generate_state(1)[0] % (2**31))
    pool = []
    if init_X is not None and np.size(init_X):
        pool.extend(init.covariate_labels(net, init_X, K, seed=kseed))
    pool.extend(init.background_rotations(net, init.spectral_labels(net, K + 1, kseed), K))
    base = len(pool)
    if options.extra_starts:
        pool.append(init.degree_quantile_labels(net.degree, K))
    starts = []
    for r in range(options.restarts):
        rng = np.random.Generator(np.random.PCG64(streams[r]))
        if r < len(pool):
            starts.append(pool[r])
        elif options.extra_starts and r % 2:
            starts.append(init.random_labels(rng, net.n, K))
        else:
            starts.append(init.perturb(rng, pool[r % base], K, options.perturb_fraction))
    return starts


def _run_from(net, design, K, variant, e0, options, restart):
    e = e0
    traces = []
    notes = []
    best = None
    for outer in range(1, options.max_outer + 1):
        B, _ = block_counts(net, e, K)
        init, step_notes = _m_step(
            variant, one_hot(e, K + 1), B, design,
            None if best is None else best.params.beta,
        )
        notes.extend(step_notes)
        params, Z, trace, step_notes = _inner(
            variant, B, design, init, options.inner_tol, options.max_inner
        )
        notes.extend(step_notes)
        traces.append(trace)
        e_new = hard_labels(Z)
        current = FitResult(
            Z, e_new, e, params, list(traces), outer, restart, False
        )
        if best is None or trace[-1] >= best.pll:
            best = current
        if np.array_equal(e_new, e):
            current.stable = True
            current.warnings = sorted(set(notes))
            return current
        e = e_new
    best.warnings = sorted(set(notes)) + [
        f"blocking vector not stable after {options.max_outer} outer iterations"
    ]
    return best


def fit(net: Network, X, K: int, variant="robust", options: FitOptions = None,
        init_X=None, starts=None, **kw) -> FitResult:
    """Fit a variant with restarts and return the best run.

    Each restart alternates (block counts from ``e``) -> inner EM ->
    ``e = argmax Z`` until ``e`` repeats or ``max_outer`` is reached.
    Restarts are ranked by :func:`restart_score`, since pseudo-likelihoods
    built on different blocking vectors are not comparable. Restarts
    hitting an empty group are abandoned and recorded in
    ``FitResult.restarts``.

    ``init_X`` overrides the covariates used for covariate-informed starts;
    ``starts`` replaces the generated pool with explicit 1-based label
    vectors (``options.restarts`` is then ignored).
    """
    variant = _variant(variant)
    if options is None:
        options = FitOptions(**kw)
    elif kw:
        raise TypeError("pass either options or keyword overrides")
    if K < 1:
        raise DimensionError("K must be at least 1")
    if net.n <= K + 1:
        raise DimensionError("need more than K + 1 nodes")
    X = check_covariates(X, net.n)
    design = add_intercept(X)
    best, best_score = None, -np.inf
    records = []
    causes = []
    init_X = X if init_X is None else check_covariates(init_X, net.n)
    if starts is None:
        starts = initial_labels(net, K, options, init_X)
    else:
        starts = [check_labels(np.asarray(e, dtype=np.int64), K, net.n) for e in starts]
        if not starts:
            raise ConfigError("starts must contain at least one label vector")
    for r, e0 in enumerate(starts):
        try:
            res = _run_from(net, design, K, variant, e0, options, r)
        except (EmptyGroupError, DegenerateDegreeError, NumericalError) as exc:
            records.append({"restart": r, "status": "failed", "error": str(exc)})
            causes.append(exc)
            log.debug("restart %d failed: %s", r, exc)
            continue
        score = restart_score(net, X, res, K, variant, options.select_by)
        records.append({"restart": r, "status": "ok", "pll": res.pll,
                        "score": score,
                        "outer_iterations": res.outer_iterations,
                        "stable": res.stable})
        if best is None or score > best_score:
            best, best_score = res, score
    if best is None:
        raise FitError(f"all {len(starts)} restarts failed", causes)
    best.restarts = records
    return best
