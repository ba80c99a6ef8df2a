"""Weighted binary logistic regression by damped Newton iterations.

Responses may be fractional (``w_i`` in [0, 1]); this is what the M-step
of the EM fitters needs, since the expected relevance indicator of a node
is the posterior mass it places on the non-background groups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import expit
from scipy.stats import norm

from .errors import DimensionError, NumericalError, SeparationError
from .network import add_intercept

GRAD_TOL = 1e-8
MAX_ITER = 100
BETA_CAP = 30.0
RIDGE = 1e-10
# gradient level accepted when Newton stalls at machine precision
STALL_TOL = 1e-6
#: coefficient size above which a converged fit is checked for divergence
DIVERGENCE_CHECK = 10.0


@dataclass(frozen=True)
class LogisticFit:
    beta: np.ndarray
    converged: bool
    iterations: int
    final_gradient_norm: float


def sigmoid(eta):
    return expit(eta)


def log_sigmoid(eta):
    """``log(1 / (1 + exp(-eta)))`` without overflow."""
    return -np.logaddexp(0.0, -np.asarray(eta, dtype=float))


def objective(design, w, beta) -> float:
    eta = design @ beta
    return float(np.sum(w * eta - np.logaddexp(0.0, eta)))


def gradient(design, w, beta) -> np.ndarray:
    return design.T @ (w - expit(design @ beta))


def predict_prob(X, beta) -> np.ndarray:
    """Probability of belonging to a non-background group, ``sigmoid(x_i beta)``.

    ``X`` excludes the intercept column; ``beta`` includes the intercept first.
    """
    beta = np.asarray(beta, dtype=float)
    if not np.all(np.isfinite(beta)):
        raise NumericalError("non-finite coefficients")
    design = add_intercept(X)
    if design.shape[1] != beta.shape[0]:
        raise DimensionError(
            f"beta has {beta.shape[0]} entries, design has {design.shape[1]} columns"
        )
    return expit(design @ beta)


def _solve(H, g):
    try:
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(H), g)
    except (np.linalg.LinAlgError, ValueError):
        pass
    ridge = RIDGE * max(np.trace(H), 1.0)
    try:
        return scipy.linalg.cho_solve(
            scipy.linalg.cho_factor(H + ridge * np.eye(H.shape[0])), g
        )
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError("singular Hessian in logistic fit") from exc


def _check_divergence(design, w, beta, f, cap, iterations):
    """Raise if the optimum is only numerically finite: coefficients are
    large and scaling them out to the cap does not lower the objective."""
    top = np.max(np.abs(beta), initial=0.0)
    if top < DIVERGENCE_CHECK:
        return
    capped = beta * (cap / top)
    slack = 8 * np.finfo(float).eps * (abs(f) + 1.0)
    if objective(design, w, capped) >= f - max(slack, 1e-9):
        raise SeparationError(
            "likelihood keeps increasing towards the coefficient cap: data appear separable",
            beta=capped,
            iterations=iterations,
        )


def newton(design, w, beta0=None, tol=GRAD_TOL, max_iter=MAX_ITER, cap=BETA_CAP):
    """Maximise ``sum_i w_i x_i beta - log(1 + exp(x_i beta))`` over ``beta``.

    ``design`` already contains the intercept column. Raises
    :class:`SeparationError` if ``max|beta|`` exceeds ``cap`` before the
    gradient tolerance is met; the error carries ``beta`` rescaled onto
    the cap.
    """
    n, p = design.shape
    beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=float)
    if np.max(np.abs(beta), initial=0.0) > cap:
        beta = beta * (cap / np.max(np.abs(beta)))
    f = objective(design, w, beta)
    for it in range(1, max_iter + 1):
        eta = design @ beta
        prob = expit(eta)
        g = design.T @ (w - prob)
        gnorm = float(np.max(np.abs(g)))
        if gnorm < tol:
            _check_divergence(design, w, beta, f, cap, it - 1)
            return LogisticFit(beta, True, it - 1, gnorm)
        H = (design * (prob * (1.0 - prob))[:, None]).T @ design
        step = _solve(H, g)
        # objective changes below this are rounding noise
        slack = 8 * np.finfo(float).eps * (abs(f) + 1.0)
        t = 1.0
        while True:
            cand = beta + t * step
            f_new = objective(design, w, cand)
            if f_new >= f - slack or t < 1e-10:
                break
            t *= 0.5
        if f_new < f - slack:
            return LogisticFit(beta, gnorm < STALL_TOL, it, gnorm)
        beta, f = cand, f_new
        if np.max(np.abs(beta)) > cap:
            capped = beta * (cap / np.max(np.abs(beta)))
            raise SeparationError(
                f"coefficients exceed cap {cap}: data appear separable",
                beta=capped,
                iterations=it,
            )
    gnorm = float(np.max(np.abs(gradient(design, w, beta))))
    return LogisticFit(beta, gnorm < tol, max_iter, gnorm)


def fit_weighted(X, w, beta0=None, tol=GRAD_TOL, max_iter=MAX_ITER) -> LogisticFit:
    """Weighted logistic MLE with an intercept prepended to ``X``.

    Parameters
    ----------
    X : array-like of shape (n, P)
        Covariates without intercept (``P`` may be 0).
    w : array-like of shape (n,)
        Fractional responses in [0, 1].
    """
    design = add_intercept(X)
    w = np.asarray(w, dtype=float)
    if w.shape != (design.shape[0],):
        raise DimensionError("response length does not match covariate rows")
    if np.any((w < 0) | (w > 1)) or not np.all(np.isfinite(w)):
        raise DimensionError("responses must lie in [0, 1]")
    if design.shape[0] < design.shape[1]:
        raise DimensionError("need at least P + 1 observations")
    return newton(design, w, beta0, tol, max_iter)


def wald_table(X, beta):
    """Wald z statistics from the observed information at ``beta``.

    Returns ``(se, z, p)`` arrays aligned with ``beta``; two-sided normal
    p-values.
    """
    design = add_intercept(X)
    prob = expit(design @ beta)
    H = (design * (prob * (1.0 - prob))[:, None]).T @ design
    try:
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(H)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, beta / se, np.nan)
    p = 2.0 * norm.sf(np.abs(z))
    return se, z, p
