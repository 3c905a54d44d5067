"""Logistic-regression baselines, tie-aware AUC, person-time incidence,
and the across-replication paired comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats
from scipy.special import expit
from sklearn.base import BaseEstimator

from .errors import InputError, UndefinedAUCError
from .validation import check_binary, check_matrix

COEF_CLIP = 30.0  # logit-scale magnitude cap; keeps rankings defined under separation
MAX_ITER = 100
COEF_TOL = 1e-8
DAYS_PER_YEAR = 365.25


@dataclass(frozen=True)
class LogisticFit:
    """Maximum-likelihood logistic coefficients (intercept first).

    ``converged`` is False for separation (any coefficient at the clip) or
    iteration exhaustion; ``degenerate`` marks a constant-outcome fit.
    ``loglik_trace`` records the accepted log-likelihood after each step.
    """

    coefficients: np.ndarray
    converged: bool
    iterations: int
    loglik: float
    loglik_trace: np.ndarray
    degenerate: bool = False


def _log_likelihood(Xd: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    eta = Xd @ beta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def fit_logistic(features, outcome) -> LogisticFit:
    """Fit a logistic regression by Newton steps with step-halving.

    Converges when the largest coefficient change drops below 1e-8, up to
    100 iterations. Coefficients are clipped at magnitude 30 on the logit
    scale; a fit that ends at the clip is flagged non-converged (the
    rankings downstream consumers need remain well-defined). A constant
    outcome yields a flagged degenerate intercept-only fit instead of an
    error.
    """
    X = check_matrix(features, "features", nonneg=False)
    y = check_binary(outcome, "outcome", length=X.shape[0]).astype(np.float64)
    n, p = X.shape
    Xd = np.hstack([np.ones((n, 1)), X])

    if n == 0:
        raise InputError("cannot fit logistic regression on zero rows")
    prevalence = float(y.mean())
    if prevalence in (0.0, 1.0):
        intercept = -COEF_CLIP if prevalence == 0.0 else COEF_CLIP
        beta = np.zeros(p + 1)
        beta[0] = intercept
        ll = _log_likelihood(Xd, y, beta)
        return LogisticFit(beta, False, 0, ll, np.array([ll]), degenerate=True)

    beta = np.zeros(p + 1)
    ll = _log_likelihood(Xd, y, beta)
    trace = [ll]
    converged = False
    iterations = 0
    for iterations in range(1, MAX_ITER + 1):
        eta = Xd @ beta
        mu = expit(eta)
        grad = Xd.T @ (y - mu)
        w = mu * (1.0 - mu)
        hess = Xd.T @ (w[:, None] * Xd)
        try:
            delta = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(hess, grad, rcond=None)[0]

        # step-halving: only accept steps that do not decrease the log-likelihood
        step = 1.0
        candidate = np.clip(beta + delta, -COEF_CLIP, COEF_CLIP)
        ll_new = _log_likelihood(Xd, y, candidate)
        halvings = 0
        while ll_new < ll - 1e-12 and halvings < 40:
            step *= 0.5
            candidate = np.clip(beta + step * delta, -COEF_CLIP, COEF_CLIP)
            ll_new = _log_likelihood(Xd, y, candidate)
            halvings += 1
        if ll_new < ll - 1e-12:
            break
        change = float(np.max(np.abs(candidate - beta)))
        beta = candidate
        ll = ll_new
        trace.append(ll)
        if change < COEF_TOL:
            converged = True
            break

    if np.any(np.abs(beta) >= COEF_CLIP - 1e-9):
        converged = False
    return LogisticFit(beta, converged, iterations, ll, np.asarray(trace))


def predict_logistic(fit: LogisticFit, features) -> np.ndarray:
    """Linear predictors (logits) for the fitted model.

    AUC is invariant to the logistic link, so logits are returned as-is.
    """
    X = check_matrix(features, "features", nonneg=False)
    if X.shape[1] + 1 != fit.coefficients.shape[0]:
        raise InputError(
            f"features have {X.shape[1]} columns, fit expects "
            f"{fit.coefficients.shape[0] - 1}"
        )
    return fit.coefficients[0] + X @ fit.coefficients[1:]


class NewtonLogistic(BaseEstimator):
    """Plain maximum-likelihood logistic regression, scikit-learn style.

    Parameters
    ----------
    total_only : bool
        When True the feature columns are summed into a single regressor
        before fitting (the "simple" baseline).
    """

    def __init__(self, total_only: bool = False):
        self.total_only = total_only

    def _design(self, X) -> np.ndarray:
        X = check_matrix(X, "X", nonneg=False)
        if self.total_only:
            X = X.sum(axis=1, keepdims=True)
        return X

    def fit(self, X, y):
        X = self._design(X)
        self.fit_ = fit_logistic(X, y)
        self.intercept_ = float(self.fit_.coefficients[0])
        self.coef_ = self.fit_.coefficients[1:].copy()
        self.n_iter_ = self.fit_.iterations
        self.converged_ = self.fit_.converged
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "fit_"):
            raise InputError("estimator is not fitted; call fit first")
        return predict_logistic(self.fit_, self._design(X))

    def predict_proba(self, X) -> np.ndarray:
        logits = self.decision_function(X)
        p = expit(logits)
        return np.column_stack([1.0 - p, p])


def auc(scores, outcomes) -> float:
    """Mann-Whitney AUC with 0.5 credit for tied score pairs."""
    s = np.asarray(scores, dtype=np.float64)
    y = check_binary(outcomes, "outcomes")
    if s.ndim != 1 or s.shape != y.shape:
        raise InputError("scores and outcomes must be equal-length vectors")
    if not np.all(np.isfinite(s)):
        raise InputError("scores must be finite")
    n_pos = int(y.sum())
    n_neg = y.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError("outcomes contain a single class")
    ranks = stats.rankdata(s)
    pos_rank_sum = float(ranks[y == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass(frozen=True)
class FollowUpRecord:
    """One person's baseline and follow-up statuses and the days between interviews."""

    person_id: int | str
    status_w1: int
    status_w2: Optional[int]
    days_between: Optional[float] = None

    def __post_init__(self):
        if self.status_w1 not in (0, 1):
            raise InputError("status_w1 must be 0 or 1")
        if self.status_w2 is not None:
            if self.status_w2 not in (0, 1):
                raise InputError("status_w2 must be 0, 1 or None")
            if self.days_between is None or self.days_between <= 0:
                raise InputError("days_between must be > 0 when status_w2 is present")


def incidence_rate(records: Sequence[FollowUpRecord]) -> float:
    """New infections per 100 person-years at risk.

    Only baseline-negative people with follow-up status contribute. Those
    still negative contribute their full between-interview days; those
    seroconverting contribute half.
    """
    at_risk = [r for r in records if r.status_w1 == 0 and r.status_w2 is not None]
    conversions = sum(r.status_w2 for r in at_risk)
    person_days = sum(
        r.days_between / 2.0 if r.status_w2 else r.days_between for r in at_risk
    )
    if person_days <= 0:
        raise InputError("no person-days at risk")
    return conversions / person_days * DAYS_PER_YEAR * 100.0


@dataclass(frozen=True)
class PairedComparison:
    """Result of a paired across-replication comparison."""

    p_value: float
    mean_diff: float
    statistic: float
    degenerate: bool = False


def paired_comparison(auc_a, auc_b, method: str = "t") -> PairedComparison:
    """Two-sided paired test on per-replication AUC differences.

    ``method`` is "t" (paired t-test, default) or "wilcoxon" (signed-rank).
    Zero-variance differences short-circuit: p = 1 when the mean difference
    is zero, else p = 0, flagged degenerate.
    """
    if method not in ("t", "wilcoxon"):
        raise InputError(f"unknown comparison method: {method!r}")
    a = np.asarray(auc_a, dtype=np.float64)
    b = np.asarray(auc_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InputError("paired comparison requires equal-length vectors")
    if a.shape[0] < 2:
        raise InputError("paired comparison requires at least 2 replications")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InputError("AUC vectors must be finite")
    d = a - b
    mean_diff = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        p = 1.0 if mean_diff == 0.0 else 0.0
        return PairedComparison(p, mean_diff, math.inf if p == 0.0 else 0.0, True)
    if method == "t":
        k = d.shape[0]
        t_stat = mean_diff / (sd / math.sqrt(k))
        p = 2.0 * float(stats.t.sf(abs(t_stat), df=k - 1))
        return PairedComparison(p, mean_diff, t_stat)
    res = stats.wilcoxon(a, b)
    return PairedComparison(float(res.pvalue), mean_diff, float(res.statistic))
