"""Sample-based venue risk estimation.

Estimates the per-venue positive shares from reported encounter data and
turns them into per-person infection risk scores. Exponents are real
valued because survey scaling produces non-integer encounter counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from sklearn.base import BaseEstimator

from .errors import InputError, MissingShareError
from .types import SampleData, VenueShares, as_venue_shares
from .validation import check_binary, check_matrix, check_probability

# Visit counts for the nine survey frequency responses over a nine-month
# (273-day) recall window, in decreasing order of frequency.
FREQUENCY_RECODE_273D = {
    "every day": 270,
    "several times a week": 116,
    "once a week": 39,
    "once every two weeks": 19,
    "once a month": 9,
    "a couple of times a year": 4,
    "once a year": 1,
    "less than once a year": 0,
    "never": 0,
}
_RECODE_BASE_WINDOW = 273.0


@dataclass(frozen=True)
class RiskScores:
    """Estimated per-person risks with the venue shares they came from."""

    r_hat: np.ndarray
    q_hat: VenueShares


def estimate_q(sample: SampleData) -> VenueShares:
    """Per-venue share of reported encounters belonging to baseline-positive people.

    Venues with zero reported encounters are absent.
    """
    num = sample.z.T @ sample.baseline.astype(np.float64)
    den = sample.z.sum(axis=0)
    defined = den > 0
    values = np.full(sample.n_venues, np.nan)
    values[defined] = num[defined] / den[defined]
    return VenueShares(values, defined)


def estimate_risk(sample: SampleData, q_hat, pi: float) -> RiskScores:
    """Per-person estimated infection probability from reported encounters.

    Computes 1 - prod_j (1 - pi * Q_hat_j)^(Z_ij) with real-valued
    exponents via exp of summed logs. A person with zero total exposure
    scores 0 (empty product). Positive exposure at a venue whose share is
    absent is an error rather than a silent skip.
    """
    pi = check_probability(pi, "pi")
    shares = as_venue_shares(q_hat, sample.n_venues)
    exposed = sample.z > 0
    if np.any(exposed & ~shares.defined):
        raise MissingShareError("positive exposure at a venue with undefined share")
    pq = pi * np.where(shares.defined, shares.values, 0.0)
    certain = shares.defined & (pq >= 1.0)
    log_factors = np.zeros(sample.n_venues)
    ok = shares.defined & ~certain
    log_factors[ok] = np.log1p(-pq[ok])
    r = -np.expm1(sample.z @ log_factors)
    if certain.any():
        r[np.any(exposed[:, certain], axis=1)] = 1.0
    np.clip(r, 0.0, 1.0, out=r)
    return RiskScores(r, shares)


def scale_survey_counts(
    per_venue_counts: Mapping[int, float],
    reported_total_partners: int,
    partners_in_data: int,
    m: int,
) -> np.ndarray:
    """Scale a detailed-partner encounter tally up to the reported partner total.

    The per-venue tallies from the partners described in detail are
    multiplied by the number of partners the respondent reported overall
    and divided by the number present in the data, assuming the detailed
    partners are representative.
    """
    if partners_in_data < 1:
        raise InputError("partners_in_data must be >= 1")
    if reported_total_partners < partners_in_data:
        raise InputError("reported_total_partners must be >= partners_in_data")
    z = np.zeros(m, dtype=np.float64)
    for venue, count in per_venue_counts.items():
        v = int(venue)
        if not 0 <= v < m:
            raise InputError(f"venue id {venue} out of range for m={m}")
        c = float(count)
        if not np.isfinite(c) or c < 0:
            raise InputError(f"count for venue {venue} must be finite and >= 0")
        z[v] += c
    return z * (reported_total_partners / partners_in_data)


def recode_frequency(category: str, window: float = _RECODE_BASE_WINDOW) -> int:
    """Map a categorical visit-frequency response to a count of visits.

    The reference table is for a nine-month (273-day) window; other
    windows scale proportionally and round half to even.
    """
    if window <= 0:
        raise InputError("window must be positive")
    key = str(category).strip().casefold()
    if key not in FREQUENCY_RECODE_273D:
        raise InputError(f"unknown frequency category: {category!r}")
    base = FREQUENCY_RECODE_273D[key]
    if window == _RECODE_BASE_WINDOW:
        return base
    return round(base * window / _RECODE_BASE_WINDOW)


class VenueRiskEstimator(BaseEstimator):
    """Venue-share risk scorer with a scikit-learn estimator surface.

    fit(Z, y) learns the per-venue positive shares from reported
    encounters and baseline statuses; predict(Z) returns each person's
    estimated probability of acquiring infection over one window.

    Parameters
    ----------
    pi : float
        Per-encounter transmission probability, assumed known.
    """

    def __init__(self, pi: float = 0.011):
        self.pi = pi

    def fit(self, Z, y):
        check_probability(self.pi, "pi")
        z = check_matrix(Z, "Z")
        sample = SampleData(z, check_binary(y, "y", length=z.shape[0]))
        self.q_hat_ = estimate_q(sample)
        self.n_features_in_ = sample.n_venues
        return self

    def predict(self, Z) -> np.ndarray:
        """Estimated infection probability per row of Z."""
        if not hasattr(self, "q_hat_"):
            raise InputError("estimator is not fitted; call fit first")
        z = check_matrix(Z, "Z")
        if z.shape[1] != self.n_features_in_:
            raise InputError(
                f"Z has {z.shape[1]} venues, expected {self.n_features_in_}"
            )
        sample = SampleData(z, np.zeros(z.shape[0], dtype=np.int8))
        return estimate_risk(sample, self.q_hat_, self.pi).r_hat

    def fit_predict(self, Z, y) -> np.ndarray:
        return self.fit(Z, y).predict(Z)
