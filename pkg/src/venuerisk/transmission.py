"""Per-encounter transmission over a partnership list, and the exact model risk."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, MissingShareError
from .types import AffiliationNetwork, PartnershipList, VenueShares, as_venue_shares
from .validation import as_generator, check_binary, check_probability


@dataclass(frozen=True)
class TransmissionConfig:
    """Per-encounter transmission probability and window length in days."""

    pi: float
    window: float = 182.0

    def __post_init__(self):
        object.__setattr__(self, "pi", check_probability(self.pi, "pi"))
        if self.window <= 0:
            raise InputError("window must be positive")


@dataclass(frozen=True)
class InfectionOutcome:
    """End-of-window statuses plus the set of newly infected person ids."""

    end_statuses: np.ndarray
    new_infections: frozenset


def simulate_transmission(
    pairs: PartnershipList, baseline, cfg: TransmissionConfig, rng
) -> InfectionOutcome:
    """Run one window of transmission over the given partnerships.

    For every pair with exactly one baseline-positive member the negative
    member independently seroconverts with probability pi. Newly infected
    people do not transmit within the window, self-pairs and concordant
    pairs never transmit, and nobody recovers.

    One uniform draw is spent per serodiscordant pair, so outcomes at
    different pi values are coupled (monotone) under a shared stream.
    """
    baseline = check_binary(baseline, "baseline")
    n = baseline.shape[0]
    if len(pairs) and (pairs.person_a.max() >= n or pairs.person_b.max() >= n):
        raise InputError("pairs reference person ids out of range")
    gen = as_generator(rng)
    ya = baseline[pairs.person_a]
    yb = baseline[pairs.person_b]
    discordant = (ya != yb) & (pairs.person_a != pairs.person_b)
    u = gen.uniform(size=int(discordant.sum()))
    transmit = u < cfg.pi
    negatives = np.where(
        ya[discordant] == 1, pairs.person_b[discordant], pairs.person_a[discordant]
    )
    infected = np.unique(negatives[transmit])
    end = baseline.copy()
    end[infected] = 1
    return InfectionOutcome(end, frozenset(int(i) for i in infected))


def venue_positive_share(net: AffiliationNetwork) -> VenueShares:
    """Per-venue share of encounters belonging to baseline-positive people.

    Venues with zero recorded encounters carry an explicitly absent entry,
    never a silent zero.
    """
    num = net.weights.T @ net.statuses.astype(np.float64)
    den = net.weights.sum(axis=0)
    defined = den > 0
    values = np.full(net.n_venues, np.nan)
    values[defined] = num[defined] / den[defined]
    return VenueShares(values, defined)


def true_risk(row, q, pi: float) -> float:
    """Probability of infection for one person given venue counts and positive shares.

    Evaluates 1 - prod_j (1 - pi * Q_j)^(X_ij) as the exponential of summed
    logarithms so deep products cannot underflow. Venues with zero exposure
    contribute a factor of 1 even when their share is absent.
    """
    pi = check_probability(pi, "pi")
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise InputError("row must be a vector")
    if row.size and (not np.all(np.isfinite(row)) or row.min() < 0):
        raise InputError("row must be finite and >= 0")
    shares = as_venue_shares(q, row.shape[0])
    active = row > 0
    if np.any(active & ~shares.defined):
        raise MissingShareError("positive exposure at a venue with undefined share")
    pq = pi * shares.values[active]
    if np.any(pq >= 1.0):
        return 1.0
    return float(-np.expm1(np.sum(row[active] * np.log1p(-pq))))
