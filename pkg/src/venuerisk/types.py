"""Shared domain types.

All containers are immutable after construction and validate their
invariants up front, so they can be shared freely across parallel
replications.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .validation import check_binary, check_matrix


@dataclass(frozen=True)
class ParameterVector:
    """Per-person expected encounter counts (one entry per venue) plus baseline serostatus.

    ``expected_counts[j]`` is the expected number of encounters at venue j
    over one simulation window, with the per-day rate and venue preference
    already multiplied through.
    """

    person_id: int
    expected_counts: np.ndarray
    baseline_status: int

    def __post_init__(self):
        counts = np.asarray(self.expected_counts, dtype=np.float64)
        object.__setattr__(self, "expected_counts", counts)
        if counts.ndim != 1:
            raise InputError("expected_counts must be a vector")
        total = counts.sum()
        # sum is finite iff all non-negative entries are finite
        if counts.size and (not np.isfinite(total) or counts.min() < 0):
            raise InputError("expected_counts must be finite and >= 0")
        if self.baseline_status not in (0, 1):
            raise InputError("baseline_status must be 0 or 1")


@dataclass(frozen=True)
class EncounterLog:
    """Time-stamped encounter events, sorted by (venue, time, person).

    Times live in [0, t_window] days. The total sort key makes behaviour
    deterministic even for tied times coming from file input.
    """

    persons: np.ndarray
    venues: np.ndarray
    times: np.ndarray
    t_window: float

    def __post_init__(self):
        persons = np.asarray(self.persons, dtype=np.int64)
        venues = np.asarray(self.venues, dtype=np.int64)
        times = np.asarray(self.times, dtype=np.float64)
        object.__setattr__(self, "persons", persons)
        object.__setattr__(self, "venues", venues)
        object.__setattr__(self, "times", times)
        if not (persons.shape == venues.shape == times.shape) or persons.ndim != 1:
            raise InputError("persons, venues and times must be equal-length vectors")
        if self.t_window <= 0:
            raise InputError("t_window must be positive")
        if times.size:
            if times.min() < 0 or times.max() > self.t_window:
                raise InputError("event times must lie in [0, t_window]")
            _check_sorted(venues, times, persons)

    @classmethod
    def from_events(cls, events, t_window: float) -> "EncounterLog":
        """Build a log from (person, venue, time) tuples, sorting as needed."""
        if len(events) == 0:
            empty = np.empty(0, dtype=np.int64)
            return cls(empty, empty, np.empty(0, dtype=np.float64), t_window)
        persons, venues, times = (np.asarray(col) for col in zip(*events))
        order = np.lexsort((persons, times, venues))
        return cls(persons[order], venues[order], times[order], t_window)

    def __len__(self) -> int:
        return self.persons.shape[0]


def _check_sorted(venues: np.ndarray, times: np.ndarray, persons: np.ndarray) -> None:
    dv = np.diff(venues)
    if np.any(dv < 0):
        raise InputError("log not sorted by venue")
    same_venue = dv == 0
    dt = np.diff(times)
    if np.any(same_venue & (dt < 0)):
        raise InputError("log not sorted by time within venue")
    tied = same_venue & (dt == 0)
    if np.any(tied & (np.diff(persons) < 0)):
        raise InputError("log not sorted by person within tied times")


@dataclass(frozen=True)
class PartnershipList:
    """Venue-wise consecutive pairings of encounters.

    Each pair joins two consecutive events of a venue's time-sorted log;
    ``discarded`` counts the orphaned final events (at most one per venue).
    """

    venues: np.ndarray
    person_a: np.ndarray
    person_b: np.ndarray
    time_a: np.ndarray
    time_b: np.ndarray
    discarded: int

    def __len__(self) -> int:
        return self.venues.shape[0]


@dataclass(frozen=True)
class AffiliationNetwork:
    """Weighted person-venue matrix plus baseline statuses.

    Weights are encounter counts; real values are permitted for
    survey-scaled sample data.
    """

    weights: np.ndarray
    statuses: np.ndarray

    def __post_init__(self):
        w = check_matrix(self.weights, "weights")
        object.__setattr__(self, "weights", w)
        object.__setattr__(
            self, "statuses", check_binary(self.statuses, "statuses", length=w.shape[0])
        )

    @property
    def n_people(self) -> int:
        return self.weights.shape[0]

    @property
    def n_venues(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class VenueGraph:
    """One-mode venue projection: unordered venue pairs -> shared-participant count."""

    edges: dict

    def weight(self, a: int, b: int) -> int:
        return self.edges.get((min(a, b), max(a, b)), 0)

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class SampleData:
    """Reported encounter matrix Z (real-valued after survey scaling) with baseline statuses."""

    z: np.ndarray
    baseline: np.ndarray

    def __post_init__(self):
        z = check_matrix(self.z, "z")
        object.__setattr__(self, "z", z)
        object.__setattr__(
            self, "baseline", check_binary(self.baseline, "baseline", length=z.shape[0])
        )

    @property
    def n_people(self) -> int:
        return self.z.shape[0]

    @property
    def n_venues(self) -> int:
        return self.z.shape[1]


@dataclass(frozen=True)
class VenueShares:
    """Per-venue probability vector with explicitly absent entries.

    A venue with zero recorded encounters has no defined share; callers must
    consult ``defined`` rather than read a silent 0. Undefined slots hold
    NaN purely so that accidental arithmetic poisons loudly.
    """

    values: np.ndarray
    defined: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise InputError("venue shares must be a vector")
        if self.defined is None:
            defined = np.isfinite(values)
        else:
            defined = np.asarray(self.defined, dtype=bool)
            if defined.shape != values.shape:
                raise InputError("defined mask must match values shape")
        values = values.copy()
        values[~defined] = np.nan
        ok = values[defined]
        if ok.size and (not np.all(np.isfinite(ok)) or ok.min() < 0 or ok.max() > 1):
            raise InputError("defined venue shares must lie in [0, 1]")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "defined", defined)

    def __len__(self) -> int:
        return self.values.shape[0]


def as_venue_shares(q, m: int | None = None) -> VenueShares:
    """Accept a VenueShares or a plain vector (NaN marking absent entries)."""
    shares = q if isinstance(q, VenueShares) else VenueShares(np.asarray(q, dtype=np.float64))
    if m is not None and len(shares) != m:
        raise InputError(f"venue shares must have length {m}, got {len(shares)}")
    return shares
