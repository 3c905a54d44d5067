"""Seeded generation of encounter counts and times, and the pairing rule.

Counts are Poisson with per-(person, venue) means; times are uniform on
the window; partnerships link the 1st and 2nd, 3rd and 4th, ... events of
each venue's time-sorted log, discarding an odd venue's final event.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError, UndefinedRatioError
from .types import EncounterLog, ParameterVector, PartnershipList
from .validation import as_generator, check_count_matrix, check_seed


class RngStream:
    """Deterministic random stream keyed by (seed, stream_id).

    Two streams built from the same key produce identical draws for
    identical call sequences, independent of thread scheduling; parallel
    replications each own a distinct stream_id.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = check_seed(seed)
        self.stream_id = int(stream_id)
        if self.stream_id < 0:
            raise InputError("stream_id must be non-negative")
        self._generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((self.seed, self.stream_id)))
        )

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def _means_matrix(params) -> np.ndarray:
    """Stack parameter vectors (or accept a ready matrix) into an (n, m) means array."""
    if isinstance(params, np.ndarray):
        means = np.asarray(params, dtype=np.float64)
        if means.ndim != 2:
            raise InputError("means matrix must be 2-dimensional")
    else:
        rows = [
            pv.expected_counts if isinstance(pv, ParameterVector) else np.asarray(pv)
            for pv in params
        ]
        if not rows:
            return np.zeros((0, 0))
        lengths = {row.shape[0] for row in rows}
        if len(lengths) != 1:
            raise InputError("parameter vectors must share one venue count")
        means = np.vstack(rows).astype(np.float64)
    if means.size and (not np.all(np.isfinite(means)) or means.min() < 0):
        raise InputError("encounter means must be finite and >= 0")
    return means


def sample_encounter_counts(params, rng) -> np.ndarray:
    """Draw the (n, m) matrix of independent Poisson encounter counts.

    ``params`` may be a sequence of ParameterVector or a non-negative
    means matrix. numpy's Poisson sampler (inversion for small means,
    transformed rejection for large) provides the draws; only the
    distribution is contractual.
    """
    means = _means_matrix(params)
    gen = as_generator(rng)
    return gen.poisson(means).astype(np.int64)


def sample_encounter_times(counts, t_window: float, rng) -> EncounterLog:
    """Attach i.i.d. Uniform(0, t_window) times to each counted encounter."""
    counts = check_count_matrix(counts, "counts")
    if t_window <= 0:
        raise InputError("t_window must be positive")
    gen = as_generator(rng)
    n, m = counts.shape
    flat = counts.ravel()
    nz = np.flatnonzero(flat)
    reps = flat[nz]
    persons = np.repeat(nz // m, reps) if m else np.empty(0, dtype=np.int64)
    venues = np.repeat(nz % m, reps) if m else np.empty(0, dtype=np.int64)
    times = gen.uniform(0.0, t_window, size=persons.shape[0])
    order = np.lexsort((persons, times, venues))
    return EncounterLog(persons[order], venues[order], times[order], float(t_window))


def pair_encounters(log: EncounterLog) -> PartnershipList:
    """Pair each venue's consecutive events; an odd venue discards its last event.

    Self-pairs (one person holding two consecutive events) are produced
    faithfully; transmission treats them as no-ops.
    """
    k = len(log)
    if k == 0:
        empty_i = np.empty(0, dtype=np.int64)
        empty_f = np.empty(0, dtype=np.float64)
        return PartnershipList(empty_i, empty_i, empty_i, empty_f, empty_f, 0)
    changes = np.flatnonzero(np.diff(log.venues)) + 1
    starts = np.concatenate(([0], changes))
    ends = np.concatenate((changes, [k]))
    lengths = ends - starts
    block = np.repeat(np.arange(starts.shape[0]), lengths)
    within = np.arange(k) - starts[block]
    first = (within % 2 == 0) & (within + 1 < lengths[block])
    a = np.flatnonzero(first)
    b = a + 1
    discarded = int(np.sum(lengths % 2))
    return PartnershipList(
        log.venues[a],
        log.persons[a],
        log.persons[b],
        log.times[a],
        log.times[b],
        discarded,
    )


def self_pair_probability(params, person: int, venue: int) -> float:
    """Share of a venue's expected traffic belonging to one person.

    This is the probability that the person's encounter is immediately
    followed by another of his own; it vanishes as the venue's total
    traffic grows.
    """
    means = _means_matrix(params)
    n, m = means.shape
    if not 0 <= person < n:
        raise InputError(f"person id {person} out of range")
    if not 0 <= venue < m:
        raise InputError(f"venue id {venue} out of range")
    col_total = means[:, venue].sum()
    if col_total <= 0:
        raise UndefinedRatioError(f"venue {venue} has zero expected traffic")
    return float(means[person, venue] / col_total)
