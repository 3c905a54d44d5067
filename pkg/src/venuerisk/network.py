"""Affiliation network construction and the venue-to-venue projection."""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .types import AffiliationNetwork, EncounterLog, VenueGraph
from .validation import check_binary


def build_affiliation_network(
    log: EncounterLog, n: int, m: int, statuses
) -> AffiliationNetwork:
    """Tally the encounter log into an n x m weighted person-venue matrix.

    ``weights[i, j]`` is the number of events person i had at venue j;
    statuses are passed through unchanged.
    """
    statuses = check_binary(statuses, "statuses", length=n)
    if len(log) and (log.persons.max() >= n or log.venues.max() >= m):
        raise InputError("log contains person or venue ids out of range")
    if len(log) and (log.persons.min() < 0 or log.venues.min() < 0):
        raise InputError("log contains negative ids")
    weights = np.zeros((n, m), dtype=np.float64)
    np.add.at(weights, (log.persons, log.venues), 1.0)
    return AffiliationNetwork(weights, statuses)


def project_venue_graph(net: AffiliationNetwork) -> VenueGraph:
    """One-mode projection: venues are linked by the number of people attending both.

    A person attends a venue when their weight there is >= 1; an edge is
    present only when at least one participant is shared.
    """
    attend = net.weights >= 1.0
    shared = attend.T.astype(np.int64) @ attend.astype(np.int64)
    a_idx, b_idx = np.nonzero(np.triu(shared, k=1))
    edges = {
        (int(a), int(b)): int(shared[a, b]) for a, b in zip(a_idx, b_idx)
    }
    return VenueGraph(edges)


def total_encounters(net: AffiliationNetwork, person: int) -> float:
    """Row sum of the weight matrix for one person."""
    if not 0 <= person < net.n_people:
        raise InputError(f"person id {person} out of range")
    return float(net.weights[person].sum())
