"""Venue-misreporting scenario transforms and the two-cluster augmentation.

Scenario transforms change only the reported data that all five risk
predictors consume; the underlying simulation truth is never touched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import InputError
from .types import SampleData
from .validation import as_generator, check_matrix, check_probability

SCENARIO_KINDS = ("perfect", "coarse", "smallest", "largest", "contaminated")


@dataclass(frozen=True)
class ScenarioSpec:
    """Which misreporting scenario to apply, with the protocol-default knobs."""

    kind: str = "perfect"
    group_size: int = 3
    drop_count: int = 3
    contamination_fraction: float = 0.5

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise InputError(
                f"unknown scenario {self.kind!r}; expected one of {SCENARIO_KINDS}"
            )
        if self.group_size < 1:
            raise InputError("group_size must be >= 1")
        if self.drop_count < 1:
            raise InputError("drop_count must be >= 1")
        check_probability(self.contamination_fraction, "contamination_fraction")


@dataclass(frozen=True)
class ScenarioData:
    """Transformed reported matrix plus column-group metadata for coarse reporting.

    ``venue_groups[k]`` lists the original column indices merged into
    output column k (coarse only; None otherwise).
    """

    z: np.ndarray
    venue_groups: Optional[Tuple[Tuple[int, ...], ...]] = None


def _patronage_order(z: np.ndarray) -> np.ndarray:
    """Column indices from most to least patronised; ties break on ascending index."""
    totals = z.sum(axis=0)
    return np.lexsort((np.arange(z.shape[1]), -totals))


def apply_scenario(z, spec: ScenarioSpec, rng=None) -> ScenarioData:
    """Apply one misreporting scenario to a reported encounter matrix."""
    z = check_matrix(z, "z")
    m = z.shape[1]
    if spec.kind == "perfect":
        return ScenarioData(z.copy())
    if spec.kind == "coarse":
        if spec.group_size > m:
            raise InputError(f"group_size {spec.group_size} exceeds venue count {m}")
        order = _patronage_order(z)
        groups = tuple(
            tuple(int(c) for c in order[k : k + spec.group_size])
            for k in range(0, m, spec.group_size)
        )
        grouped = np.column_stack([z[:, list(g)].sum(axis=1) for g in groups])
        return ScenarioData(grouped, groups)
    if spec.kind in ("smallest", "largest"):
        if spec.drop_count > m:
            raise InputError(f"drop_count {spec.drop_count} exceeds venue count {m}")
        order = _patronage_order(z)
        drop = order[-spec.drop_count :] if spec.kind == "smallest" else order[: spec.drop_count]
        out = z.copy()
        out[:, drop] = 0.0
        return ScenarioData(out)
    # contaminated: every encounter unit independently moves with probability
    # contamination_fraction to a uniformly chosen venue (possibly its origin),
    # so each person's total is conserved
    gen = as_generator(rng)
    whole = np.floor(z).astype(np.int64)
    moved = gen.binomial(whole, spec.contamination_fraction)
    out = (whole - moved).astype(np.float64)
    out += gen.multinomial(moved.sum(axis=1), np.full(m, 1.0 / m))
    frac = z - whole
    frac_cells = np.argwhere(frac > 0)
    if frac_cells.size:
        move_mask = gen.random(frac_cells.shape[0]) < spec.contamination_fraction
        dests = gen.integers(0, m, size=frac_cells.shape[0])
        for (i, j), moves, dest in zip(frac_cells, move_mask, dests):
            out[i, dest if moves else j] += frac[i, j]
    return ScenarioData(out)


@dataclass(frozen=True)
class TwoClusterSpec:
    """Parameters of the dataset-doubling augmentation."""

    renamed_count: int = 10
    conversion_prob: float = 0.75

    def __post_init__(self):
        if self.renamed_count < 0:
            raise InputError("renamed_count must be >= 0")
        check_probability(self.conversion_prob, "conversion_prob")


def build_two_cluster(
    base: SampleData, renamed_count: int, conversion_prob: float, rng
) -> SampleData:
    """Duplicate the rows and split the largest venues into a second cluster.

    The duplicate rows have their ``renamed_count`` most-patronised venue
    columns moved to fresh venue ids, so the two groups overlap only at the
    remaining small venues, and each duplicated baseline-positive flips to
    negative independently with ``conversion_prob``.
    """
    conversion_prob = check_probability(conversion_prob, "conversion_prob")
    n, m = base.z.shape
    if not 0 <= renamed_count < m:
        raise InputError(f"renamed_count must lie in [0, {m})")
    gen = as_generator(rng)
    big = _patronage_order(base.z)[:renamed_count]
    z = np.zeros((2 * n, m + renamed_count))
    z[:n, :m] = base.z
    dup = base.z.copy()
    dup[:, big] = 0.0
    z[n:, :m] = dup
    z[n:, m:] = base.z[:, big]
    flips = gen.random(n) < conversion_prob
    dup_status = np.where((base.baseline == 1) & flips, 0, base.baseline)
    return SampleData(z, np.concatenate([base.baseline, dup_status]))
