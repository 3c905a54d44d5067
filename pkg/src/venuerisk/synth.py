"""Synthetic participant data for demos and protocol checks.

The generator mimics the broad shape of venue-intercept survey data: a
heavy-tailed venue popularity profile, one to three venues per person,
right-skewed per-person encounter totals, and a baseline serostatus whose
odds rise with encounter volume.
"""

from __future__ import annotations

import numpy as np

from .encounters import pair_encounters, sample_encounter_counts, sample_encounter_times
from .errors import InputError
from .io import ParticipantData, ParticipantRecord
from .transmission import TransmissionConfig, simulate_transmission
from .types import SampleData
from .validation import as_generator


def make_synthetic_base(
    n: int = 466,
    m: int = 15,
    seed=0,
    prevalence: float = 0.382,
    status_slope: float = 0.9,
    popularity_decay: float = 0.33,
    mean_log_total: float = 2.77,
    sd_log_total: float = 0.8,
) -> SampleData:
    """Generate a single-cluster synthetic base dataset.

    Returns a SampleData whose rows can serve directly as simulation
    parameter vectors. Deterministic for a given seed.
    """
    if n < 1 or m < 1:
        raise InputError("n and m must be >= 1")
    gen = as_generator(seed)
    popularity = np.exp(-popularity_decay * np.arange(m))
    popularity /= popularity.sum()

    n_venues = gen.choice([1, 2, 3, 4], size=n, p=[0.30, 0.35, 0.25, 0.10])
    totals = np.maximum(
        1, np.round(gen.lognormal(mean_log_total, sd_log_total, size=n))
    ).astype(np.int64)

    z = np.zeros((n, m))
    for i in range(n):
        chosen = gen.choice(m, size=min(int(n_venues[i]), m), replace=False, p=popularity)
        probs = popularity[chosen] / popularity[chosen].sum()
        z[i, chosen] = gen.multinomial(totals[i], probs)

    # calibrate the intercept so the mean status probability hits the target
    x = np.log(z.sum(axis=1))
    x -= x.mean()
    lo, hi = -20.0, 20.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _mean_sigmoid(mid, status_slope, x) < prevalence:
            lo = mid
        else:
            hi = mid
    p = _sigmoid(0.5 * (lo + hi) + status_slope * x)
    statuses = (gen.random(n) < p).astype(np.int8)
    return SampleData(z, statuses)


def _sigmoid(v: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-v))


def _mean_sigmoid(intercept: float, slope: float, x: np.ndarray) -> float:
    return float(_sigmoid(intercept + slope * x).mean())


def make_synthetic_participants(
    n: int = 120,
    m: int = 8,
    seed=0,
    followup_days: float = 182.0,
    pi: float = 0.011,
    **base_kwargs,
) -> ParticipantData:
    """Synthetic participant rows with model-simulated follow-up statuses.

    The Wave-2 statuses come from one window of the transmission model
    itself, so the output exercises the full estimate pipeline.
    """
    base = make_synthetic_base(n, m, seed, **base_kwargs)
    gen = as_generator(np.random.SeedSequence((int(seed), 915)))
    counts = sample_encounter_counts(base.z, gen)
    log = sample_encounter_times(counts, followup_days, gen)
    outcome = simulate_transmission(
        pair_encounters(log), base.baseline, TransmissionConfig(pi, followup_days), gen
    )
    venue_names = tuple(f"v{j:02d}" for j in range(m))
    records = tuple(
        ParticipantRecord(
            person_id=f"p{i:04d}",
            venue_counts={
                venue_names[j]: float(base.z[i, j])
                for j in range(m)
                if base.z[i, j] > 0
            },
            status_w1=int(base.baseline[i]),
            status_w2=int(outcome.end_statuses[i]),
            days_between=float(followup_days),
        )
        for i in range(n)
    )
    return ParticipantData(
        sample=base,
        person_ids=tuple(r.person_id for r in records),
        venue_names=venue_names,
        records=records,
    )
