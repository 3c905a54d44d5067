"""Replication protocol: population bootstrap, two simulation windows,
the five risk predictors, and study-level aggregation.

Each replication owns RNG streams derived deterministically from
(master_seed, rep_index), split per phase so that runs with the same seed
stay matched across scenarios and transmission probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from .baselines import (
    DAYS_PER_YEAR,
    auc,
    fit_logistic,
    paired_comparison,
    predict_logistic,
)
from .encounters import _means_matrix, sample_encounter_counts, sample_encounter_times, pair_encounters
from .errors import DegenerateStudyError, InputError
from .estimator import estimate_q, estimate_risk
from .scenarios import ScenarioSpec, TwoClusterSpec, apply_scenario, build_two_cluster
from .transmission import TransmissionConfig, simulate_transmission
from .types import ParameterVector, SampleData
from .validation import as_generator, check_probability, check_seed

PREDICTOR_NAMES = ("mlr_w1", "mlr_w2", "slr_w1", "slr_w2", "venue_risk")
N_PREDICTORS = len(PREDICTOR_NAMES)

# stream id reserved for the one-off two-cluster augmentation; far above any
# realistic replication index so rep streams can never collide with it
AUGMENT_STREAM_ID = 2**62


@dataclass(frozen=True)
class StudyConfig:
    """Replication-study settings; the defaults reproduce the main protocol.

    The base rows are read as expected encounter counts over
    ``base_window_days`` (defaulting to ``window_days``); both simulation
    windows scale their Poisson means accordingly. ``followup_days`` is the
    second (transmission) window and defaults to ``window_days``.
    """

    n_sample: int
    population_multiplier: int = 5
    pi_values: Tuple[float, ...] = (0.0062, 0.0110, 0.0143)
    replications: int = 1000
    window_days: float = 182.0
    followup_days: Optional[float] = None
    base_window_days: Optional[float] = None
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    two_cluster: Optional[TwoClusterSpec] = None
    master_seed: int = 0
    n_jobs: int = 1
    significance_method: str = "t"
    transmit_first_window: bool = False

    def __post_init__(self):
        if self.n_sample < 1:
            raise InputError("n_sample must be >= 1")
        if self.population_multiplier < 1:
            raise InputError("population_multiplier must be >= 1")
        if not self.pi_values:
            raise InputError("pi_values must be non-empty")
        object.__setattr__(
            self, "pi_values", tuple(check_probability(p, "pi") for p in self.pi_values)
        )
        if self.replications < 1:
            raise InputError("replications must be >= 1")
        if self.window_days <= 0:
            raise InputError("window_days must be positive")
        if self.followup_days is not None and self.followup_days <= 0:
            raise InputError("followup_days must be positive")
        if self.base_window_days is not None and self.base_window_days <= 0:
            raise InputError("base_window_days must be positive")
        check_seed(self.master_seed, "master_seed")
        if self.n_jobs == 0:
            raise InputError("n_jobs must be a positive count or -1")
        if self.significance_method not in ("t", "wilcoxon"):
            raise InputError("significance_method must be 't' or 'wilcoxon'")

    @property
    def followup(self) -> float:
        return self.followup_days if self.followup_days is not None else self.window_days

    @property
    def base_window(self) -> float:
        return (
            self.base_window_days if self.base_window_days is not None else self.window_days
        )

    def population_size(self, base_rows: int) -> int:
        return self.population_multiplier * base_rows


@dataclass(frozen=True)
class ReplicationResult:
    """One replication's per-predictor AUCs and infection bookkeeping.

    ``auc`` holds predictors 1..5 at indices 0..4 (NaN throughout when the
    replication is flagged for a single-class evaluation set).
    """

    auc: np.ndarray
    new_infections: int
    person_days_at_risk: float
    seed: int
    pi: float
    rep_index: int
    flagged: bool
    encounter_quartiles: Tuple[float, float, float]

    @property
    def incidence(self) -> float:
        """New infections per 100 person-years, NaN when no person-time accrued."""
        if self.person_days_at_risk <= 0:
            return float("nan")
        return self.new_infections / self.person_days_at_risk * DAYS_PER_YEAR * 100.0


@dataclass(frozen=True)
class PredictorSummary:
    predictor: int
    name: str
    mean_auc: float
    sd_auc: float
    q1: float
    median: float
    q3: float
    p_vs_new: Optional[float]
    significant: Optional[bool]


@dataclass(frozen=True)
class PiSummary:
    pi: float
    n_replications: int
    n_flagged: int
    predictors: Tuple[PredictorSummary, ...]
    mean_incidence: float
    encounter_quartile_means: Tuple[float, float, float]


@dataclass(frozen=True)
class StudySummary:
    """Aggregated study output, one block per transmission probability."""

    scenario: str
    two_cluster: bool
    n_sample: int
    population_size: int
    replications: int
    window_days: float
    followup_days: float
    master_seed: int
    per_pi: Tuple[PiSummary, ...]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "two_cluster": self.two_cluster,
            "n_sample": self.n_sample,
            "population_size": self.population_size,
            "replications": self.replications,
            "window_days": self.window_days,
            "followup_days": self.followup_days,
            "master_seed": self.master_seed,
            "per_pi": [
                {
                    "pi": s.pi,
                    "n_replications": s.n_replications,
                    "n_flagged": s.n_flagged,
                    "mean_incidence_per_100py": s.mean_incidence,
                    "encounter_quartile_means": list(s.encounter_quartile_means),
                    "predictors": [
                        {
                            "predictor": p.predictor,
                            "name": p.name,
                            "mean_auc": p.mean_auc,
                            "sd_auc": p.sd_auc,
                            "q1": p.q1,
                            "median": p.median,
                            "q3": p.q3,
                            "p_vs_new": p.p_vs_new,
                            "significant": p.significant,
                        }
                        for p in s.predictors
                    ],
                }
                for s in self.per_pi
            ],
        }


def draw_population(base: SampleData, n_pop: int, rng) -> list[ParameterVector]:
    """Bootstrap a population of parameter vectors from the base rows.

    Rows are sampled uniformly at random with replacement; each draw's
    reported encounter vector becomes the expected-count vector and its
    baseline status is carried along.
    """
    if base.n_people == 0:
        raise InputError("base data has no rows")
    if n_pop < 0:
        raise InputError("n_pop must be >= 0")
    gen = as_generator(rng)
    rows = gen.integers(0, base.n_people, size=n_pop)
    return [
        ParameterVector(i, base.z[r], int(base.baseline[r])) for i, r in enumerate(rows)
    ]


def _derived_seed(master_seed: int, rep_index: int) -> int:
    return int(
        np.random.SeedSequence((master_seed, rep_index)).generate_state(1, np.uint64)[0]
    )


def run_replication(
    cfg: StudyConfig, base: SampleData, rep_index: int, pi: Optional[float] = None
) -> ReplicationResult:
    """Execute one replication of the protocol at one transmission probability.

    Steps: bootstrap the population; simulate the first window to record
    reported exposures and baseline statuses; draw the evaluation sample
    without replacement; apply the misreporting scenario and compute the
    venue-risk scores; simulate the second window with transmission; fit
    the four logistic baselines (wave-2 models on end-of-window statuses);
    score all five predictors by AUC on the sample's baseline-negative
    members and accumulate person-time incidence.
    """
    pi = check_probability(cfg.pi_values[0] if pi is None else pi, "pi")
    if rep_index < 0:
        raise InputError("rep_index must be >= 0")
    n_pop = cfg.population_size(base.n_people)
    if cfg.n_sample > n_pop:
        raise InputError(f"n_sample {cfg.n_sample} exceeds population size {n_pop}")

    ss = np.random.SeedSequence((cfg.master_seed, rep_index))
    seed = _derived_seed(cfg.master_seed, rep_index)
    # fixed spawn count keeps streams matched across configs and flags
    pop_g, enc1_g, samp_g, scen_g, enc2_g, trans2_g, trans1_g = (
        np.random.Generator(np.random.PCG64(child)) for child in ss.spawn(7)
    )

    population = draw_population(base, n_pop, pop_g)
    means = _means_matrix(population)
    statuses = np.fromiter(
        (pv.baseline_status for pv in population), dtype=np.int8, count=n_pop
    )

    # window 1: exposures reported at the baseline interview
    z_pop = sample_encounter_counts(means * (cfg.window_days / cfg.base_window), enc1_g)
    y0 = statuses
    if cfg.transmit_first_window:
        log1 = sample_encounter_times(z_pop, cfg.window_days, enc1_g)
        out1 = simulate_transmission(
            pair_encounters(log1), statuses, TransmissionConfig(pi, cfg.window_days), trans1_g
        )
        y0 = out1.end_statuses

    sample_idx = samp_g.choice(n_pop, size=cfg.n_sample, replace=False)
    z_samp = z_pop[sample_idx].astype(np.float64)
    y0_s = y0[sample_idx]

    # reported data, as used by all five predictors
    reported = apply_scenario(z_samp, cfg.scenario, scen_g).z
    q_hat = estimate_q(SampleData(reported, y0_s))
    r_hat = estimate_risk(SampleData(reported, y0_s), q_hat, pi).r_hat

    # window 2: transmission from the wave-1 statuses
    counts2 = sample_encounter_counts(means * (cfg.followup / cfg.base_window), enc2_g)
    log2 = sample_encounter_times(counts2, cfg.followup, enc2_g)
    outcome = simulate_transmission(
        pair_encounters(log2), y0, TransmissionConfig(pi, cfg.followup), trans2_g
    )
    yt_s = outcome.end_statuses[sample_idx]

    active_cols = np.flatnonzero(reported.sum(axis=0) > 0)
    multi = reported[:, active_cols]
    total = reported.sum(axis=1, keepdims=True)
    eval_mask = y0_s == 0
    y_eval = yt_s[eval_mask]

    flagged = y_eval.size == 0 or int(y_eval.min()) == int(y_eval.max())
    aucs = np.full(N_PREDICTORS, np.nan)
    if not flagged:
        scores = (
            predict_logistic(fit_logistic(multi, y0_s), multi),
            predict_logistic(fit_logistic(multi, yt_s), multi),
            predict_logistic(fit_logistic(total, y0_s), total),
            predict_logistic(fit_logistic(total, yt_s), total),
            r_hat,
        )
        for k, score in enumerate(scores):
            aucs[k] = auc(score[eval_mask], y_eval)

    conversions = int(y_eval.sum()) if y_eval.size else 0
    person_days = float(
        (y_eval.size - conversions) * cfg.followup + conversions * cfg.followup / 2.0
    )
    quart = np.percentile(z_pop.sum(axis=1), [25, 50, 75])
    return ReplicationResult(
        auc=aucs,
        new_infections=conversions,
        person_days_at_risk=person_days,
        seed=seed,
        pi=pi,
        rep_index=rep_index,
        flagged=flagged,
        encounter_quartiles=(float(quart[0]), float(quart[1]), float(quart[2])),
    )


def _augmented_base(cfg: StudyConfig, base: SampleData) -> SampleData:
    if cfg.two_cluster is None:
        return base
    gen = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((cfg.master_seed, AUGMENT_STREAM_ID)))
    )
    return build_two_cluster(
        base, cfg.two_cluster.renamed_count, cfg.two_cluster.conversion_prob, gen
    )


def run_replications(
    cfg: StudyConfig, base: SampleData
) -> "dict[float, list[ReplicationResult]]":
    """Run the full grid of (pi, replication) tasks, grouped by pi.

    Results are keyed and ordered deterministically, so the output is
    independent of the parallelism degree.
    """
    base = _augmented_base(cfg, base)
    tasks = [(pi, r) for pi in cfg.pi_values for r in range(cfg.replications)]
    results = Parallel(n_jobs=cfg.n_jobs)(
        delayed(run_replication)(cfg, base, r, pi) for pi, r in tasks
    )
    by_pi: dict[float, list[ReplicationResult]] = {pi: [] for pi in cfg.pi_values}
    for (pi, _), res in zip(tasks, results):
        by_pi[pi].append(res)
    return by_pi


def summarize(
    cfg: StudyConfig, base: SampleData, by_pi: "dict[float, list[ReplicationResult]]"
) -> StudySummary:
    """Aggregate replication results into a StudySummary.

    ``base`` is the dataset before any two-cluster augmentation, exactly
    as passed to run_replications. Flagged replications are excluded from
    AUC statistics (their count is reported); an arm with more than half
    of its replications flagged fails the study.
    """
    base_rows = base.n_people * (2 if cfg.two_cluster is not None else 1)
    summaries = []
    for pi in cfg.pi_values:
        reps = by_pi[pi]
        flagged = sum(r.flagged for r in reps)
        if flagged > len(reps) / 2:
            raise DegenerateStudyError(
                f"{flagged}/{len(reps)} replications flagged at pi={pi}"
            )
        usable = [r for r in reps if not r.flagged]
        auc_matrix = np.vstack([r.auc for r in usable])
        predictors = []
        for k, name in enumerate(PREDICTOR_NAMES):
            col = auc_matrix[:, k]
            p_vs_new = significant = None
            if k != N_PREDICTORS - 1 and col.shape[0] >= 2:
                cmp = paired_comparison(
                    col, auc_matrix[:, N_PREDICTORS - 1], cfg.significance_method
                )
                p_vs_new = cmp.p_value
                significant = bool(cmp.p_value < 0.05)
            q1, med, q3 = np.percentile(col, [25, 50, 75])
            predictors.append(
                PredictorSummary(
                    predictor=k + 1,
                    name=name,
                    mean_auc=float(col.mean()),
                    sd_auc=float(col.std(ddof=1)) if col.shape[0] > 1 else 0.0,
                    q1=float(q1),
                    median=float(med),
                    q3=float(q3),
                    p_vs_new=p_vs_new,
                    significant=significant,
                )
            )
        rates = [r.incidence for r in reps if r.person_days_at_risk > 0]
        quart = np.vstack([r.encounter_quartiles for r in reps]).mean(axis=0)
        summaries.append(
            PiSummary(
                pi=pi,
                n_replications=len(reps),
                n_flagged=flagged,
                predictors=tuple(predictors),
                mean_incidence=float(np.mean(rates)) if rates else float("nan"),
                encounter_quartile_means=(
                    float(quart[0]),
                    float(quart[1]),
                    float(quart[2]),
                ),
            )
        )
    return StudySummary(
        scenario=cfg.scenario.kind,
        two_cluster=cfg.two_cluster is not None,
        n_sample=cfg.n_sample,
        population_size=cfg.population_size(base_rows),
        replications=cfg.replications,
        window_days=cfg.window_days,
        followup_days=cfg.followup,
        master_seed=cfg.master_seed,
        per_pi=tuple(summaries),
    )


def run_study(cfg: StudyConfig, base: SampleData) -> StudySummary:
    """Run the whole study and aggregate it."""
    return summarize(cfg, base, run_replications(cfg, base))


@dataclass(frozen=True)
class CalibrationPoint:
    pi: float
    mean_incidence: float
    se_incidence: float
    n_used: int


def calibrate_pi(
    base: SampleData,
    pi_grid: Sequence[float],
    replications: int,
    cfg: StudyConfig,
) -> list[CalibrationPoint]:
    """Mean infection rate per 100 person-years at each grid value of pi.

    Replication streams do not depend on pi, so the grid points share
    encounter histories and the per-encounter infection draws are coupled.
    """
    if len(pi_grid) == 0:
        raise InputError("pi_grid must be non-empty")
    grid = [check_probability(p, "pi") for p in pi_grid]
    sweep_cfg = replace(cfg, pi_values=tuple(grid), replications=replications)
    by_pi = run_replications(sweep_cfg, base)
    curve = []
    for pi in grid:
        rates = np.array([r.incidence for r in by_pi[pi] if r.person_days_at_risk > 0])
        mean = float(rates.mean()) if rates.size else float("nan")
        se = float(rates.std(ddof=1) / np.sqrt(rates.size)) if rates.size > 1 else 0.0
        curve.append(CalibrationPoint(pi, mean, se, int(rates.size)))
    return curve
