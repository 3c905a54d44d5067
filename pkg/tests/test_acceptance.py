"""Acceptance suite: one test per criterion, each printing a pass/fail line.

The heavyweight replication studies are shared through module-scoped
fixtures; every tolerance is stated inline next to its assertion.
"""

import time

import numpy as np
import pytest
from scipy import stats

from venuerisk import (
    EncounterLog,
    RngStream,
    SampleData,
    ScenarioSpec,
    StudyConfig,
    TwoClusterSpec,
    apply_scenario,
    auc,
    calibrate_pi,
    estimate_q,
    estimate_risk,
    fit_logistic,
    incidence_rate,
    make_synthetic_base,
    paired_comparison,
    pair_encounters,
    run_replications,
    sample_encounter_counts,
    sample_encounter_times,
    summarize,
    write_results,
)
from venuerisk.baselines import FollowUpRecord

NEW = 4  # predictor index of the venue-risk method (id 5)


def report(number: int, label: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {number}: {label}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {number} failed: {label} {detail}"


# ----------------------------------------------------------------------
# shared study fixtures
# ----------------------------------------------------------------------

PI_VALUES = (0.0062, 0.0110, 0.0143)
REPS = 200
MASTER_SEED = 2024
N_JOBS = 2


@pytest.fixture(scope="module")
def base_466():
    return make_synthetic_base(n=466, m=15, seed=1)


def _study(base, scenario, pi_values, n_sample=466, two_cluster=None, reps=REPS):
    cfg = StudyConfig(
        n_sample=n_sample,
        pi_values=pi_values,
        replications=reps,
        master_seed=MASTER_SEED,
        scenario=ScenarioSpec(scenario),
        two_cluster=two_cluster,
        n_jobs=N_JOBS,
    )
    return cfg, run_replications(cfg, base)


def _auc_matrix(reps):
    return np.vstack([r.auc for r in reps if not r.flagged])


@pytest.fixture(scope="module")
def perfect_runs(base_466):
    return _study(base_466, "perfect", PI_VALUES)


@pytest.fixture(scope="module")
def largest_runs(base_466):
    return _study(base_466, "largest", (0.0110,))


@pytest.fixture(scope="module")
def contaminated_runs(base_466):
    return _study(base_466, "contaminated", (0.0110,))


@pytest.fixture(scope="module")
def two_cluster_runs(base_466):
    start = time.time()
    cfg, by_pi = _study(
        base_466,
        "perfect",
        (0.0110,),
        n_sample=862,
        two_cluster=TwoClusterSpec(renamed_count=10, conversion_prob=0.75),
    )
    return cfg, by_pi, time.time() - start


# ----------------------------------------------------------------------
# criterion 1: estimator vs Monte-Carlo oracle
# ----------------------------------------------------------------------


def mc_infection_probability(z_row, q_values, pi, trials, gen):
    """Binomial-mixture oracle: per venue, each encounter meets a positive
    partner with probability Q_j and then transmits with probability pi."""
    infected = np.zeros(trials, dtype=bool)
    for count, q in zip(z_row, q_values):
        if count == 0 or np.isnan(q):
            continue
        infected |= gen.binomial(int(count), pi * q, size=trials) > 0
    return infected.mean()


def test_criterion_01_estimator_oracle_equivalence():
    start = time.time()
    draw = np.random.default_rng(555)
    trials = 100_000
    worst = 0.0
    for instance in range(50):
        n = int(draw.integers(2, 21))
        m = int(draw.integers(1, 5))
        z = draw.integers(0, 7, size=(n, m)).astype(float)
        y = draw.integers(0, 2, size=n)
        pi = float(draw.choice(PI_VALUES))
        sample = SampleData(z, y)
        q_hat = estimate_q(sample)
        r_hat = estimate_risk(sample, q_hat, pi).r_hat
        mc_gen = np.random.default_rng(70_000 + instance)
        for i in range(n):
            freq = mc_infection_probability(z[i], q_hat.values, pi, trials, mc_gen)
            se = max(np.sqrt(r_hat[i] * (1 - r_hat[i]) / trials), 1e-12)
            gap = abs(r_hat[i] - freq)
            worst = max(worst, gap / (3 * se + 1e-12))
            assert gap < 3 * se + 1e-12, (instance, i, r_hat[i], freq)
    elapsed = time.time() - start
    report(
        1,
        "estimator matches Monte-Carlo oracle within 3 SE",
        elapsed < 120,
        f"worst gap {worst:.2f}x allowance, {elapsed:.0f}s",
    )


# ----------------------------------------------------------------------
# criterion 2: generator distributional checks
# ----------------------------------------------------------------------


def _poisson_chi_square_p(draws, lam):
    upper = int(stats.poisson.ppf(0.9999, lam)) + 1
    observed = np.bincount(draws, minlength=upper + 1).astype(float)
    expected = stats.poisson.pmf(np.arange(upper + 1), lam) * draws.size
    expected[-1] += stats.poisson.sf(upper, lam) * draws.size
    observed[-1] += max(0.0, draws.size - observed.sum())
    obs_bins, exp_bins, acc_o, acc_e = [], [], 0.0, 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
            acc_o = acc_e = 0.0
    obs_bins[-1] += acc_o
    exp_bins[-1] += acc_e
    return stats.chisquare(obs_bins, exp_bins).pvalue


def test_criterion_02_generator_distributions():
    draws = sample_encounter_counts(np.full((100_000, 1), 4.0), RngStream(42)).ravel()
    mean_ok = abs(draws.mean() - 4.0) < 0.02
    var_ok = abs(draws.var(ddof=1) - 4.0) < 0.15

    gen = RngStream(7)
    sums = np.empty((10_000, 2), dtype=np.int64)
    means = np.array([[1.0, 2.0], [3.0, 4.0]])
    for k in range(10_000):
        sums[k] = sample_encounter_counts(means, gen).sum(axis=0)
    chi_ok = (
        _poisson_chi_square_p(sums[:, 0], 4.0) > 0.01
        and _poisson_chi_square_p(sums[:, 1], 6.0) > 0.01
    )

    log = sample_encounter_times(np.array([[10_000]]), 182.0, RngStream(11))
    ks_stat = stats.kstest(log.times / 182.0, "uniform").statistic
    ks_ok = ks_stat < 1.6276 / np.sqrt(10_000)  # alpha = 0.01 critical value

    report(
        2,
        "Poisson mean/variance, superposition chi-square, uniform-times KS",
        mean_ok and var_ok and chi_ok and ks_ok,
        f"mean={draws.mean():.4f} var={draws.var(ddof=1):.4f} ks={ks_stat:.5f}",
    )


# ----------------------------------------------------------------------
# criterion 3: pairing invariants on 1,000 random logs
# ----------------------------------------------------------------------


def test_criterion_03_pairing_invariants():
    draw = np.random.default_rng(99)
    for _ in range(1000):
        k = int(draw.integers(0, 80))
        events = [
            (int(draw.integers(12)), int(draw.integers(5)), float(draw.uniform(0, 30)))
            for _ in range(k)
        ]
        log = EncounterLog.from_events(events, 30.0)
        pairs = pair_encounters(log)
        assert 2 * len(pairs) + pairs.discarded == len(log)
        used = 0
        for venue in np.unique(log.venues):
            vmask = log.venues == venue
            vtimes = log.times[vmask]
            vpersons = log.persons[vmask]
            pmask = pairs.venues == venue
            count = int(vmask.sum())
            assert int(pmask.sum()) == count // 2
            # pairs are exactly the consecutive chunks of the sorted log,
            # so every event index is used at most once
            assert np.array_equal(pairs.time_a[pmask], vtimes[0 : 2 * (count // 2) : 2])
            assert np.array_equal(pairs.time_b[pmask], vtimes[1 : 2 * (count // 2) : 2])
            assert np.array_equal(pairs.person_a[pmask], vpersons[0 : 2 * (count // 2) : 2])
            assert np.array_equal(pairs.person_b[pmask], vpersons[1 : 2 * (count // 2) : 2])
            used += 2 * int(pmask.sum())
        assert used + pairs.discarded == len(log)
    report(3, "pairing conservation, consecutiveness, single use on 1,000 logs", True)


# ----------------------------------------------------------------------
# criterion 4: AUC exactness and transform invariance
# ----------------------------------------------------------------------


def brute_auc(scores, outcomes):
    pos = [s for s, y in zip(scores, outcomes) if y == 1]
    neg = [s for s, y in zip(scores, outcomes) if y == 0]
    credit = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return credit / (len(pos) * len(neg))


def test_criterion_04_auc_exactness():
    draw = np.random.default_rng(4242)
    checked = 0
    while checked < 100:
        n = int(draw.integers(3, 51))
        scores = draw.integers(0, 8, size=n).astype(float)  # integer scores force ties
        outcomes = draw.integers(0, 2, size=n)
        if outcomes.min() == outcomes.max():
            continue
        expected = brute_auc(scores, outcomes)
        got = auc(scores, outcomes)
        assert got == expected, (checked, got, expected)
        assert auc(np.exp(scores), outcomes) == pytest.approx(got, abs=1e-12)
        assert auc(2.5 * scores + 7.0, outcomes) == pytest.approx(got, abs=1e-12)
        checked += 1
    report(4, "AUC equals exhaustive pair enumeration on 100 instances", True)


# ----------------------------------------------------------------------
# criterion 5: logistic fit quality
# ----------------------------------------------------------------------


def test_criterion_05_logistic_fit():
    draw = np.random.default_rng(31)
    grad_ok = trace_ok = True
    worst_grad = 0.0
    for _ in range(20):
        n, p = 150, int(draw.integers(1, 5))
        X = draw.normal(size=(n, p))
        beta = draw.normal(scale=0.8, size=p + 1)
        eta = beta[0] + X @ beta[1:]
        y = (draw.uniform(size=n) < 1 / (1 + np.exp(-eta))).astype(int)
        if y.min() == y.max():
            continue
        fit = fit_logistic(X, y)
        if not fit.converged:
            continue  # separated by chance; covered below
        Xd = np.hstack([np.ones((n, 1)), X])
        mu = 1 / (1 + np.exp(-(Xd @ fit.coefficients)))
        grad_norm = np.max(np.abs(Xd.T @ (y - mu)))
        worst_grad = max(worst_grad, grad_norm)
        grad_ok &= grad_norm < 1e-6
        trace_ok &= bool(np.all(np.diff(fit.loglik_trace) >= -1e-9))

    separated_ok = True
    for margin in (0.0, 0.5, 2.0):
        X = np.concatenate([np.linspace(-3, -1, 10), np.linspace(1 + margin, 3 + margin, 10)])[:, None]
        y = (X[:, 0] > 0).astype(int)
        fit = fit_logistic(X, y)  # must not raise
        separated_ok &= not fit.converged
        separated_ok &= bool(np.all(np.abs(fit.coefficients) <= 30.0))

    report(
        5,
        "logistic gradient < 1e-6, monotone log-likelihood, separation flagged",
        grad_ok and trace_ok and separated_ok,
        f"worst gradient {worst_grad:.2e}",
    )


# ----------------------------------------------------------------------
# criterion 6: incidence arithmetic
# ----------------------------------------------------------------------


def test_criterion_06_incidence_arithmetic():
    records = [
        FollowUpRecord(0, 0, 0, 365.0),
        FollowUpRecord(1, 0, 0, 365.0),
        FollowUpRecord(2, 0, 1, 200.0),
    ]
    ok = abs(incidence_rate(records) - 36525.0 / 830.0) < 1e-9
    ok &= abs(incidence_rate([FollowUpRecord(0, 0, 1, 100.0)]) - 730.5) < 1e-9
    ok &= incidence_rate([FollowUpRecord(0, 0, 0, 123.4)]) == 0.0
    report(6, "incidence matches hand arithmetic to 1e-9", ok)


# ----------------------------------------------------------------------
# criterion 7: two-cluster qualitative reproduction
# ----------------------------------------------------------------------


def test_criterion_07_two_cluster_pattern(two_cluster_runs, base_466):
    cfg, by_pi, elapsed = two_cluster_runs
    M = _auc_matrix(by_pi[0.0110])
    means = M.mean(axis=0)
    vs_slr = paired_comparison(M[:, NEW], M[:, 2])
    new_beats_slr = means[NEW] > means[2] and vs_slr.p_value < 0.05
    new_beats_mlr = means[NEW] > means[0]
    report(
        7,
        "two clusters: venue risk beats simple LR (p<0.05) and multiple LR (wave 1)",
        new_beats_slr and new_beats_mlr and elapsed < 600,
        f"new={means[NEW]:.4f} slr={means[2]:.4f} mlr={means[0]:.4f} "
        f"p={vs_slr.p_value:.2e} {elapsed:.0f}s",
    )


# ----------------------------------------------------------------------
# criterion 8: single-cluster qualitative reproduction
# ----------------------------------------------------------------------


def test_criterion_08_single_cluster_pattern(perfect_runs):
    _, by_pi = perfect_runs
    close_ok = best_ok = True
    details = []
    for pi in PI_VALUES:
        means = _auc_matrix(by_pi[pi]).mean(axis=0)
        close_ok &= abs(means[NEW] - means[2]) < 0.03
        best_ok &= int(np.argmax(means)) == 1  # multiple LR on wave-2 outcome
        details.append(f"pi={pi}: |new-slr|={abs(means[NEW]-means[2]):.4f}")
    report(
        8,
        "single cluster: venue risk within 0.03 of simple LR, wave-2 multiple LR best",
        close_ok and best_ok,
        "; ".join(details),
    )


# ----------------------------------------------------------------------
# criterion 9: scenario effects at matched seeds
# ----------------------------------------------------------------------


def test_criterion_09_scenario_effects(perfect_runs, largest_runs, contaminated_runs):
    _, perfect = perfect_runs
    _, largest = largest_runs
    _, contaminated = contaminated_runs
    mean_p = _auc_matrix(perfect[0.0110]).mean(axis=0)
    mean_l = _auc_matrix(largest[0.0110]).mean(axis=0)
    mean_c = _auc_matrix(contaminated[0.0110]).mean(axis=0)
    largest_ok = bool(np.all(mean_l < mean_p))
    contaminated_ok = bool(np.all(np.abs(mean_c - mean_p) < 0.02))

    draw = np.random.default_rng(2)
    gen = RngStream(17)
    totals_ok = True
    for _ in range(2000):
        z = draw.integers(0, 9, size=(draw.integers(1, 8), draw.integers(1, 8))).astype(float)
        out = apply_scenario(z, ScenarioSpec("contaminated"), gen)
        totals_ok &= bool(np.array_equal(out.z.sum(axis=1), z.sum(axis=1)))

    report(
        9,
        "largest-missing lowers all AUCs; contamination within 0.02 and total-preserving",
        largest_ok and contaminated_ok and totals_ok,
        f"largest dAUC={np.round(mean_l - mean_p, 3).tolist()} "
        f"contam dAUC={np.round(mean_c - mean_p, 3).tolist()}",
    )


# ----------------------------------------------------------------------
# criterion 10: variance trend in pi
# ----------------------------------------------------------------------


def test_criterion_10_variance_trend(perfect_runs):
    _, by_pi = perfect_runs
    sds = [float(_auc_matrix(by_pi[pi])[:, NEW].std(ddof=1)) for pi in PI_VALUES]
    ok = sds[0] >= sds[1] >= sds[2]
    report(
        10,
        "venue-risk AUC spread non-increasing in pi",
        ok,
        f"sds={np.round(sds, 4).tolist()}",
    )


# ----------------------------------------------------------------------
# criterion 11: calibration curve monotone
# ----------------------------------------------------------------------


def test_criterion_11_calibration_monotone(base_466):
    cfg = StudyConfig(
        n_sample=466, pi_values=(0.0110,), replications=60, master_seed=MASTER_SEED,
        n_jobs=N_JOBS,
    )
    grid = [0.001, 0.004, 0.008, 0.012, 0.016, 0.02]
    curve = calibrate_pi(base_466, grid, 60, cfg)
    ok = True
    for lo, hi in zip(curve, curve[1:]):
        slack = 2 * np.hypot(lo.se_incidence, hi.se_incidence)
        ok &= hi.mean_incidence >= lo.mean_incidence - slack
    report(
        11,
        "mean infection rate non-decreasing in pi within Monte-Carlo error",
        ok,
        f"rates={[round(p.mean_incidence, 3) for p in curve]}",
    )


# ----------------------------------------------------------------------
# criterion 12: determinism across parallelism degrees
# ----------------------------------------------------------------------


def test_criterion_12_determinism(base_466, tmp_path):
    import dataclasses

    cfg = StudyConfig(
        n_sample=100, pi_values=(0.0110,), replications=8, master_seed=77, n_jobs=1
    )
    outputs = {}
    for label, jobs in (("serial", 1), ("parallel", 2)):
        run_cfg = dataclasses.replace(cfg, n_jobs=jobs)
        raw = run_replications(run_cfg, base_466)
        summary = summarize(run_cfg, base_466, raw)
        paths = write_results(summary, raw, tmp_path / label)
        outputs[label] = [p.read_bytes() for p in paths]
    ok = outputs["serial"] == outputs["parallel"]
    report(12, "byte-identical outputs independent of parallelism degree", ok)
