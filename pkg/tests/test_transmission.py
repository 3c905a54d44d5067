import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from venuerisk import (
    AffiliationNetwork,
    MissingShareError,
    RngStream,
    TransmissionConfig,
    VenueShares,
    simulate_transmission,
    true_risk,
    venue_positive_share,
)
from venuerisk.types import PartnershipList


def make_pairs(triples):
    """(venue, person_a, person_b) tuples, times synthesized in order."""
    venues = np.array([t[0] for t in triples], dtype=np.int64)
    a = np.array([t[1] for t in triples], dtype=np.int64)
    b = np.array([t[2] for t in triples], dtype=np.int64)
    times = np.arange(len(triples), dtype=float)
    return PartnershipList(venues, a, b, times, times + 0.5, 0)


class TestSimulateTransmission:
    def test_pi_zero_no_infections(self):
        pairs = make_pairs([(0, 0, 1)] * 20)
        out = simulate_transmission(pairs, [0, 1], TransmissionConfig(0.0), RngStream(1))
        assert out.new_infections == frozenset()
        assert out.end_statuses.tolist() == [0, 1]

    def test_pi_one_certain_transmission(self):
        pairs = make_pairs([(0, 0, 1)])
        out = simulate_transmission(pairs, [0, 1], TransmissionConfig(1.0), RngStream(1))
        assert out.new_infections == frozenset({0})
        assert out.end_statuses.tolist() == [1, 1]

    def test_self_and_concordant_pairs_never_transmit(self):
        pairs = make_pairs([(0, 0, 0), (0, 1, 2), (0, 3, 4)])
        baseline = [1, 1, 1, 0, 0]
        out = simulate_transmission(pairs, baseline, TransmissionConfig(1.0), RngStream(1))
        assert out.new_infections == frozenset()

    def test_no_recovery(self, rng):
        pairs = make_pairs(
            [(0, int(rng.integers(10)), int(rng.integers(10))) for _ in range(100)]
        )
        baseline = rng.integers(0, 2, size=10)
        out = simulate_transmission(pairs, baseline, TransmissionConfig(0.5), RngStream(2))
        assert np.all(out.end_statuses >= baseline)

    def test_monte_carlo_matches_closed_form(self):
        # 1e5 independent negative persons, each with 10 discordant encounters
        trials, k, pi = 100_000, 10, 0.0143
        positive = trials  # one shared positive partner id
        triples = [(0, person, positive) for person in range(trials) for _ in range(k)]
        pairs = make_pairs(triples)
        baseline = np.zeros(trials + 1, dtype=np.int8)
        baseline[positive] = 1
        out = simulate_transmission(pairs, baseline, TransmissionConfig(pi), RngStream(99))
        freq = out.end_statuses[:trials].mean()
        expected = 1.0 - (1.0 - pi) ** k
        se = np.sqrt(expected * (1 - expected) / trials)
        assert abs(freq - expected) < 3 * se


class TestVenuePositiveShare:
    def test_all_negative(self):
        net = AffiliationNetwork([[1, 0], [2, 0]], [0, 0])
        q = venue_positive_share(net)
        assert q.defined.tolist() == [True, False]
        assert q.values[0] == 0.0

    def test_hand_evaluation(self):
        net = AffiliationNetwork([[2], [3]], [1, 0])
        q = venue_positive_share(net)
        assert q.values[0] == pytest.approx(0.4)

    def test_zero_traffic_venue_absent(self):
        net = AffiliationNetwork([[1, 0]], [1])
        q = venue_positive_share(net)
        assert not q.defined[1]
        assert np.isnan(q.values[1])


def mc_risk(row, q_values, pi, trials, seed):
    """Monte-Carlo oracle for the binomial-mixture infection process."""
    gen = np.random.default_rng(seed)
    row = np.asarray(row, dtype=np.int64)
    infected = np.zeros(trials, dtype=bool)
    for j, (count, q) in enumerate(zip(row, q_values)):
        if count == 0:
            continue
        transmissions = gen.binomial(count, pi * q, size=trials)
        infected |= transmissions > 0
    return infected.mean()


class TestTrueRisk:
    def test_pi_zero(self):
        assert true_risk([3, 5], VenueShares([0.5, 0.2]), 0.0) == 0.0

    def test_single_certain_positive_encounter(self):
        assert true_risk([1], VenueShares([1.0]), 0.0062) == pytest.approx(0.0062)

    def test_monte_carlo_oracle(self, rng):
        for trial in range(5):
            m = int(rng.integers(1, 5))
            row = rng.integers(0, 8, size=m)
            q = rng.uniform(0.05, 0.95, size=m)
            pi = float(rng.choice([0.0062, 0.0110, 0.0143, 0.3]))
            r = true_risk(row, VenueShares(q), pi)
            trials = 100_000
            freq = mc_risk(row, q, pi, trials, seed=100 + trial)
            se = max(np.sqrt(r * (1 - r) / trials), 1e-9)
            assert abs(r - freq) < 3 * se + 1e-12

    def test_undefined_share_with_exposure_errors(self):
        q = VenueShares([np.nan, 0.5], [False, True])
        with pytest.raises(MissingShareError):
            true_risk([1, 0], q, 0.01)

    def test_zero_exposure_at_undefined_share_is_factor_one(self):
        q = VenueShares([np.nan, 0.5], [False, True])
        assert true_risk([0, 2], q, 0.01) == pytest.approx(1 - (1 - 0.005) ** 2)

    def test_absorbing_limit(self):
        assert true_risk([1], VenueShares([1.0]), 1.0) == 1.0

    @given(
        st.floats(0.0, 1.0),
        st.floats(0.0, 1.0),
        st.integers(0, 50),
    )
    def test_bounds(self, pi, q, x):
        r = true_risk([x], VenueShares([q]), pi)
        assert 0.0 <= r <= 1.0

    def test_monotone_in_pi_q_and_counts(self):
        row = np.array([2, 3])
        q = VenueShares([0.4, 0.6])
        base = true_risk(row, q, 0.01)
        assert true_risk(row, q, 0.02) > base
        assert true_risk(row, VenueShares([0.5, 0.6]), 0.01) > base
        assert true_risk([3, 3], q, 0.01) > base

    def test_venue_permutation_invariance(self, rng):
        row = rng.integers(0, 6, size=5)
        q = rng.uniform(0, 1, size=5)
        perm = rng.permutation(5)
        a = true_risk(row, VenueShares(q), 0.013)
        b = true_risk(row[perm], VenueShares(q[perm]), 0.013)
        assert a == pytest.approx(b, rel=1e-12)

    def test_deep_product_does_not_underflow(self):
        # huge exposure: product of many factors just below 1
        r = true_risk([10**6], VenueShares([0.5]), 0.01)
        assert r == pytest.approx(1.0)
        assert 0.0 <= r <= 1.0
