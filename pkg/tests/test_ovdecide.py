"""
Unit tests for the grouped OV decision procedure.
"""

import logging
import math
from fractions import Fraction

import numpy as np
import pytest

from ovapprox.datasets import planted_orthogonal
from ovapprox.exceptions import InvalidArgumentError
from ovapprox.f2poly import sample_disj_poly
from ovapprox.models import OvDecideParams, VectorFamily
from ovapprox.oracle import brute_count_ov
from ovapprox.ovdecide import (choose_eps_exponent, default_group_size, default_repetitions,
                               derive_ov_params, direct_group_test_bits, group_test_bits,
                               ov_decide, ov_decide_report, validate_params)
from ovapprox.rng import SeededRng


def shared_coordinate(family):
    """Copy of family with coordinate 0 set in every member"""
    flags = family.to_bool()
    flags[:, 0] = True
    return VectorFamily.from_bool(flags)


def screened_negative(family_factory, n, d, seed):
    """First random pair of families from seed onwards with no orthogonal pair"""
    while True:
        A = family_factory(n, d, seed=seed, p=Fraction(3, 4))
        B = family_factory(n, d, seed=seed + 1, p=Fraction(3, 4))
        if brute_count_ov(A, B) == 0:
            return A, B
        seed += 2


def pair_frequency(A, B, L, m, pair, trials, rng):
    """Fraction of trials with U_i·V_j = 1 for one group pair"""
    hits = 0
    for t in range(trials):
        stream = rng.derive(("trial", t))
        poly = sample_disj_poly(A.dim, L, stream)
        u, v = stream.bits(m), stream.bits(m)
        bits = group_test_bits(A, B, poly, u, v, m)
        if t < 10:
            assert np.array_equal(bits, direct_group_test_bits(A, B, poly, u, v, m))
        hits += int(bits[pair])
    return hits / trials


def three_sigma(p, trials):
    return 3 * math.sqrt(p * (1 - p) / trials)


class TestParameters:
    """Test cases for parameter derivation and validation"""

    def test_defaults_for_small_instance(self):
        """Test n = 1024, d = 16 gives L = 1, m = 1, T = ceil(1000 ln n)"""
        params = derive_ov_params(1024, 16)
        assert params.eps_exponent == 1
        assert params.group_size == 1
        assert params.group_count == 1024
        assert params.repetitions == 6932

    def test_helpers(self):
        """Test the individual defaults"""
        assert default_group_size(1) == 1
        assert default_group_size(20) == 102  # isqrt(2^20 // 100)
        assert default_repetitions(2) == 694
        assert choose_eps_exponent(10**11, 4) == 2  # 11^10 <= 10^11 < 15^10

    def test_overrides(self):
        """Test explicit L, m and T are honoured"""
        params = derive_ov_params(100, 8, eps_exponent=14, group_size=4, repetitions=50)
        assert (params.eps_exponent, params.group_size, params.group_count) == (14, 4, 25)
        assert params.repetitions == 50
        assert params.eps == Fraction(1, 2**14)

    def test_union_bound_violation(self):
        """Test eps * m^2 > 1/100 is rejected for m > 1"""
        with pytest.raises(InvalidArgumentError, match="exceeds 1/100"):
            derive_ov_params(100, 8, eps_exponent=10, group_size=4)

    def test_single_groups_warn(self, caplog):
        """Test m = 1 with a large eps logs a warning instead of failing"""
        with caplog.at_level(logging.WARNING, logger="ovapprox.ovdecide"):
            derive_ov_params(16, 8, eps_exponent=2, group_size=1)
        assert "false accept rate" in caplog.text

    def test_invalid_fields(self):
        """Test out-of-range fields are rejected"""
        with pytest.raises(InvalidArgumentError, match="n must be >= 2"):
            derive_ov_params(1, 8)
        with pytest.raises(InvalidArgumentError, match="eps_exponent"):
            validate_params(OvDecideParams(eps_exponent=21, group_size=1, group_count=1,
                                           repetitions=1))
        with pytest.raises(InvalidArgumentError, match="accept_fraction"):
            derive_ov_params(16, 8, accept_fraction=1)


class TestGroupTest:
    """Test cases for the grouped GF(2) products"""

    def test_matches_direct_evaluation(self, family_factory):
        """Test the packed product equals the pair-by-pair sum, ragged groups included"""
        A = family_factory(10, 6, seed=41)
        B = family_factory(10, 6, seed=42)
        stream = SeededRng(43)
        for rep in range(6):
            child = stream.derive(rep)
            poly = sample_disj_poly(6, 3, child)
            u, v = child.bits(3), child.bits(3)
            fast = group_test_bits(A, B, poly, u, v, 3)
            assert fast.shape == (4, 4)
            assert np.array_equal(fast, direct_group_test_bits(A, B, poly, u, v, 3))

    def test_sign_vector_length(self, family_factory):
        """Test sign vectors must have length m"""
        A = family_factory(4, 4, seed=44)
        poly = sample_disj_poly(4, 2, SeededRng(1))
        with pytest.raises(InvalidArgumentError, match="length m"):
            group_test_bits(A, A, poly, np.ones(3, dtype=bool), np.ones(2, dtype=bool), 2)


@pytest.mark.slow
class TestGroupPairFrequency:
    """Test cases for per-trial acceptance of a single group pair"""

    TRIALS = 800

    @pytest.mark.parametrize("L,m", [(5, 1), (10, 2)])
    def test_negative_pair_rarely_fires(self, family_factory, L, m):
        """Test a non-orthogonal group pair fires with frequency <= 0.01 + 3 sigma"""
        A, B = screened_negative(family_factory, 16, 12, seed=300)
        frequency = pair_frequency(A, B, L, m, (0, 0), self.TRIALS, SeededRng(71))
        assert frequency <= 0.01 + three_sigma(0.01, self.TRIALS)

    @pytest.mark.parametrize("L,m", [(5, 1), (10, 2)])
    def test_planted_pair_fires(self, L, m):
        """Test the group pair holding a planted orthogonal pair fires with frequency >= 0.24 - 3 sigma"""
        A, B, (i, j) = planted_orthogonal(16, 12, SeededRng(72))
        frequency = pair_frequency(A, B, L, m, (i // m, j // m), self.TRIALS, SeededRng(73))
        assert frequency >= 0.24 - three_sigma(0.24, self.TRIALS)

    def test_screened_negative_has_no_orthogonal_pair(self, family_factory):
        """Test the oracle screen returns families with no orthogonal pair"""
        A, B = screened_negative(family_factory, 16, 12, seed=300)
        assert brute_count_ov(A, B) == 0


@pytest.mark.slow
class TestDecisionRates:
    """Test cases for repeated decisions on planted and screened instances"""

    RUNS = 20

    def setup_method(self):
        """Set up L = 6, m = 1, T = 200 for n = 16, d = 10"""
        self.params = derive_ov_params(16, 10, eps_exponent=6, group_size=1, repetitions=200)

    def test_planted_instances_accepted(self):
        """Test at least 19 of 20 planted instances are accepted"""
        correct = 0
        for run in range(self.RUNS):
            A, B, _ = planted_orthogonal(16, 10, SeededRng(400 + run))
            correct += ov_decide(A, B, self.params, SeededRng(500 + run))
        assert correct >= self.RUNS - 1

    def test_screened_instances_rejected(self, family_factory):
        """Test at least 19 of 20 oracle-screened negatives are rejected"""
        correct = 0
        for run in range(self.RUNS):
            A, B = screened_negative(family_factory, 16, 10, seed=600 + 1000 * run)
            correct += not ov_decide(A, B, self.params, SeededRng(700 + run))
        assert correct >= self.RUNS - 1


class TestDecision:
    """Test cases for ov_decide_report"""

    def setup_method(self):
        """Set up small parameter sets"""
        self.single = derive_ov_params(16, 12, eps_exponent=6, group_size=1, repetitions=400)
        self.grouped = derive_ov_params(16, 12, eps_exponent=10, group_size=2, repetitions=400)

    @pytest.mark.slow
    def test_planted_pair_accepted(self):
        """Test a planted orthogonal pair drives its counter over the threshold"""
        A, B, (i, j) = planted_orthogonal(16, 12, SeededRng(51))
        report = ov_decide_report(A, B, self.single, SeededRng(52))
        assert report.answer
        assert report.counters[i, j] > 60

    @pytest.mark.slow
    def test_no_orthogonal_pair_rejected(self, family_factory):
        """Test families sharing a coordinate are rejected"""
        A = shared_coordinate(family_factory(16, 12, seed=53))
        B = shared_coordinate(family_factory(16, 12, seed=54))
        assert not ov_decide(A, B, self.single, SeededRng(55))
        assert not ov_decide(A, B, self.grouped, SeededRng(56))

    @pytest.mark.slow
    def test_grouped_planted_pair(self):
        """Test grouping two vectors per group still finds the planted pair"""
        A, B, (i, j) = planted_orthogonal(16, 12, SeededRng(57))
        report = ov_decide_report(A, B, self.grouped, SeededRng(58))
        assert report.answer
        assert report.counters.shape == (8, 8)
        assert report.counters[i // 2, j // 2] > 60

    def test_thread_invariance(self, family_factory):
        """Test counters do not depend on the worker count"""
        A = family_factory(6, 8, seed=59)
        B = family_factory(6, 8, seed=60)
        params = derive_ov_params(6, 8, eps_exponent=4, group_size=1, repetitions=12)
        one = ov_decide_report(A, B, params, SeededRng(61))
        three = ov_decide_report(A, B, params, SeededRng(61), threads=3)
        assert np.array_equal(one.counters, three.counters)
        assert one.answer == three.answer

    def test_instrumentation(self, family_factory):
        """Test m_errors is zero when every pair is orthogonal and None when off"""
        zeros = VectorFamily.from_bool(np.zeros((5, 8), dtype=bool))
        params = derive_ov_params(5, 8, eps_exponent=14, group_size=2, repetitions=40)
        report = ov_decide_report(zeros, zeros, params, SeededRng(62), instrument=True)
        assert report.m_errors == 0
        assert report.answer
        assert report.counters.shape == (3, 3)
        plain = ov_decide_report(zeros, zeros, params, SeededRng(62))
        assert plain.m_errors is None

    def test_instrumentation_counts_errors(self, family_factory):
        """Test non-orthogonal pairs produce some polynomial errors at L = 1"""
        A = shared_coordinate(family_factory(6, 8, seed=63))
        params = derive_ov_params(6, 8, eps_exponent=1, group_size=1, repetitions=20)
        report = ov_decide_report(A, A, params, SeededRng(64), instrument=True)
        assert report.m_errors > 0

    def test_instance_mismatch(self, family_factory):
        """Test size and group_count mismatches are rejected"""
        A = family_factory(6, 8, seed=65)
        B = family_factory(5, 8, seed=66)
        params = derive_ov_params(6, 8, eps_exponent=4, group_size=1, repetitions=2)
        with pytest.raises(InvalidArgumentError, match="sizes differ"):
            ov_decide_report(A, B, params, SeededRng(1))
        with pytest.raises(InvalidArgumentError, match="group_count"):
            ov_decide_report(A, A, self.single, SeededRng(1))
