"""
Unit tests for the certified OR polynomials.
"""

import json
import math
from fractions import Fraction
from itertools import combinations, product

import pytest

from ovapprox.exceptions import InvalidArgumentError, ResourceLimitError
from ovapprox.orpoly import (build_or_polynomial, chebyshev_coeffs, choose_degree,
                             eval_symmetric, eval_univariate, load_polynomial,
                             power_to_elementary, save_polynomial, verify_or_polynomial)

DIMENSIONS = [2, 4, 8, 16, 32, 64]
EPSILONS = [Fraction(1, 2), Fraction(1, 10), Fraction(1, 100)]


def chebyshev_at(D, x):
    """T_D(x) by the three-term recurrence"""
    prev, cur = Fraction(1), Fraction(x)
    if D == 0:
        return prev
    for _ in range(D - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def elementary(z, j):
    """e_j(z) as an explicit sum of products"""
    return sum(all(z[i] for i in subset) for subset in combinations(range(len(z)), j))


def elementary_value(coeffs, z):
    return sum(c * elementary(z, j) for j, c in enumerate(coeffs))


class TestChebyshev:
    """Test cases for the Chebyshev helpers"""

    def test_low_degree_coefficients(self):
        """Test T_0..T_3 in the power basis"""
        assert chebyshev_coeffs(0) == [1]
        assert chebyshev_coeffs(1) == [0, 1]
        assert chebyshev_coeffs(2) == [-1, 0, 2]
        assert chebyshev_coeffs(3) == [0, -3, 0, 4]

    def test_choose_degree(self):
        """Test the smallest degree reaching 1/eps"""
        assert choose_degree(1, "1/2") == 1
        assert choose_degree(2, "1/2") == 1  # T_1(3) = 3 >= 2
        assert choose_degree(2, "1/10") == 2  # T_2(3) = 17 >= 10

    def test_degree_grows_with_precision(self):
        """Test smaller eps never lowers the degree"""
        degrees = [choose_degree(32, eps) for eps in EPSILONS]
        assert degrees == sorted(degrees)

    @pytest.mark.parametrize("d", [2, 4, 8, 16, 32])
    @pytest.mark.parametrize("eps", [Fraction(1, 2), Fraction(1, 8), Fraction(1, 32)])
    def test_degree_monotone(self, d, eps):
        """Test halving eps or quadrupling d never lowers the degree"""
        D = choose_degree(d, eps)
        assert choose_degree(d, eps / 2) >= D
        assert choose_degree(4 * d, eps) >= D

    @pytest.mark.parametrize("d", [1, 2, 3, 8, 16, 50, 64, 256, 1000])
    @pytest.mark.parametrize("eps", EPSILONS + [Fraction(1, 32), Fraction(1, 1000)])
    def test_degree_envelope(self, d, eps):
        """Test D <= ceil(sqrt(d) ln(2/eps)) + 1"""
        envelope = math.ceil(math.sqrt(d) * math.log(2 / eps)) + 1
        assert choose_degree(d, eps) <= envelope

    def test_degree_is_smallest(self):
        """Test d = 16, eps = 1/10 stops at the first T_D(17/15) >= 10"""
        x0 = Fraction(17, 15)
        D = choose_degree(16, "1/10")
        assert D == 6
        assert chebyshev_at(D, x0) >= 10
        assert chebyshev_at(D - 1, x0) < 10

    @pytest.mark.parametrize("d", [2, 3, 5, 9, 16, 40])
    @pytest.mark.parametrize("eps", EPSILONS)
    def test_degree_is_smallest_grid(self, d, eps):
        """Test minimality of D against the recurrence on a grid"""
        x0 = Fraction(d + 1, d - 1)
        D = choose_degree(d, eps)
        assert chebyshev_at(D, x0) >= 1 / eps
        assert D == 1 or chebyshev_at(D - 1, x0) < 1 / eps

    def test_coefficients_match_recurrence(self):
        """Test the power coefficients of T_D evaluate like the recurrence"""
        x = Fraction(17, 15)
        for D in range(9):
            coeffs = chebyshev_coeffs(D)
            assert sum(c * x**k for k, c in enumerate(coeffs)) == chebyshev_at(D, x)


class TestBuildOrPolynomial:
    """Test cases for build_or_polynomial"""

    @pytest.mark.parametrize("d", DIMENSIONS)
    @pytest.mark.parametrize("eps", EPSILONS)
    def test_certified_grid(self, d, eps):
        """Test q(0) = 1 and |q(t)| <= eps at every t in 1..d"""
        q = build_or_polynomial(d, eps)
        assert q.certified
        assert q.degree <= d
        assert eval_univariate(q, 0) == 1
        assert all(abs(eval_univariate(q, t)) <= eps for t in range(1, d + 1))

    def test_dimension_one(self):
        """Test the d = 1 polynomial is 1 - t"""
        q = build_or_polynomial(1, "1/10")
        assert q.power_coeffs == (Fraction(1), Fraction(-1))
        assert q.degree == 1

    def test_exact_indicator_fallback(self):
        """Test a degree reaching d falls back to the exact indicator"""
        q = build_or_polynomial(2, "1/10")
        assert q.degree == 2
        assert [eval_univariate(q, t) for t in range(3)] == [1, 0, 0]

    def test_degree_cap(self):
        """Test exceeding the degree cap raises ResourceLimitError"""
        with pytest.raises(ResourceLimitError, match="exceeds the cap"):
            build_or_polynomial(64, "1/100", degree_cap=2)

    def test_invalid_arguments(self):
        """Test a bad dimension or eps is rejected"""
        with pytest.raises(InvalidArgumentError):
            build_or_polynomial(0, "1/2")
        with pytest.raises(InvalidArgumentError):
            build_or_polynomial(4, 1)


class TestElementaryBasis:
    """Test cases for the elementary-symmetric change of basis"""

    @pytest.mark.parametrize("d,eps", [(4, "1/2"), (16, "1/10"), (32, "1/100")])
    def test_symmetric_matches_univariate(self, d, eps):
        """Test sum c_j C(w, j) equals q(w) for every weight"""
        q = build_or_polynomial(d, eps)
        for w in range(d + 1):
            assert eval_symmetric(q, w) == eval_univariate(q, w)

    def test_monomial_t_squared(self):
        """Test t^2 = e_1 + 2 e_2"""
        assert power_to_elementary([0, 0, 1], 3, 2) == [0, 1, 2]

    def test_monomial_s_cubed(self):
        """Test s^3 = e_1 + 6 e_2 + 6 e_3 on every z in {0,1}^4"""
        coeffs = power_to_elementary([0, 0, 0, 1], 4, 3)
        assert coeffs == [0, 1, 6, 6]
        for z in product([0, 1], repeat=4):
            assert elementary_value(coeffs, z) == sum(z) ** 3

    @pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
    def test_exhaustive_identity(self, d, rng):
        """Test random power polynomials against explicit e_j sums on all of {0,1}^d"""
        for rep in range(5):
            stream = rng.derive((d, rep))
            D = 1 + stream.below(d)
            power = [Fraction(stream.below(21) - 10, 1 + stream.below(4)) for _ in range(D + 1)]
            coeffs = power_to_elementary(power, d, D)
            for z in product([0, 1], repeat=d):
                s = sum(z)
                assert elementary_value(coeffs, z) == sum(a * s**k for k, a in enumerate(power))

    @pytest.mark.parametrize("d", [2, 4, 6, 8])
    def test_or_polynomial_on_cube(self, d):
        """Test the certified q matches OR on every point of {0,1}^d up to eps"""
        q = build_or_polynomial(d, "1/10")
        for z in product([0, 1], repeat=d):
            value = elementary_value(q.elem_coeffs, z)
            if any(z):
                assert abs(value) <= Fraction(1, 10)
            else:
                assert value == 1

    def test_degree_above_dimension(self):
        """Test a degree larger than d is rejected"""
        with pytest.raises(InvalidArgumentError):
            power_to_elementary([1, 1, 1], 1, 2)


class TestPolynomialDocuments:
    """Test cases for saving, loading and re-verifying polynomials"""

    def setup_method(self):
        """Set up a polynomial for each test"""
        self.q = build_or_polynomial(16, "1/10")

    def test_save_load(self, tmp_path):
        """Test a saved document loads back certified and equal"""
        path = tmp_path / "q.json"
        save_polynomial(self.q, path)
        loaded = load_polynomial(path)
        assert loaded == self.q
        assert loaded.certified

    def test_tampered_document_is_not_certified(self, tmp_path):
        """Test a changed coefficient clears the certified flag"""
        data = self.q.to_dict()
        data["power_coeffs"][1] = str(Fraction(data["power_coeffs"][1]) + 1)
        path = tmp_path / "q.json"
        path.write_text(json.dumps(data))
        loaded = load_polynomial(path)
        report = verify_or_polynomial(loaded)
        assert not loaded.certified
        assert not report.certified
        assert report.value_at_zero == 1
        assert report.max_deviation > Fraction(1, 10)

    def test_tampered_constant_term(self, tmp_path):
        """Test changing q(0) is reported at zero"""
        data = self.q.to_dict()
        data["power_coeffs"][0] = "2"
        path = tmp_path / "q.json"
        path.write_text(json.dumps(data))
        loaded = load_polynomial(path)
        assert not loaded.certified
        assert verify_or_polynomial(loaded).value_at_zero == 2

    def test_not_json(self, tmp_path):
        """Test a non-JSON file raises InvalidArgumentError"""
        path = tmp_path / "q.json"
        path.write_text("degree: 3")
        with pytest.raises(InvalidArgumentError, match="not a JSON document"):
            load_polynomial(path)

    def test_report_fields(self):
        """Test the report names the worst point and deviation"""
        report = verify_or_polynomial(self.q)
        assert report.certified
        assert 1 <= report.worst_t <= 16
        assert report.max_deviation == abs(eval_univariate(self.q, report.worst_t))
        assert report.to_dict()["certified"] is True
