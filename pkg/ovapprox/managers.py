"""Manager classes grouping the toolkit's operations by problem"""

from pathlib import Path
from typing import Optional, Sequence, Union

from .amsp import (
    DEFAULT_CALIBRATION_TRIALS,
    GapInnerProductProtocol,
    calibrate_k,
    max_ip_approx,
    satisfying_pair_report,
)
from .exceptions import InvalidArgumentError
from .models import (
    CertificationReport,
    CountEstimate,
    MaxIpResult,
    OrPolynomial,
    OvDecideParams,
    OvDecisionReport,
    SampledCountEstimate,
    SatisfyingPairReport,
    VectorFamily,
)
from .orpoly import build_or_polynomial, load_polynomial, save_polynomial, verify_or_polynomial
from .ovdecide import derive_ov_params, ov_decide_report
from .rng import SeededRng
from .sketch import (
    count_kov_approx,
    count_ov_approx,
    count_sparse_ov_approx,
    direct_poly_count_tuples,
    sample_count_estimate,
)
from .utils import RationalLike, parse_eps, to_rational


class BaseManager:
    """Base class for toolkit managers"""

    def __init__(self, client):
        self.client = client

    @property
    def settings(self):
        return self.client.settings

    def _rng(self, label: str) -> SeededRng:
        """Proxy to the client's per-operation stream"""
        return self.client.rng(label)


class PolynomialManager(BaseManager):
    """Manager for certified OR-approximating polynomials"""

    def build(self, d: int, eps: RationalLike) -> OrPolynomial:
        """
        Build a certified polynomial q with q(0) = 1 and |q(t)| <= eps on [1, d].

        Args:
            d: Number of OR inputs (vector dimension)
            eps: Target deviation in (0, 1), e.g. "1/10" or 0.1

        Returns:
            Certified OrPolynomial

        Raises:
            InvalidArgumentError: If d < 1 or eps is outside (0, 1)
            ResourceLimitError: If the degree exceeds the configured degree cap

        Examples:
            q = toolkit.polynomials.build(16, "1/10")
            print(q.degree, q.certified)
        """
        return build_or_polynomial(d, eps, degree_cap=self.settings.degree_cap)

    def verify(self, p: OrPolynomial) -> CertificationReport:
        """Re-evaluate q exactly on 0..d"""
        return verify_or_polynomial(p)

    def save(self, p: OrPolynomial, path: Union[str, Path]) -> None:
        save_polynomial(p, path)

    def load(self, path: Union[str, Path]) -> OrPolynomial:
        """Load a polynomial document; certification is re-checked"""
        return load_polynomial(path)


class CountingManager(BaseManager):
    """Manager for deterministic approximate OV counting"""

    def count_ov(
        self, A: VectorFamily, B: VectorFamily, eps: RationalLike, backend: str = "auto"
    ) -> CountEstimate:
        """
        Approximate the number of orthogonal pairs with additive error eps * |A| * |B|.

        Args:
            A: First family
            B: Second family, same dimension
            eps: Additive error fraction in (0, 1)
            backend: "dense", "sparse" or "auto"

        Returns:
            CountEstimate with an exact rational value

        Raises:
            InvalidArgumentError: On mismatched dimensions or an invalid eps
            ResourceLimitError: If the dense sketch or the degree exceeds its cap

        Examples:
            estimate = toolkit.counting.count_ov(A, B, "1/20")
            print(estimate.value, estimate.error_bound)
        """
        return count_ov_approx(
            A, B, eps, backend=backend,
            dense_cap=self.settings.dense_cap,
            degree_cap=self.settings.degree_cap,
            threads=self.client.threads,
        )

    def count_kov(
        self, families: Sequence[VectorFamily], eps: RationalLike, backend: str = "auto"
    ) -> CountEstimate:
        """
        Approximate #k-OV over k >= 2 families with additive error eps * prod(n_i).

        Examples:
            estimate = toolkit.counting.count_kov([A, B, C], "1/10")
        """
        return count_kov_approx(
            families, eps, backend=backend,
            dense_cap=self.settings.dense_cap,
            degree_cap=self.settings.degree_cap,
            threads=self.client.threads,
        )

    def count_sparse_ov(
        self, A: VectorFamily, B: VectorFamily, eps: RationalLike, backend: str = "sparse"
    ) -> CountEstimate:
        """Approximate #OV for families carrying a sparse_bound"""
        return count_sparse_ov_approx(
            A, B, eps, backend=backend,
            dense_cap=self.settings.dense_cap,
            degree_cap=self.settings.degree_cap,
            threads=self.client.threads,
        )

    def direct(self, families: Sequence[VectorFamily], eps: RationalLike):
        """sum of q over all tuples, evaluated one inner product at a time"""
        if len(families) < 2:
            raise InvalidArgumentError("need at least two families")
        p = build_or_polynomial(families[0].dim, eps, degree_cap=self.settings.degree_cap)
        return direct_poly_count_tuples(families, p)

    def sample(self, A: VectorFamily, B: VectorFamily, trials: int) -> SampledCountEstimate:
        """Random-pair sampling baseline with a Hoeffding error radius"""
        return sample_count_estimate(A, B, trials, self._rng("counting.sample"))


class DecisionManager(BaseManager):
    """Manager for the grouped probabilistic-rank OV decision procedure"""

    def derive_params(self, n: int, d: int, **overrides) -> OvDecideParams:
        """
        Default parameters for n vectors of dimension d.

        Args:
            n: Family size
            d: Dimension
            **overrides: eps_exponent, group_size, repetitions, accept_fraction

        Returns:
            Validated OvDecideParams
        """
        overrides.setdefault("rank_cap", self.settings.rank_cap)
        return derive_ov_params(n, d, **overrides)

    def decide(
        self,
        A: VectorFamily,
        B: VectorFamily,
        params: Optional[OvDecideParams] = None,
        instrument: bool = False,
    ) -> OvDecisionReport:
        """
        Decide whether A x B contains an orthogonal pair.

        Args:
            A: First family
            B: Second family, same size and dimension
            params: Parameters; derived from (n, d) when omitted
            instrument: Count pairs where sampled polynomials err

        Returns:
            OvDecisionReport (report.answer is the decision)

        Raises:
            InvalidArgumentError: On mismatched families or parameters
            ResourceLimitError: If a sampled polynomial exceeds the rank cap

        Examples:
            report = toolkit.decision.decide(A, B)
            if report.answer:
                print("orthogonal pair likely present")
        """
        if params is None:
            params = self.derive_params(len(A), A.dim)
        return ov_decide_report(
            A, B, params, self._rng("decision.decide"),
            threads=self.client.threads, instrument=instrument,
        )


class MaxIPManager(BaseManager):
    """Manager for the Gap-Inner-Product protocol and 2-approximate Max-IP"""

    def calibrate(
        self, eps: RationalLike, tau: int, d: int, trials: int = DEFAULT_CALIBRATION_TRIALS
    ) -> int:
        """Smallest Poisson budget k whose empirical errors are within eps/2"""
        return calibrate_k(eps, tau, d, trials, rng=self._rng(f"maxip.calibrate.{tau}"))

    def satisfying_pair(
        self,
        A: VectorFamily,
        B: VectorFamily,
        eps: RationalLike,
        tau: int,
        reps: Optional[int] = None,
        k: Optional[int] = None,
    ) -> SatisfyingPairReport:
        """
        Gap-Inner-Product satisfying pair: some <a, b> >= 2 tau versus all <a, b> <= tau.

        Args:
            A: First family
            B: Second family, same dimension
            eps: Protocol error
            tau: Gap scale
            reps: Repetitions; defaults to ceil(12 ln n)
            k: Poisson budget; calibrated when omitted

        Returns:
            SatisfyingPairReport

        Raises:
            ProofSpaceOverflowError: If a proof list exceeds the configured cap
        """
        eps = parse_eps(eps)
        if k is None:
            k = self.calibrate(eps, tau, A.dim)
        protocol = GapInnerProductProtocol(A.dim, tau, k, error=eps)
        return satisfying_pair_report(
            A, B, protocol, reps=reps,
            rng=self._rng(f"maxip.pair.{tau}"),
            proof_cap=self.settings.proof_cap,
            threads=self.client.threads,
        )

    def approximate(self, A: VectorFamily, B: VectorFamily, delta: RationalLike) -> MaxIpResult:
        """
        v with v <= Max(A, B) <= 2v, except with probability delta.

        Examples:
            result = toolkit.maxip.approximate(A, B, "1/20")
            low, high = result.bracket
        """
        return max_ip_approx(
            A, B, to_rational(delta),
            rng=self._rng("maxip.approximate"),
            proof_cap=self.settings.proof_cap,
            threads=self.client.threads,
        )
