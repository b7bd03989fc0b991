"""Arthur-Merlin protocols, the satisfying-pair engine and 2-approximate Max-IP"""

import logging
import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction
from math import isqrt
from typing import List, Optional, Tuple

import numpy as np

from .exceptions import InvalidArgumentError, ProofSpaceOverflowError
from .models import (
    BitVector,
    GapIpChallenge,
    GroupedAcceptMatrix,
    MaxIpResult,
    ProofList,
    SatisfyingPairReport,
    VectorFamily,
)
from .rng import POISSON_MAX_RATE, SeededRng, pois_sample_array
from .utils import RationalLike, contains_matrix, to_rational

logger = logging.getLogger(__name__)

DEFAULT_PROOF_CAP = 2**20
DEFAULT_REP_CONSTANT = 12
DEFAULT_CALIBRATION_TRIALS = 2000
MAX_IP_PROTOCOL_EPS = Fraction(1, 2)

# DFS nodes visited per admissible proof before giving up
_NODE_BUDGET_FACTOR = 16


def gap_threshold(k: int, kappa: RationalLike = 2) -> Fraction:
    """Acceptance threshold k * (1 + 3(kappa - 1)/5); 8k/5 at kappa = 2"""
    kappa = to_rational(kappa)
    if kappa <= 1:
        raise InvalidArgumentError(f"kappa must exceed 1, got {kappa}")
    return k * (1 + Fraction(3, 5) * (kappa - 1))


def poisson_weights(lam: RationalLike, size: int, rng: SeededRng) -> np.ndarray:
    """
    size Poisson(lam) draws for any positive rate.

    Rates above POISSON_MAX_RATE are drawn as the sum of ceil(lam / 30)
    independent draws at rate lam / ceil(lam / 30).
    """
    lam = to_rational(lam)
    parts = max(1, math.ceil(lam / POISSON_MAX_RATE))
    total = np.zeros(size, dtype=np.int64)
    for _ in range(parts):
        total += pois_sample_array(lam / parts, size, rng)
    return total


def sample_gap_ip_challenge(
    d: int, tau: int, k: int, rng: SeededRng, kappa: RationalLike = 2
) -> GapIpChallenge:
    """
    Public coins of the Gap-Inner-Product protocol: d i.i.d. Pois(k/tau) weights.

    Raises:
        InvalidArgumentError: If d, tau or k is below 1
    """
    if d < 1 or tau < 1 or k < 1:
        raise InvalidArgumentError(f"d, tau and k must be >= 1, got d={d} tau={tau} k={k}")
    weights = poisson_weights(Fraction(k, tau), d, rng)
    return GapIpChallenge(
        dim=d,
        tau=tau,
        k=k,
        weights=tuple(int(w) for w in weights),
        threshold=gap_threshold(k, kappa),
    )


def enumerate_min_proofs(c: GapIpChallenge, cap: int = DEFAULT_PROOF_CAP) -> ProofList:
    """
    Every inclusion-minimal S over the positive-weight support with weight >= threshold.

    Depth-first search in index order with remaining-weight pruning; a branch
    stops as soon as it reaches the threshold, so every emitted set is
    minimal iff dropping its lightest element falls below the threshold.
    Proofs come out in lexicographic order.

    Args:
        c: Challenge
        cap: Largest admissible number of proofs

    Returns:
        ProofList

    Raises:
        InvalidArgumentError: If cap < 1
        ProofSpaceOverflowError: If more than cap proofs exist, or the search
            visits more than 16 * cap partial sets (the node budget), which
            can happen while fewer than cap proofs have been found
    """
    if cap < 1:
        raise InvalidArgumentError(f"cap must be >= 1, got {cap}")
    support = c.support
    weights = [c.weights[i] for i in support]
    suffix = [0] * (len(weights) + 1)
    for pos in range(len(weights) - 1, -1, -1):
        suffix[pos] = suffix[pos + 1] + weights[pos]

    theta = c.threshold
    proofs: List[Tuple[int, ...]] = []
    sums: List[int] = []
    budget = _NODE_BUDGET_FACTOR * cap
    visited = 0

    def dfs(start: int, chosen: List[int], total: int, lightest: int):
        nonlocal visited
        for pos in range(start, len(weights)):
            if total + suffix[pos] < theta:
                return
            visited += 1
            if visited > budget:
                raise ProofSpaceOverflowError(
                    f"proof search exceeded its node budget of {budget} ({_NODE_BUDGET_FACTOR}"
                    f" * cap) after {len(proofs)} of at most {cap} proofs"
                    f" (tau={c.tau}, k={c.k})"
                )
            w = weights[pos]
            reached = total + w
            smallest = min(lightest, w)
            if reached >= theta:
                if reached - smallest < theta:
                    proofs.append(tuple(support[q] for q in chosen + [pos]))
                    sums.append(reached)
                    if len(proofs) > cap:
                        raise ProofSpaceOverflowError(
                            f"more than {cap} minimal proofs (tau={c.tau}, k={c.k})"
                        )
                continue
            dfs(pos + 1, chosen + [pos], reached, smallest)

    dfs(0, [], 0, max(weights, default=0))
    return ProofList(
        dim=c.dim, threshold=theta, proofs=tuple(proofs), weight_sums=tuple(sums)
    )


def accept_vector(x: BitVector, c: GapIpChallenge, proofs: ProofList) -> np.ndarray:
    """Bit j set iff proofs[j] ⊆ support(x), bool of length |proofs|"""
    if x.dim != c.dim or proofs.dim != c.dim:
        raise InvalidArgumentError("dimension mismatch between vector, challenge and proofs")
    return contains_matrix(x.bits[None, :], proofs.masks)[0]


def accept_matrix(family: VectorFamily, proofs: ProofList) -> np.ndarray:
    """Accept vectors of a whole family, bool (n, |proofs|)"""
    if family.dim != proofs.dim:
        raise InvalidArgumentError(f"family dim {family.dim} != proof dim {proofs.dim}")
    return contains_matrix(family.words, proofs.masks)


def grouped_accept_matrix(
    family: VectorFamily, proofs: ProofList, group_size: int
) -> GroupedAcceptMatrix:
    """Column sums of accept vectors over consecutive groups of group_size"""
    if group_size < 1:
        raise InvalidArgumentError(f"group_size must be >= 1, got {group_size}")
    rows = accept_matrix(family, proofs)
    groups = -(-len(family) // group_size)
    padded = np.zeros((groups * group_size, len(proofs)), dtype=np.int64)
    padded[: len(family)] = rows
    entries = padded.reshape(groups, group_size, len(proofs)).sum(axis=1)
    return GroupedAcceptMatrix(
        groups=groups, proofs=len(proofs), group_size=group_size, entries=entries
    )


def simulate_protocol(x: BitVector, y: BitVector, proofs: ProofList) -> bool:
    """Some listed proof lies inside both supports, checked set by set"""
    common = set(x.support()) & set(y.support())
    return any(set(proof) <= common for proof in proofs.proofs)


class AmProtocol(ABC):
    """
    Arthur-Merlin communication protocol with public coins.

    Alice and Bob share a challenge, Merlin names a proof, and each player
    accepts or rejects it from their own input only. A pair is accepted iff
    some proof is accepted by both.
    """

    dim: int

    @property
    @abstractmethod
    def error(self) -> Fraction:
        """Two-sided error bound over the challenge"""

    @abstractmethod
    def sample_challenge(self, rng: SeededRng):
        """Draw the public challenge"""

    @abstractmethod
    def proofs(self, challenge, cap: int = DEFAULT_PROOF_CAP) -> ProofList:
        """Merlin's proof list for a challenge"""

    def accept_matrix(self, family: VectorFamily, challenge, proofs: ProofList) -> np.ndarray:
        return accept_matrix(family, proofs)

    def accepts(self, x: BitVector, y: BitVector, challenge) -> bool:
        """Run the protocol on one pair"""
        return simulate_protocol(x, y, self.proofs(challenge))

    def restrict(self, challenge, coordinates: np.ndarray):
        """Challenge whose proofs avoid coordinates outside the bool mask; identity here"""
        return challenge


class GapInnerProductProtocol(AmProtocol):
    """
    Poisson protocol separating <x, y> >= kappa * tau from <x, y> <= tau.

    Args:
        dim: Vector dimension
        tau: Gap scale
        k: Poisson budget (expected weight of tau coordinates)
        kappa: Gap ratio, 2 for the Max-IP pipeline
        error: Error bound the caller certified k for (e.g. via calibrate_k)
    """

    def __init__(
        self,
        dim: int,
        tau: int,
        k: int,
        kappa: RationalLike = 2,
        error: RationalLike = Fraction(1, 8),
    ):
        if dim < 1 or tau < 1 or k < 1:
            raise InvalidArgumentError(f"dim, tau and k must be >= 1, got {dim}, {tau}, {k}")
        self.dim = dim
        self.tau = tau
        self.k = k
        self.kappa = to_rational(kappa)
        self.threshold = gap_threshold(k, self.kappa)
        self._error = to_rational(error)
        if not 0 < self._error < 1:
            raise InvalidArgumentError(f"error must lie in (0, 1), got {self._error}")

    @property
    def error(self) -> Fraction:
        return self._error

    def sample_challenge(self, rng: SeededRng) -> GapIpChallenge:
        return sample_gap_ip_challenge(self.dim, self.tau, self.k, rng, self.kappa)

    def proofs(self, challenge: GapIpChallenge, cap: int = DEFAULT_PROOF_CAP) -> ProofList:
        return enumerate_min_proofs(challenge, cap)

    def restrict(self, challenge: GapIpChallenge, coordinates: np.ndarray) -> GapIpChallenge:
        """Zero the weights outside coordinates; proofs there cannot be accepted by both sides"""
        weights = tuple(w if keep else 0 for w, keep in zip(challenge.weights, coordinates))
        return replace(challenge, weights=weights)

    def __repr__(self) -> str:
        return (
            f"GapInnerProductProtocol(dim={self.dim}, tau={self.tau}, k={self.k}, "
            f"kappa={self.kappa}, error={self._error})"
        )


def _calibration_errors(
    k: int, tau: int, trials: int, kappa: Fraction, rng: SeededRng
) -> Tuple[int, int]:
    # failures at intersection ceil(kappa * tau) and false accepts at tau
    stream = rng.derive(("calibrate", k))
    lam = Fraction(k, tau)
    theta = gap_threshold(k, kappa)
    yes_size = math.ceil(kappa * tau)
    yes = poisson_weights(lam, trials * yes_size, stream).reshape(trials, yes_size).sum(axis=1)
    no = poisson_weights(lam, trials * tau, stream).reshape(trials, tau).sum(axis=1)
    misses = sum(1 for s in yes.tolist() if s < theta)
    false_hits = sum(1 for s in no.tolist() if s >= theta)
    return misses, false_hits


def calibration_envelope(eps: RationalLike) -> int:
    """ceil(100 ln(1/eps)), a k that always suffices"""
    return max(1, math.ceil(100 * math.log(1 / float(to_rational(eps)))))


def calibrate_k(
    eps: RationalLike,
    tau: int,
    d: int,
    trials: int = DEFAULT_CALIBRATION_TRIALS,
    rng: Optional[SeededRng] = None,
    kappa: RationalLike = 2,
) -> int:
    """
    Smallest Poisson budget k whose Monte-Carlo errors are both at most eps/2.

    Completeness is measured at intersection size kappa * tau and soundness
    at tau; the weight sums are monotone in the intersection size, so these
    extremes bound every promise pair. k doubles from 1 until it passes,
    then a binary search narrows the last doubling step. The result never
    exceeds calibration_envelope(eps).

    Args:
        eps: Target protocol error
        tau: Gap scale
        d: Dimension (kappa * tau must fit)
        trials: Monte-Carlo samples per side (at least 1000)
        rng: Stream; defaults to the fixed seed 0
        kappa: Gap ratio

    Returns:
        Calibrated k

    Raises:
        InvalidArgumentError: If eps is outside (0, 1), trials < 1000 or the
            gap does not fit in d

    Examples:
        >>> calibrate_k("1/8", tau=8, d=128) <= 208
        True
    """
    eps = to_rational(eps)
    kappa = to_rational(kappa)
    if not 0 < eps < 1:
        raise InvalidArgumentError(f"eps must lie in (0, 1), got {eps}")
    if trials < 1000:
        raise InvalidArgumentError(f"trials must be >= 1000, got {trials}")
    if tau < 1 or math.ceil(kappa * tau) > d:
        raise InvalidArgumentError(f"need 1 <= tau and kappa * tau <= d, got tau={tau} d={d}")
    rng = rng or SeededRng(0)
    envelope = calibration_envelope(eps)

    def passes(k: int) -> bool:
        misses, false_hits = _calibration_errors(k, tau, trials, kappa, rng)
        ok = 2 * misses <= eps * trials and 2 * false_hits <= eps * trials
        logger.info(
            "calibrate k=%d: completeness errors %d/%d, soundness errors %d/%d%s",
            k, misses, trials, false_hits, trials, "" if ok else " (fail)",
        )
        return ok

    failing, k = 0, 1
    while k < envelope and not passes(k):
        failing, k = k, 2 * k
    if k >= envelope:
        k = envelope
        if not passes(k):
            return envelope
    passing = k
    while passing - failing > 1:
        mid = (passing + failing) // 2
        if passes(mid):
            passing = mid
        else:
            failing = mid
    return passing


def protocol_group_size(eps: RationalLike) -> int:
    """m = max(1, floor(1 / (10 sqrt(eps))))"""
    eps = to_rational(eps)
    return max(1, isqrt(eps.denominator // (100 * eps.numerator)))


def default_reps(n: int, constant: int = DEFAULT_REP_CONSTANT) -> int:
    """ceil(c ln n), at least 1"""
    return max(1, math.ceil(constant * math.log(max(n, 1))))


def _integer_product(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    # float64 sums are exact below 2^53
    bound = int(left.max(initial=0)) * int(right.max(initial=0)) * max(1, left.shape[1])
    if bound < 2**53:
        return np.rint(left.astype(np.float64) @ right.astype(np.float64).T).astype(np.int64)
    return left.astype(object) @ right.astype(object).T


def satisfying_pair_report(
    A: VectorFamily,
    B: VectorFamily,
    protocol: AmProtocol,
    eps: Optional[RationalLike] = None,
    reps: Optional[int] = None,
    rng: Optional[SeededRng] = None,
    proof_cap: int = DEFAULT_PROOF_CAP,
    threads: int = 1,
) -> SatisfyingPairReport:
    """
    Decide whether some (a, b) in A x B is accepted by the protocol.

    Both families are split into groups of m = floor(1/(10 sqrt(eps)))
    vectors. Per repetition the grouped accept matrices are multiplied and
    group pair (i, j) votes yes iff its entry is positive; the answer is yes
    iff some group pair wins a strict majority of the repetitions.

    Args:
        A: First family
        B: Second family (same dimension)
        protocol: Protocol with error at most eps
        eps: Error bound used for grouping; defaults to protocol.error
        reps: Repetitions; defaults to ceil(12 ln n)
        rng: Root stream, one child per repetition
        proof_cap: Largest admissible proof list
        threads: Worker count for repetitions

    Returns:
        SatisfyingPairReport

    Raises:
        InvalidArgumentError: On a dimension mismatch, reps < 1 or
            eps below the protocol's error
        ProofSpaceOverflowError: If a proof list exceeds proof_cap
    """
    if A.dim != B.dim or A.dim != protocol.dim:
        raise InvalidArgumentError("families and protocol must share one dimension")
    eps = protocol.error if eps is None else to_rational(eps)
    if protocol.error > eps:
        raise InvalidArgumentError(f"protocol error {protocol.error} exceeds eps {eps}")
    n = max(len(A), len(B))
    reps = default_reps(n) if reps is None else reps
    if reps < 1:
        raise InvalidArgumentError(f"reps must be >= 1, got {reps}")
    rng = rng or SeededRng(0)
    m = protocol_group_size(eps)
    groups_a, groups_b = -(-len(A) // m), -(-len(B) // m)
    speedup_bound = (math.sqrt(float(eps)) * max(n, 1)) ** 0.1
    # coordinates set somewhere in A and somewhere in B
    shared = (A.column_counts() > 0) & (B.column_counts() > 0)

    def run(rep: int) -> Tuple[np.ndarray, int]:
        stream = rng.derive(("rep", rep))
        challenge = protocol.restrict(protocol.sample_challenge(stream), shared)
        proofs = protocol.proofs(challenge, proof_cap)
        left = grouped_accept_matrix(A, proofs, m).entries
        right = grouped_accept_matrix(B, proofs, m).entries
        votes = _integer_product(left, right) > 0
        logger.debug("repetition %d: %d proofs, %d positive group pairs",
                     rep, len(proofs), int(votes.sum()))
        return votes, len(proofs)

    tally = np.zeros((groups_a, groups_b), dtype=np.int64)
    proof_counts = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for votes, count in pool.map(run, range(reps)):
                tally += votes
                proof_counts.append(count)
    else:
        for rep in range(reps):
            votes, count = run(rep)
            tally += votes
            proof_counts.append(count)

    if max(proof_counts, default=0) > speedup_bound:
        logger.warning(
            "proof lists of up to %d exceed (sqrt(eps) n)^0.1 = %.3f; "
            "the fast-multiplication running time does not apply",
            max(proof_counts), speedup_bound,
        )
    best = int(tally.max(initial=0))
    return SatisfyingPairReport(
        answer=2 * best > reps,
        repetitions=reps,
        group_size=m,
        group_count=groups_a,
        best_votes=best,
        proof_counts=tuple(proof_counts),
    )


def satisfying_pair(
    A: VectorFamily,
    B: VectorFamily,
    protocol: AmProtocol,
    eps: Optional[RationalLike] = None,
    reps: Optional[int] = None,
    rng: Optional[SeededRng] = None,
    proof_cap: int = DEFAULT_PROOF_CAP,
    threads: int = 1,
) -> bool:
    """Answer of satisfying_pair_report"""
    return satisfying_pair_report(
        A, B, protocol, eps=eps, reps=reps, rng=rng, proof_cap=proof_cap, threads=threads
    ).answer


def has_nonzero_pair(A: VectorFamily, B: VectorFamily) -> bool:
    """sum over pairs of <a, b> = sum_i cntA_i cntB_i, zero iff all pairs orthogonal"""
    counts_a = [int(c) for c in A.column_counts()]
    counts_b = [int(c) for c in B.column_counts()]
    return sum(a * b for a, b in zip(counts_a, counts_b)) > 0


def max_ip_approx(
    A: VectorFamily,
    B: VectorFamily,
    delta: RationalLike,
    rng: Optional[SeededRng] = None,
    protocol_eps: RationalLike = MAX_IP_PROTOCOL_EPS,
    trials: int = DEFAULT_CALIBRATION_TRIALS,
    proof_cap: int = DEFAULT_PROOF_CAP,
    threads: int = 1,
) -> MaxIpResult:
    """
    2-approximate maximum inner product by binary search over the gap scale.

    A yes from the satisfying-pair engine at tau certifies Max > tau and a no
    certifies Max < 2 tau. The search runs over tau in [1, W - 1] where W is
    the smaller of the two largest weights, and returns v = (largest yes) + 1,
    or 1 when no probe says yes. Families with all pairs orthogonal return 0
    exactly.

    Args:
        A: First family
        B: Second family (same dimension)
        delta: Overall failure probability, split evenly across probes
        rng: Root stream
        protocol_eps: Protocol error used for calibration and grouping
        trials: Calibration samples
        proof_cap: Largest admissible proof list per repetition
        threads: Worker count for repetitions

    Returns:
        MaxIpResult with v <= Max(A, B) <= 2v with probability >= 1 - delta

    Raises:
        InvalidArgumentError: On a dimension mismatch or delta outside (0, 1)
        ProofSpaceOverflowError: If a proof list exceeds proof_cap
    """
    if A.dim != B.dim:
        raise InvalidArgumentError(f"dimension mismatch: {A.dim} != {B.dim}")
    delta = to_rational(delta)
    if not 0 < delta < 1:
        raise InvalidArgumentError(f"delta must lie in (0, 1), got {delta}")
    protocol_eps = to_rational(protocol_eps)
    rng = rng or SeededRng(0)
    d = A.dim
    calls = (d - 1).bit_length() + 1
    per_call = delta / calls

    if not len(A) or not len(B) or not has_nonzero_pair(A, B):
        return MaxIpResult(v=0, calls=0, per_call_eps=per_call, k=0)
    weight_cap = min(A.max_weight, B.max_weight, d)
    if weight_cap == 1 or d == 1:
        return MaxIpResult(v=1, calls=0, per_call_eps=per_call, k=0)

    k = calibrate_k(protocol_eps, tau=1, d=d, trials=trials, rng=rng.derive("calibrate"))
    n = max(len(A), len(B))
    groups = -(-n // protocol_group_size(protocol_eps))
    reps = max(
        default_reps(n),
        math.ceil(8 * math.log(groups * groups * calls / float(per_call))),
    )
    logger.info("max-IP search: k=%d, %d repetitions per probe, per-call error %s",
                k, reps, per_call)

    probes = []
    best = 0
    lo, hi = 1, weight_cap - 1
    while lo <= hi:
        tau = (lo + hi) // 2
        protocol = GapInnerProductProtocol(d, tau, k, error=protocol_eps)
        answer = satisfying_pair(
            A, B, protocol, reps=reps, rng=rng.derive(("probe", tau)),
            proof_cap=proof_cap, threads=threads,
        )
        probes.append((tau, answer))
        logger.info("probe tau=%d -> %s", tau, "yes" if answer else "no")
        if answer:
            best, lo = tau, tau + 1
        else:
            hi = tau - 1

    return MaxIpResult(
        v=best + 1, calls=len(probes), per_call_eps=per_call, k=k, probes=tuple(probes)
    )
