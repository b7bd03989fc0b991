"""Randomized OV decision by grouping, random GF(2) signs and low-rank products"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from math import isqrt
from typing import Optional, Tuple

import numpy as np

from .combinatorics import cumulative_binomial
from .exceptions import InvalidArgumentError
from .f2poly import DEFAULT_MONOMIAL_CAP, eval_disj_poly, f2_matmul, phi_matrix, sample_disj_poly
from .models import DisjProbPoly, F2Matrix, OvDecideParams, OvDecisionReport, VectorFamily
from .rng import SeededRng
from .utils import RationalLike, to_rational

logger = logging.getLogger(__name__)

MAX_EPS_EXPONENT = 20
UNION_BOUND = Fraction(1, 100)


def default_group_size(eps_exponent: int) -> int:
    """m = floor(sqrt(1/eps) / 10), at least 1"""
    return max(1, isqrt(2**eps_exponent // 100))


def default_repetitions(n: int) -> int:
    """T = ceil(1000 ln n)"""
    return max(1, math.ceil(1000 * math.log(n)))


def choose_eps_exponent(n: int, d: int) -> int:
    """Largest L with C(d, <=L) <= n^0.1, clamped to [1, 20]"""
    best = 1
    for L in range(1, min(d, MAX_EPS_EXPONENT) + 1):
        if cumulative_binomial(d, L) ** 10 <= n:
            best = L
        else:
            break
    return best


def validate_params(params: OvDecideParams) -> OvDecideParams:
    """
    Check the structural and union-bound conditions of a parameter set.

    Raises:
        InvalidArgumentError: If a field is out of range, or m > 1 and
            eps * m^2 > 1/100
    """
    if not 1 <= params.eps_exponent <= MAX_EPS_EXPONENT:
        raise InvalidArgumentError(
            f"eps_exponent must lie in [1, {MAX_EPS_EXPONENT}], got {params.eps_exponent}"
        )
    if params.group_size < 1 or params.group_count < 1 or params.repetitions < 1:
        raise InvalidArgumentError("group_size, group_count and repetitions must be >= 1")
    if not 0 < params.accept_fraction < 1:
        raise InvalidArgumentError(
            f"accept_fraction must lie in (0, 1), got {params.accept_fraction}"
        )
    if params.rank_cap < 1:
        raise InvalidArgumentError("rank_cap must be >= 1")
    m = params.group_size
    if m > 1 and params.eps * m * m > UNION_BOUND:
        raise InvalidArgumentError(
            f"eps * m^2 = {params.eps * m * m} exceeds 1/100 (L={params.eps_exponent}, m={m})"
        )
    if m == 1 and params.eps / 4 > UNION_BOUND:
        logger.warning(
            "Single-vector groups with eps=%s give a per-pair false accept rate of %s",
            params.eps, params.eps / 4,
        )
    return params


def derive_ov_params(
    n: int,
    d: int,
    eps_exponent: Optional[int] = None,
    group_size: Optional[int] = None,
    repetitions: Optional[int] = None,
    accept_fraction: RationalLike = Fraction(3, 20),
    rank_cap: int = DEFAULT_MONOMIAL_CAP,
) -> OvDecideParams:
    """
    Fill in OV decision parameters for n vectors of dimension d.

    Args:
        n: Family size (at least 2)
        d: Dimension
        eps_exponent: Override for L (eps = 2^-L)
        group_size: Override for m
        repetitions: Override for T
        accept_fraction: Counter threshold as a fraction of T
        rank_cap: Largest admissible polynomial rank

    Returns:
        Validated OvDecideParams

    Raises:
        InvalidArgumentError: If n < 2, d < 1 or the overrides break validation

    Examples:
        >>> derive_ov_params(1024, 16).eps_exponent
        1
    """
    if n < 2:
        raise InvalidArgumentError(f"n must be >= 2, got {n}")
    if d < 1:
        raise InvalidArgumentError(f"d must be >= 1, got {d}")

    L = choose_eps_exponent(n, d) if eps_exponent is None else eps_exponent
    m = default_group_size(L) if group_size is None else group_size
    if m < 1:
        raise InvalidArgumentError(f"group_size must be >= 1, got {m}")
    params = OvDecideParams(
        eps_exponent=L,
        group_size=m,
        group_count=-(-n // m),
        repetitions=default_repetitions(n) if repetitions is None else repetitions,
        accept_fraction=to_rational(accept_fraction),
        rank_cap=rank_cap,
    )
    return validate_params(params)


def _group_sums(phi: np.ndarray, weights: np.ndarray, m: int, groups: int) -> np.ndarray:
    # XOR of the feature rows of each group, row k scaled by weights[k]
    n, rank = phi.shape
    padded = np.zeros((groups * m, rank), dtype=np.uint8)
    padded[:n] = phi
    slot_weights = np.asarray(weights, dtype=np.uint8).reshape(1, m, 1)
    stacked = padded.reshape(groups, m, rank) & slot_weights
    return (stacked.sum(axis=1) % 2).astype(bool)


def group_test_bits(
    A: VectorFamily,
    B: VectorFamily,
    poly: DisjProbPoly,
    u: np.ndarray,
    v: np.ndarray,
    m: int,
    threads: int = 1,
) -> np.ndarray:
    """
    All U_i·V_j bits of one repetition.

    U_i = sum_k phi_x(A_{i,k}) u_k and V_j = sum_l phi_y(B_{j,l}) v_l over
    GF(2); the g x g table comes from one packed GF(2) product.

    Returns:
        bool array of shape (ceil(|A|/m), ceil(|B|/m))
    """
    u, v = np.asarray(u, dtype=bool), np.asarray(v, dtype=bool)
    if len(u) != m or len(v) != m:
        raise InvalidArgumentError(f"sign vectors must have length m={m}")
    groups_a, groups_b = -(-len(A) // m), -(-len(B) // m)
    U = _group_sums(phi_matrix(poly, A), u, m, groups_a)
    V = _group_sums(phi_matrix(poly, B), v, m, groups_b)
    product = f2_matmul(F2Matrix.from_bool(U), F2Matrix.from_bool(V.T), threads=threads)
    return product.to_bool()


def direct_group_test_bits(
    A: VectorFamily,
    B: VectorFamily,
    poly: DisjProbPoly,
    u: np.ndarray,
    v: np.ndarray,
    m: int,
) -> np.ndarray:
    """sum_{k,l} M((A_i)_k, (B_j)_l) u_k v_l over GF(2), pair by pair"""
    groups_a, groups_b = -(-len(A) // m), -(-len(B) // m)
    out = np.zeros((groups_a, groups_b), dtype=bool)
    for i in range(groups_a):
        for j in range(groups_b):
            acc = 0
            for k in range(m):
                a = i * m + k
                if a >= len(A) or not u[k]:
                    continue
                for l in range(m):
                    b = j * m + l
                    if b >= len(B) or not v[l]:
                        continue
                    acc ^= eval_disj_poly(poly, A[a] & B[b])
            out[i, j] = bool(acc)
    return out


def _polynomial_errors(A: VectorFamily, B: VectorFamily, poly: DisjProbPoly) -> int:
    # pairs where the sampled M disagrees with DISJ
    phi_a = phi_matrix(poly, A).astype(np.float64)
    phi_b = phi_matrix(poly, B).astype(np.float64)
    sampled = (phi_a @ phi_b.T).astype(np.int64) % 2 == 1
    disjoint = A.to_bool().astype(np.int64) @ B.to_bool().astype(np.int64).T == 0
    return int(np.count_nonzero(sampled != disjoint))


def _check_instance(A: VectorFamily, B: VectorFamily, params: OvDecideParams):
    if A.dim != B.dim:
        raise InvalidArgumentError(f"dimension mismatch: {A.dim} != {B.dim}")
    if len(A) != len(B):
        raise InvalidArgumentError(f"family sizes differ: {len(A)} != {len(B)}")
    if params.group_count != -(-len(A) // params.group_size):
        raise InvalidArgumentError(
            f"group_count {params.group_count} does not match n={len(A)}, m={params.group_size}"
        )


def ov_decide_report(
    A: VectorFamily,
    B: VectorFamily,
    params: OvDecideParams,
    rng: SeededRng,
    threads: int = 1,
    instrument: bool = False,
) -> OvDecisionReport:
    """
    Decide whether A x B holds an orthogonal pair, keeping every statistic.

    Each repetition draws its polynomial and sign vectors from
    rng.derive(("rep", t)), so the outcome is independent of threads.

    Args:
        A: First family
        B: Second family, same size and dimension
        params: Validated parameters (see derive_ov_params)
        rng: Root stream
        threads: Worker count for repetitions
        instrument: Count pairs where a sampled polynomial disagrees with DISJ

    Returns:
        OvDecisionReport with answer = max counter > accept_fraction * T

    Raises:
        InvalidArgumentError: If the instance does not match params
        ResourceLimitError: If a sampled polynomial exceeds params.rank_cap
    """
    validate_params(params)
    _check_instance(A, B, params)
    m, T = params.group_size, params.repetitions

    def run(t: int) -> Tuple[np.ndarray, int, int]:
        stream = rng.derive(("rep", t))
        poly = sample_disj_poly(A.dim, params.eps_exponent, stream, cap=params.rank_cap)
        u, v = stream.bits(m), stream.bits(m)
        bits = group_test_bits(A, B, poly, u, v, m)
        errors = _polynomial_errors(A, B, poly) if instrument else 0
        logger.debug("repetition %d: rank=%d positives=%d", t, poly.rank, int(bits.sum()))
        return bits, poly.rank, errors

    counters = np.zeros((params.group_count, params.group_count), dtype=np.int64)
    total_rank = 0
    m_errors = 0
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(run, range(T))
            for bits, rank, errors in results:
                counters += bits
                total_rank += rank
                m_errors += errors
    else:
        for t in range(T):
            bits, rank, errors = run(t)
            counters += bits
            total_rank += rank
            m_errors += errors

    max_counter = int(counters.max())
    answer = max_counter > params.accept_fraction * T
    logger.info(
        "OV decision over %d repetitions: max counter %d (threshold %s) -> %s",
        T, max_counter, params.accept_fraction * T, answer,
    )
    return OvDecisionReport(
        answer=answer,
        max_counter=max_counter,
        counters=counters,
        params=params,
        seed=rng.seed,
        mean_rank=total_rank / T,
        m_errors=m_errors if instrument else None,
    )


def ov_decide(
    A: VectorFamily,
    B: VectorFamily,
    params: OvDecideParams,
    rng: SeededRng,
    threads: int = 1,
) -> bool:
    """True iff the grouped test finds a group pair above threshold"""
    return ov_decide_report(A, B, params, rng, threads=threads).answer
