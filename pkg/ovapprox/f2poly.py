"""GF(2) probabilistic polynomials for DISJ and their low-rank feature maps"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence, Tuple

import numpy as np

from .exceptions import InvalidArgumentError, ResourceLimitError
from .models import BitVector, DisjProbPoly, F2Matrix, VectorFamily
from .rng import SeededRng
from .utils import BLOCK_BUDGET, contains_matrix, parity_words, unpack_bits, word_count

logger = logging.getLogger(__name__)

DEFAULT_MONOMIAL_CAP = 2**22


def sample_disj_factors(d: int, L: int, rng: SeededRng) -> Tuple[Tuple[int, ...], ...]:
    """L i.i.d. subsets T_l of [d], each coordinate kept with probability 1/2"""
    if d < 1:
        raise InvalidArgumentError(f"d must be positive, got {d}")
    if L < 1:
        raise InvalidArgumentError(f"L must be >= 1, got {L}")
    return tuple(
        tuple(int(i) for i in np.flatnonzero(rng.bits(d))) for _ in range(L)
    )


def _unit_words(d: int, i: int) -> np.ndarray:
    words = np.zeros(word_count(d), dtype=np.uint64)
    words[i // 64] = np.uint64(1) << np.uint64(i % 64)
    return words


def _odd_rows(candidates: np.ndarray) -> np.ndarray:
    # keep rows occurring an odd number of times (XOR cancellation)
    if candidates.shape[1] == 1:
        values, counts = np.unique(candidates[:, 0], return_counts=True)
        return values[counts % 2 == 1].reshape(-1, 1)
    values, counts = np.unique(candidates, axis=0, return_counts=True)
    return values[counts % 2 == 1]


def expand_disj_factors(d: int, subsets: Sequence[Sequence[int]],
                        cap: int = DEFAULT_MONOMIAL_CAP) -> DisjProbPoly:
    """
    Multiply out prod_l (1 + sum_{i in T_l} z_i) over GF(2), multilinearly.

    Factors are applied one at a time; each step forms P + sum_i P * z_i and
    cancels monomials produced an even number of times.

    Raises:
        InvalidArgumentError: If a factor names a coordinate outside [0, d)
        ResourceLimitError: If the monomial set grows past cap
    """
    for subset in subsets:
        bad = [i for i in subset if not 0 <= i < d]
        if bad:
            raise InvalidArgumentError(f"factor coordinates {bad} outside [0, {d})")
    current = np.zeros((1, word_count(d)), dtype=np.uint64)  # {∅}
    for subset in subsets:
        if not subset:
            continue
        parts = [current] + [current | _unit_words(d, i) for i in subset]
        current = _odd_rows(np.concatenate(parts))
        if len(current) > cap:
            raise ResourceLimitError(
                f"{len(current)} monomials exceed the cap {cap} (d={d}, L={len(subsets)})"
            )

    flags = unpack_bits(current, d)
    monomials = [tuple(int(i) for i in np.flatnonzero(row)) for row in flags]
    order = sorted(range(len(monomials)), key=lambda r: (len(monomials[r]), monomials[r]))
    masks = current[order] if order else current[:0]
    masks.setflags(write=False)
    return DisjProbPoly(
        dim=d,
        level=len(subsets),
        subsets=tuple(tuple(s) for s in subsets),
        monomials=tuple(monomials[r] for r in order),
        masks=masks,
    )


def sample_disj_poly(d: int, L: int, rng: SeededRng,
                     cap: int = DEFAULT_MONOMIAL_CAP) -> DisjProbPoly:
    """
    Sample the L-factor GF(2) probabilistic polynomial for DISJ and expand it.

    On z = x ∧ y it equals 1 whenever OR(z) = 0 and equals 1 with probability
    exactly 2^-L over the sample whenever OR(z) = 1.
    """
    return expand_disj_factors(d, sample_disj_factors(d, L, rng), cap)


def _check_dim(p: DisjProbPoly, x: BitVector):
    if x.dim != p.dim:
        raise InvalidArgumentError(f"vector dim {x.dim} != polynomial dim {p.dim}")


def phi_x(p: DisjProbPoly, x: BitVector) -> np.ndarray:
    """Alice's feature map: phi_x(x)[S] = x_S (subset containment), length rank"""
    _check_dim(p, x)
    return contains_matrix(x.bits[None, :], p.masks)[0]


def phi_y(p: DisjProbPoly, y: BitVector) -> np.ndarray:
    """Bob's feature map; identical to phi_x since every monomial has coefficient 1"""
    return phi_x(p, y)


def phi_matrix(p: DisjProbPoly, family: VectorFamily) -> np.ndarray:
    """Stacked feature maps of a whole family, bool (n, rank)"""
    if family.dim != p.dim:
        raise InvalidArgumentError(f"family dim {family.dim} != polynomial dim {p.dim}")
    return contains_matrix(family.words, p.masks)


def eval_disj_poly(p: DisjProbPoly, z: BitVector) -> int:
    """XOR over monomials S of z_S"""
    return int(np.count_nonzero(phi_x(p, z)) % 2)


def eval_factored(p: DisjProbPoly, z: BitVector) -> int:
    """prod_l (1 + parity(|T_l ∩ z|)) from the unexpanded factors"""
    _check_dim(p, z)
    flags = z.to_bool()
    for subset in p.subsets:
        if int(np.count_nonzero(flags[list(subset)])) % 2 == 1:
            return 0
    return 1


def f2_matmul(a: F2Matrix, b: F2Matrix, threads: int = 1) -> F2Matrix:
    """
    Product over GF(2), word-parallel and blocked over rows of a.

    Entry (i, j) is the parity of popcount(a_i & b^T_j).

    Raises:
        InvalidArgumentError: If a.cols != b.rows
    """
    if a.cols != b.rows:
        raise InvalidArgumentError(f"shape mismatch: {a.rows}x{a.cols} @ {b.rows}x{b.cols}")
    bt = b.transpose().bits
    out = np.zeros((a.rows, b.cols), dtype=bool)
    if not a.rows or not b.cols:
        return F2Matrix.from_bool(out)
    step = max(1, BLOCK_BUDGET // max(1, b.cols * bt.shape[1]))

    def run(lo: int):
        block = a.bits[lo:lo + step, None, :] & bt[None, :, :]
        out[lo:lo + step] = parity_words(block).astype(bool)

    starts = range(0, a.rows, step)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, starts))
    else:
        for lo in starts:
            run(lo)
    return F2Matrix.from_bool(out)


def f2_matmul_naive(a: F2Matrix, b: F2Matrix) -> F2Matrix:
    """Triple-loop product over GF(2) (test oracle)"""
    if a.cols != b.rows:
        raise InvalidArgumentError("shape mismatch")
    left, right = a.to_bool(), b.to_bool()
    out = np.zeros((a.rows, b.cols), dtype=bool)
    for i in range(a.rows):
        for j in range(b.cols):
            acc = False
            for k in range(a.cols):
                acc ^= bool(left[i, k] and right[k, j])
            out[i, j] = acc
    return F2Matrix.from_bool(out)
