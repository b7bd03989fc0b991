"""Combinatorics tables and size-major / colexicographic subset ranking"""

from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Iterator, List, Sequence, Tuple

from .exceptions import InvalidArgumentError
from .models import SubsetIndex


def binomial_table(d: int, D: int) -> List[int]:
    """
    Row of binomial coefficients C(d, j) for j = 0..D.

    Args:
        d: Ground-set size (positive)
        D: Largest subset size, D <= d

    Returns:
        Exact integers [C(d, 0), ..., C(d, D)]
    """
    if d < 1 or not 0 <= D <= d:
        raise InvalidArgumentError(f"need d >= 1 and 0 <= D <= d, got d={d}, D={D}")
    return [comb(d, j) for j in range(D + 1)]


def cumulative_binomial(d: int, D: int) -> int:
    """C(d, <=D) = sum_{j<=D} C(d, j); D is clipped to d"""
    return sum(comb(d, j) for j in range(min(D, d) + 1))


def stirling2_table(D: int) -> List[List[int]]:
    """
    Stirling numbers of the second kind S2(k, j) for 0 <= j <= k <= D.

    Row k holds [S2(k, 0), ..., S2(k, k)], built from
    S2(k, j) = j * S2(k-1, j) + S2(k-1, j-1).
    """
    if D < 0:
        raise InvalidArgumentError(f"D must be non-negative, got {D}")
    rows = [[1]]
    for k in range(1, D + 1):
        prev = rows[-1]
        row = [0] * (k + 1)
        for j in range(1, k + 1):
            left = prev[j] if j < k else 0
            row[j] = j * left + prev[j - 1]
        rows.append(row)
    return rows


def falling_factorial(x: int, j: int) -> int:
    """x (x-1) ... (x-j+1)"""
    result = 1
    for i in range(j):
        result *= x - i
    return result


@lru_cache(maxsize=64)
def _colex_table(d: int) -> Tuple[Tuple[int, ...], ...]:
    # table[c][i] = C(c, i) for c < d, i <= d
    return tuple(tuple(comb(c, i) for i in range(d + 1)) for c in range(d))


@lru_cache(maxsize=64)
def size_offsets(d: int) -> Tuple[int, ...]:
    """offsets[j] = C(d, <j): first flat rank of the size-j class (length d + 2)"""
    offsets = [0]
    for j in range(d + 1):
        offsets.append(offsets[-1] + comb(d, j))
    return tuple(offsets)


def _validate_subset(subset: Sequence[int], d: int):
    previous = -1
    for coordinate in subset:
        if not isinstance(coordinate, int) or not 0 <= coordinate < d:
            raise InvalidArgumentError(f"coordinate {coordinate!r} out of range [0, {d})")
        if coordinate <= previous:
            raise InvalidArgumentError(f"subset must be strictly increasing: {subset}")
        previous = coordinate


def subset_rank(subset: Sequence[int], d: int) -> SubsetIndex:
    """
    Rank a subset of [d] colexicographically within its size class.

    Args:
        subset: Strictly increasing coordinates in [0, d)
        d: Ground-set size

    Returns:
        SubsetIndex(size, colex_rank) with colex_rank = sum_i C(s_i, i + 1)

    Raises:
        InvalidArgumentError: On out-of-range or unsorted coordinates
    """
    subset = [int(c) for c in subset]
    _validate_subset(subset, d)
    table = _colex_table(d)
    return SubsetIndex(
        size=len(subset), colex_rank=sum(table[c][i + 1] for i, c in enumerate(subset))
    )


def subset_unrank(index: SubsetIndex, d: int) -> Tuple[int, ...]:
    """Inverse of subset_rank"""
    size, rank = index.size, index.colex_rank
    if not 0 <= size <= d or not 0 <= rank < comb(d, size):
        raise InvalidArgumentError(f"{index} is not a subset index for d={d}")
    result = []
    c = d - 1
    for i in range(size, 0, -1):
        while comb(c, i) > rank:
            c -= 1
        result.append(c)
        rank -= comb(c, i)
        c -= 1
    return tuple(reversed(result))


def flat_rank(index: SubsetIndex, d: int) -> int:
    """Size-major flat rank: C(d, <size) + colex_rank"""
    return size_offsets(d)[index.size] + index.colex_rank


def flat_unrank(rank: int, d: int) -> SubsetIndex:
    """Inverse of flat_rank"""
    offsets = size_offsets(d)
    if not 0 <= rank < offsets[-1]:
        raise InvalidArgumentError(f"flat rank {rank} out of range for d={d}")
    size = 0
    while offsets[size + 1] <= rank:
        size += 1
    return SubsetIndex(size=size, colex_rank=rank - offsets[size])


def subsets_upto(support: Sequence[int], D: int) -> Iterator[Tuple[int, ...]]:
    """All subsets of a sorted support with at most D elements, size-major"""
    for size in range(min(D, len(support)) + 1):
        yield from combinations(support, size)


def flat_ranks_of_subsets(support: Sequence[int], d: int, D: int) -> List[int]:
    """Flat ranks of every subset of `support` with size <= D (unvalidated, fast path)"""
    table = _colex_table(d)
    offsets = size_offsets(d)
    ranks = []
    for subset in subsets_upto(support, D):
        ranks.append(
            offsets[len(subset)] + sum(table[c][i + 1] for i, c in enumerate(subset))
        )
    return ranks


def iter_subset_indices(d: int, D: int) -> Iterable[SubsetIndex]:
    """Every SubsetIndex with size <= D, in flat-rank order"""
    for size in range(min(D, d) + 1):
        for rank in range(comb(d, size)):
            yield SubsetIndex(size=size, colex_rank=rank)


def subset_indices_upto(support: Sequence[int], d: int, D: int) -> List[SubsetIndex]:
    """SubsetIndex of every subset of `support` with size <= D (unvalidated, fast path)"""
    table = _colex_table(d)
    return [
        SubsetIndex(len(subset), sum(table[c][i + 1] for i, c in enumerate(subset)))
        for subset in subsets_upto(support, D)
    ]
