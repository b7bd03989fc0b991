"""Brute-force reference answers, written with plain Python sets and ints"""

from fractions import Fraction
from itertools import combinations, product
from typing import Callable, FrozenSet, List, Sequence, Tuple

from .exceptions import InvalidArgumentError, ResourceLimitError
from .models import BitVector, VectorFamily
from .utils import RationalLike, to_rational

MAX_PROOF_SUPPORT = 20


def _supports(family: VectorFamily) -> List[FrozenSet[int]]:
    return [frozenset(x.support()) for x in family]


def _check_dims(families: Sequence[VectorFamily]):
    if not families:
        raise InvalidArgumentError("at least one family is required")
    dims = {f.dim for f in families}
    if len(dims) != 1:
        raise InvalidArgumentError(f"families have differing dimensions {sorted(dims)}")


def brute_count_ov(A: VectorFamily, B: VectorFamily) -> int:
    """Number of pairs (a, b) with disjoint supports"""
    _check_dims([A, B])
    right = _supports(B)
    return sum(1 for a in _supports(A) for b in right if not a & b)


def brute_count_kov(families: Sequence[VectorFamily]) -> int:
    """Number of k-tuples whose supports have an empty common intersection"""
    _check_dims(families)
    supports = [_supports(f) for f in families]
    count = 0
    for tuple_ in product(*supports):
        common = tuple_[0]
        for s in tuple_[1:]:
            common = common & s
            if not common:
                break
        if not common:
            count += 1
    return count


def brute_max_ip(A: VectorFamily, B: VectorFamily) -> int:
    """max |supp(a) ∩ supp(b)|, 0 when either family is empty"""
    _check_dims([A, B])
    right = _supports(B)
    return max((len(a & b) for a in _supports(A) for b in right), default=0)


def brute_satisfying_pair(
    A: VectorFamily,
    B: VectorFamily,
    predicate: Callable[[BitVector, BitVector], bool],
) -> bool:
    """True iff predicate(a, b) holds for some pair"""
    _check_dims([A, B])
    return any(predicate(a, b) for a in A for b in B)


def brute_min_proofs(
    weights: Sequence[int], threshold: RationalLike
) -> Tuple[Tuple[int, ...], ...]:
    """
    All inclusion-minimal index sets with weight sum >= threshold.

    Every subset of the positive-weight support is tried; the result is sorted
    lexicographically.

    Raises:
        ResourceLimitError: If the support holds more than 20 coordinates
    """
    threshold = to_rational(threshold)
    support = [i for i, w in enumerate(weights) if w > 0]
    if len(support) > MAX_PROOF_SUPPORT:
        raise ResourceLimitError(
            f"support of {len(support)} exceeds the oracle limit {MAX_PROOF_SUPPORT}"
        )
    qualifying = set()
    for size in range(1, len(support) + 1):
        for subset in combinations(support, size):
            if sum(weights[i] for i in subset) >= threshold:
                qualifying.add(frozenset(subset))
    minimal = [
        s for s in qualifying
        if not any(Fraction(sum(weights[i] for i in s - {j})) >= threshold for j in s)
    ]
    return tuple(sorted(tuple(sorted(s)) for s in minimal))
