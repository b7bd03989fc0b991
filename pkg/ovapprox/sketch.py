"""Additive subset sketches and deterministic additive-error OV counting"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import reduce
from itertools import product
from math import comb, prod
from typing import List, Optional, Sequence

import numpy as np

from .combinatorics import (cumulative_binomial, flat_ranks_of_subsets,
                            size_offsets, subset_indices_upto)
from .exceptions import InvalidArgumentError, ResourceLimitError
from .models import (BitVector, CountEstimate, OrPolynomial, SampledCountEstimate,
                     Sketch, VectorFamily)
from .orpoly import DEFAULT_DEGREE_CAP, build_or_polynomial, eval_univariate
from .rng import SeededRng
from .utils import RationalLike, parse_eps, popcount_words

logger = logging.getLogger(__name__)

DEFAULT_DENSE_CAP = 2**26
BACKENDS = ("dense", "sparse", "auto")

_INT64_SAFE = 2**62


def _resolve_backend(dim: int, degree: int, backend: str, dense_cap: int) -> str:
    if backend not in BACKENDS:
        raise InvalidArgumentError(f"unknown sketch backend {backend!r}")
    width = cumulative_binomial(dim, degree)
    if backend == "auto":
        if width <= dense_cap:
            return "dense"
        logger.info("C(%d, <=%d) = %d exceeds dense cap; using sparse", dim, degree, width)
        return "sparse"
    if backend == "dense" and width > dense_cap:
        raise ResourceLimitError(
            f"dense sketch needs C({dim}, <={degree}) = {width} entries "
            f"(cap {dense_cap})"
        )
    return backend


def _check_degree(dim: int, degree: int):
    if not 0 <= degree <= dim:
        raise InvalidArgumentError(f"degree must lie in [0, {dim}], got {degree}")


def empty_sketch(dim: int, degree: int, backend: str = "dense",
                 dense_cap: int = DEFAULT_DENSE_CAP) -> Sketch:
    """The additive identity: a sketch of the empty family"""
    _check_degree(dim, degree)
    backend = _resolve_backend(dim, degree, backend, dense_cap)
    if backend == "dense":
        entries = np.zeros(cumulative_binomial(dim, degree), dtype=np.int64)
    else:
        entries = {}
    return Sketch(dim=dim, degree=degree, backend=backend, count=0, entries=entries)


def sketch_vector(x: BitVector, degree: int, backend: str = "dense",
                  dense_cap: int = DEFAULT_DENSE_CAP) -> Sketch:
    """
    Sketch of a single vector: entry[S] = 1 iff S ⊆ support(x) and |S| <= degree.

    Only subsets of the support are enumerated.
    """
    _check_degree(x.dim, degree)
    backend = _resolve_backend(x.dim, degree, backend, dense_cap)
    support = x.support()
    if backend == "dense":
        entries = np.zeros(cumulative_binomial(x.dim, degree), dtype=np.int64)
        entries[flat_ranks_of_subsets(support, x.dim, degree)] = 1
    else:
        entries = {idx: 1 for idx in subset_indices_upto(support, x.dim, degree)}
    return Sketch(
        dim=x.dim, degree=degree, backend=backend, count=1, entries=entries,
        max_weight=len(support),
    )


def merge_sketches(a: Sketch, b: Sketch) -> Sketch:
    """
    Pointwise sum: the sketch of the multiset union of the two families.

    Raises:
        InvalidArgumentError: If dim, degree or backend differ
    """
    if (a.dim, a.degree, a.backend) != (b.dim, b.degree, b.backend):
        raise InvalidArgumentError(
            f"cannot merge sketches of shape {(a.dim, a.degree, a.backend)} "
            f"and {(b.dim, b.degree, b.backend)}"
        )
    if a.backend == "dense":
        entries = a.entries + b.entries
    else:
        entries = dict(Counter(a.entries) + Counter(b.entries))
    return Sketch(
        dim=a.dim, degree=a.degree, backend=a.backend, count=a.count + b.count,
        entries=entries, max_weight=max(a.max_weight, b.max_weight),
    )


def _sketch_chunk(vectors: Sequence[BitVector], dim: int, degree: int,
                  backend: str) -> Sketch:
    max_weight = 0
    if backend == "dense":
        ranks: List[int] = []
        for x in vectors:
            support = x.support()
            max_weight = max(max_weight, len(support))
            ranks.extend(flat_ranks_of_subsets(support, dim, degree))
        entries = np.bincount(
            np.asarray(ranks, dtype=np.int64),
            minlength=cumulative_binomial(dim, degree),
        ).astype(np.int64)
    else:
        counter: Counter = Counter()
        for x in vectors:
            support = x.support()
            max_weight = max(max_weight, len(support))
            counter.update(subset_indices_upto(support, dim, degree))
        entries = dict(counter)
    return Sketch(
        dim=dim, degree=degree, backend=backend, count=len(vectors),
        entries=entries, max_weight=max_weight,
    )


def sketch_family(X: VectorFamily, degree: int, backend: str = "dense",
                  dense_cap: int = DEFAULT_DENSE_CAP, threads: int = 1) -> Sketch:
    """
    Sketch of a family: entry[S] = number of members containing S.

    Equal to folding merge_sketches over sketch_vector of each member; with
    threads > 1 the members are split into chunks sketched concurrently.
    """
    _check_degree(X.dim, degree)
    backend = _resolve_backend(X.dim, degree, backend, dense_cap)
    vectors = list(X.vectors)
    if threads <= 1 or len(vectors) < 2 * threads:
        return _sketch_chunk(vectors, X.dim, degree, backend)
    step = -(-len(vectors) // threads)
    chunks = [vectors[i:i + step] for i in range(0, len(vectors), step)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: _sketch_chunk(c, X.dim, degree, backend), chunks))
    return reduce(merge_sketches, parts)


def _class_sum_dense(sketches: Sequence[Sketch], size: int) -> int:
    offsets = size_offsets(sketches[0].dim)
    lo, hi = offsets[size], offsets[size + 1]
    bound = prod(s.count for s in sketches) * comb(sketches[0].dim, size)
    dtype = np.int64 if bound < _INT64_SAFE else object
    slices = [s.entries[lo:hi].astype(dtype) for s in sketches]
    return int(reduce(np.multiply, slices).sum())


def _class_sums_sparse(sketches: Sequence[Sketch]) -> List[int]:
    sums = [0] * (sketches[0].degree + 1)
    smallest = min(sketches, key=lambda s: len(s.entries))
    for idx, value in smallest.entries.items():
        term = value
        for other in sketches:
            if other is not smallest:
                term *= other.entries.get(idx, 0)
                if not term:
                    break
        sums[idx.size] += term
    return sums


def estimate_tuple_count(sketches: Sequence[Sketch], p: OrPolynomial,
                         threads: int = 1) -> CountEstimate:
    """
    E = sum_j c_j * sum_{|S|=j} prod_i sketch_i[S], computed exactly.

    Args:
        sketches: One sketch per family, sharing dim, degree and backend
        p: Certified polynomial of the same degree whose certified range covers
           every possible tuple inner product
        threads: Worker count for the per-size-class reduction (dense backend)

    Returns:
        CountEstimate with error_bound = p.eps * prod(count_i)

    Raises:
        InvalidArgumentError: On an uncertified polynomial or mismatched shapes
    """
    if not sketches:
        raise InvalidArgumentError("need at least one sketch")
    if not p.certified:
        raise InvalidArgumentError("polynomial is not certified")
    first = sketches[0]
    for s in sketches[1:]:
        if (s.dim, s.degree, s.backend) != (first.dim, first.degree, first.backend):
            raise InvalidArgumentError("sketches differ in dim, degree or backend")
    if first.degree != p.degree:
        raise InvalidArgumentError(
            f"sketch degree {first.degree} != polynomial degree {p.degree}"
        )
    reach = min(s.max_weight for s in sketches)
    if reach > p.dim:
        raise InvalidArgumentError(
            f"tuple inner products may reach {reach}, polynomial certified only up to {p.dim}"
        )

    if first.backend == "dense":
        sizes = range(p.degree + 1)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                class_sums = list(pool.map(lambda j: _class_sum_dense(sketches, j), sizes))
        else:
            class_sums = [_class_sum_dense(sketches, j) for j in sizes]
    else:
        class_sums = _class_sums_sparse(sketches)

    value = sum((c * s for c, s in zip(p.elem_coeffs, class_sums)), Fraction(0))
    return CountEstimate(
        value=value,
        error_bound=p.eps * prod(s.count for s in sketches),
        eps=p.eps,
        arity=len(sketches),
        degree=p.degree,
        sketch_width=cumulative_binomial(first.dim, p.degree),
    )


def _check_same_dim(families: Sequence[VectorFamily]):
    dims = {f.dim for f in families}
    if len(dims) != 1:
        raise InvalidArgumentError(f"families differ in dimension: {sorted(dims)}")


def count_kov_approx(families: Sequence[VectorFamily], eps: RationalLike,
                     backend: str = "auto", dense_cap: int = DEFAULT_DENSE_CAP,
                     degree_cap: int = DEFAULT_DEGREE_CAP,
                     threads: int = 1) -> CountEstimate:
    """
    Approximate #k-OV with additive error eps * prod(n_i), deterministically.

    Uses (u_1 ∧ ... ∧ u_k)_S = prod_i (u_i)_S, so the k-fold sum of q over
    tuples factors through one sketch per family.
    """
    eps = parse_eps(eps)
    if len(families) < 2:
        raise InvalidArgumentError(f"need k >= 2 families, got {len(families)}")
    _check_same_dim(families)
    dim = families[0].dim
    p = build_or_polynomial(dim, eps, degree_cap=degree_cap)
    resolved = _resolve_backend(dim, p.degree, backend, dense_cap)
    sketches = [sketch_family(f, p.degree, resolved, dense_cap, threads) for f in families]
    return estimate_tuple_count(sketches, p, threads=threads)


def count_ov_approx(A: VectorFamily, B: VectorFamily, eps: RationalLike,
                    backend: str = "auto", dense_cap: int = DEFAULT_DENSE_CAP,
                    degree_cap: int = DEFAULT_DEGREE_CAP,
                    threads: int = 1) -> CountEstimate:
    """Approximate #OV(A, B) with additive error eps * |A| * |B|, deterministically"""
    return count_kov_approx([A, B], eps, backend, dense_cap, degree_cap, threads)


def count_sparse_ov_approx(A: VectorFamily, B: VectorFamily, eps: RationalLike,
                           backend: str = "sparse", dense_cap: int = DEFAULT_DENSE_CAP,
                           degree_cap: int = DEFAULT_DEGREE_CAP,
                           threads: int = 1) -> CountEstimate:
    """
    Approximate #Sparse-OV: vectors in {0,1}^m with popcount <= d.

    The polynomial degree comes from the sparsity d, not the universe m, and
    q is certified on [1, d] only: inner products cannot exceed d.
    """
    eps = parse_eps(eps)
    if not (A.is_sparse and B.is_sparse):
        raise InvalidArgumentError("both families need a sparse_bound")
    _check_same_dim([A, B])
    d = min(A.sparse_bound, B.sparse_bound, A.dim)
    p = build_or_polynomial(d, eps, degree_cap=degree_cap)
    sketches = [sketch_family(f, p.degree, backend, dense_cap, threads) for f in (A, B)]
    return estimate_tuple_count(sketches, p, threads=threads)


def _inner_product_histogram(families: Sequence[VectorFamily]) -> np.ndarray:
    dim = families[0].dim
    if len(families) == 2:
        a = families[0].to_bool().astype(np.int64)
        b = families[1].to_bool().astype(np.int64)
        return np.bincount((a @ b.T).ravel(), minlength=dim + 1)
    words = [f.words for f in families]
    hist = np.zeros(dim + 1, dtype=np.int64)
    for rows in product(*[range(len(w)) for w in words]):
        running = words[0][rows[0]]
        for w, r in zip(words[1:], rows[1:]):
            running = running & w[r]
        hist[int(popcount_words(running))] += 1
    return hist


def direct_poly_count_tuples(families: Sequence[VectorFamily],
                             p: OrPolynomial) -> Fraction:
    """sum over tuples of q(<u_1, ..., u_k>), evaluated tuple by tuple (test oracle)"""
    if not p.certified:
        raise InvalidArgumentError("polynomial is not certified")
    _check_same_dim(families)
    hist = _inner_product_histogram(families)
    return sum(
        (int(count) * eval_univariate(p, t) for t, count in enumerate(hist) if count),
        Fraction(0),
    )


def direct_poly_count(A: VectorFamily, B: VectorFamily, p: OrPolynomial) -> Fraction:
    """
    sum_{(x,y) in A x B} q(<x, y>), pair by pair in O(n^2 d).

    Quadratic: exists to cross-check estimate_tuple_count exactly.
    """
    return direct_poly_count_tuples([A, B], p)


def sample_count_estimate(A: VectorFamily, B: VectorFamily, trials: int,
                          rng: SeededRng) -> SampledCountEstimate:
    """
    Random-sampling baseline: |A||B| times the orthogonal fraction of uniform pairs.

    The guarantee is probabilistic (Hoeffding): with probability >= 1 - delta
    the error is at most SampledCountEstimate.hoeffding_radius(delta).
    """
    if trials < 1:
        raise InvalidArgumentError(f"trials must be positive, got {trials}")
    _check_same_dim([A, B])
    if not len(A) or not len(B):
        raise InvalidArgumentError("families must be non-empty")
    rows = rng.integers(len(A), trials)
    cols = rng.integers(len(B), trials)
    overlap = popcount_words(A.words[rows] & B.words[cols])
    hits = int(np.count_nonzero(overlap == 0))
    total = len(A) * len(B)
    return SampledCountEstimate(
        value=Fraction(total * hits, trials), hits=hits, trials=trials, total_pairs=total,
    )
