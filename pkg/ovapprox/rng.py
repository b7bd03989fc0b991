"""Splittable deterministic randomness and exact-inversion Poisson sampling"""

import hashlib
from bisect import bisect_right
from fractions import Fraction
from functools import lru_cache
from typing import Tuple

import numpy as np

from .exceptions import InvalidArgumentError
from .utils import RationalLike, to_rational

_MASK64 = (1 << 64) - 1

POISSON_MAX_RATE = 30
_CDF_BITS = 128


class SeededRng:
    """
    Counter-based random stream identified by (seed, stream_id).

    Streams are Philox generators keyed by the pair, so identical pairs give
    identical sequences everywhere. derive() hashes a label into a child
    stream id; children of distinct labels are independent streams.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        key = self.seed | (self.stream_id << 64)
        self._bitgen = np.random.Philox(key=key)
        self.generator = np.random.Generator(self._bitgen)

    def derive(self, label: object) -> "SeededRng":
        """Child stream for a label (repetition index, probe tau, name, ...)"""
        digest = hashlib.blake2b(
            f"{self.stream_id}:{label!r}".encode(), digest_size=8
        ).digest()
        return SeededRng(self.seed, int.from_bytes(digest, "little"))

    def raw(self, size: int) -> np.ndarray:
        """size raw uint64 words (platform-independent)"""
        return self._bitgen.random_raw(size).astype(np.uint64)

    def bits(self, size: int) -> np.ndarray:
        """size fair bits as a bool array"""
        words = self.raw(-(-size // 64) or 1)
        as_bytes = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
        return np.unpackbits(as_bytes, bitorder="little")[:size].astype(bool)

    def bernoulli(self, size: int, p: RationalLike) -> np.ndarray:
        """size independent Bernoulli(p) flags, p resolved to 2^-64 granularity"""
        p = to_rational(p)
        if not 0 <= p <= 1:
            raise InvalidArgumentError(f"probability must be in [0, 1], got {p}")
        cut = (p.numerator << 64) // p.denominator
        if cut >= 1 << 64:
            return np.ones(size, dtype=bool)
        return self.raw(size) < np.uint64(cut)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection on raw words"""
        if bound < 1:
            raise InvalidArgumentError(f"bound must be positive, got {bound}")
        limit = ((1 << 64) // bound) * bound
        while True:
            value = int(self.raw(1)[0])
            if value < limit:
                return value % bound

    def integers(self, bound: int, size: int) -> np.ndarray:
        """size integers in [0, bound) by multiply-shift (bias below bound / 2^64)"""
        if bound < 1:
            raise InvalidArgumentError(f"bound must be positive, got {bound}")
        return np.array(
            [(int(w) * bound) >> 64 for w in self.raw(size)], dtype=np.int64
        )

    def permutation(self, n: int) -> Tuple[int, ...]:
        """Uniform permutation of range(n) (Fisher-Yates on below())"""
        items = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return tuple(items)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, stream_id={self.stream_id})"


@lru_cache(maxsize=256)
def _poisson_cdf_table(lam: Fraction) -> Tuple[int, ...]:
    """
    Upper 64 bits of the Poisson(lam) CDF, cut where the tail drops below 2^-64.

    The pmf is carried in 128-bit integer fixed point: p_0 = e^-lam from a
    rational Taylor series, then p_i = p_{i-1} * lam / i.
    """
    one = 1 << _CDF_BITS
    # e^lam as an exact partial sum; remaining terms are far below 2^-128
    exp_sum = Fraction(0)
    term = Fraction(1)
    i = 0
    while True:
        exp_sum += term
        i += 1
        term = term * lam / i
        if i > lam and term * one < 1:
            break
    pmf = (one * exp_sum.denominator) // exp_sum.numerator
    cdf = 0
    table = []
    i = 0
    while True:
        cdf += pmf
        table.append(min(cdf >> (_CDF_BITS - 64), _MASK64))
        if one - cdf < (1 << (_CDF_BITS - 64)) and i > lam:
            break
        i += 1
        pmf = (pmf * lam.numerator) // (lam.denominator * i)
        if pmf == 0 and i > lam:
            break
    return tuple(table)


def _check_rate(lam: RationalLike) -> Fraction:
    lam = to_rational(lam)
    if lam <= 0:
        raise InvalidArgumentError(f"Poisson rate must be positive, got {lam}")
    if lam > POISSON_MAX_RATE:
        raise InvalidArgumentError(
            f"Poisson rate {lam} exceeds the supported maximum {POISSON_MAX_RATE}"
        )
    return lam


def pois_sample_array(lam: RationalLike, size: int, rng: SeededRng) -> np.ndarray:
    """
    size exact-inversion Poisson(lam) draws.

    Args:
        lam: Positive rate, at most POISSON_MAX_RATE
        size: Number of draws
        rng: Stream consumed for one raw word per draw

    Returns:
        int64 array of draws

    Raises:
        InvalidArgumentError: If lam <= 0 or lam > POISSON_MAX_RATE
    """
    lam = _check_rate(lam)
    table = np.array(_poisson_cdf_table(lam), dtype=np.uint64)
    uniforms = rng.raw(size)
    draws = np.searchsorted(table, uniforms, side="right")
    return np.minimum(draws, len(table) - 1).astype(np.int64)


def pois_sample(lam: RationalLike, rng: SeededRng) -> int:
    """One exact-inversion Poisson(lam) draw (see pois_sample_array)"""
    lam = _check_rate(lam)
    table = _poisson_cdf_table(lam)
    u = int(rng.raw(1)[0])
    return min(bisect_right(table, u), len(table) - 1)
