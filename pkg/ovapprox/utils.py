"""Utility functions for ov-approx: word packing and exact rationals"""

from fractions import Fraction
from typing import Union

import numpy as np

from .exceptions import InvalidArgumentError

WORD_BITS = 64

# popcount of every byte value
_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)

RationalLike = Union[Fraction, int, str, float]


def word_count(n_bits: int) -> int:
    """Number of 64-bit words needed to hold n_bits (at least one)"""
    return max(1, -(-n_bits // WORD_BITS))


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """
    Pack a boolean array along its last axis into little-endian uint64 words.

    Args:
        bits: Array of shape (..., n) with 0/1 or bool entries

    Returns:
        uint64 array of shape (..., word_count(n)); bit j sits in word j // 64
        at position j % 64
    """
    bits = np.asarray(bits, dtype=bool)
    n = bits.shape[-1]
    words = word_count(n)
    padded = np.zeros(bits.shape[:-1] + (words * WORD_BITS,), dtype=bool)
    padded[..., :n] = bits
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, n_bits: int) -> np.ndarray:
    """Inverse of pack_bits: bool array of shape (..., n_bits)"""
    arr = np.ascontiguousarray(words, dtype="<u8")
    as_bytes = arr.view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=-1, bitorder="little")
    return bits[..., :n_bits].astype(bool)


def popcount_words(words: np.ndarray) -> np.ndarray:
    """Popcount summed over the last (word) axis, as int64"""
    arr = np.ascontiguousarray(words, dtype="<u8")
    counts = _POPCOUNT8[arr.view(np.uint8)]
    return counts.sum(axis=-1, dtype=np.int64)


def parity_words(words: np.ndarray) -> np.ndarray:
    """Parity of the popcount over the last (word) axis, as uint8"""
    folded = np.bitwise_xor.reduce(np.asarray(words, dtype=np.uint64), axis=-1)
    for shift in (32, 16, 8, 4, 2, 1):
        folded = folded ^ (folded >> np.uint64(shift))
    return (folded & np.uint64(1)).astype(np.uint8)


def to_rational(value: RationalLike) -> Fraction:
    """
    Convert user input to an exact Fraction.

    Decimal strings ("0.05") and ratio strings ("1/20") convert exactly;
    floats convert through their shortest decimal repr, so 0.1 becomes 1/10.

    Raises:
        InvalidArgumentError: If the value cannot be parsed
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidArgumentError(f"Invalid rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        value = repr(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise InvalidArgumentError(f"Invalid rational: {value!r}")


def parse_eps(value: RationalLike) -> Fraction:
    """Parse an error parameter and check 0 < eps < 1"""
    eps = to_rational(value)
    if not 0 < eps < 1:
        raise InvalidArgumentError(f"eps must lie in (0, 1), got {eps}")
    return eps


def format_rational(value: Fraction) -> str:
    """Exact string form: "p" for integers, "p/q" otherwise"""
    return str(Fraction(value))


def rational_to_decimal(value: Fraction, digits: int = 12) -> str:
    """Rounded decimal rendering for human-facing output"""
    value = Fraction(value)
    scale = 10**digits
    rounded = round(value * scale)
    sign = "-" if rounded < 0 else ""
    whole, frac = divmod(abs(rounded), scale)
    text = f"{sign}{whole}.{frac:0{digits}d}".rstrip("0").rstrip(".")
    return "0" if text in ("", "-0") else text


# elements per temporary (rows x masks x words) block
BLOCK_BUDGET = 1 << 22


def contains_matrix(words: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """
    Subset-containment table between packed rows.

    Args:
        words: (n, w) packed vectors
        masks: (r, w) packed subsets

    Returns:
        bool (n, r) with entry True iff mask r ⊆ support of row n
    """
    n, r = len(words), len(masks)
    result = np.zeros((n, r), dtype=bool)
    if not n or not r:
        return result
    complement = ~np.asarray(words, dtype=np.uint64)
    step = max(1, BLOCK_BUDGET // (r * masks.shape[1]))
    for lo in range(0, n, step):
        block = complement[lo:lo + step, None, :] & masks[None, :, :]
        result[lo:lo + step] = ~np.any(block, axis=2)
    return result
