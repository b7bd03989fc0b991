"""Data models for ov-approx"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import InvalidArgumentError
from .utils import (format_rational, pack_bits, popcount_words, rational_to_decimal,
                    to_rational, unpack_bits, word_count)


@dataclass(frozen=True, eq=False)
class BitVector:
    """A packed binary vector in {0,1}^dim"""

    dim: int
    bits: np.ndarray  # uint64 words, little-endian bit order

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgumentError(f"dim must be positive, got {self.dim}")
        bits = np.ascontiguousarray(self.bits, dtype=np.uint64)
        if bits.shape != (word_count(self.dim),):
            raise InvalidArgumentError(
                f"expected {word_count(self.dim)} words for dim {self.dim}, "
                f"got shape {bits.shape}"
            )
        tail = self.dim % 64
        if tail and int(bits[-1]) >> tail:
            raise InvalidArgumentError("bits beyond position dim-1 must be zero")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        """Create a BitVector from a 0/1 sequence"""
        arr = np.asarray(list(bits), dtype=np.uint8)
        if arr.size and arr.max() > 1:
            raise InvalidArgumentError("bits must be 0 or 1")
        return cls(dim=int(arr.size), bits=pack_bits(arr.astype(bool)))

    @classmethod
    def from_support(cls, dim: int, support: Iterable[int]) -> "BitVector":
        """Create a BitVector whose ones sit at the given coordinates"""
        flags = np.zeros(dim, dtype=bool)
        for i in support:
            if not 0 <= i < dim:
                raise InvalidArgumentError(f"coordinate {i} out of range [0, {dim})")
            flags[i] = True
        return cls(dim=dim, bits=pack_bits(flags))

    @classmethod
    def from_string(cls, text: str) -> "BitVector":
        """Create a BitVector from a string such as "0110" (coordinate 0 first)"""
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise InvalidArgumentError(f"not a 0/1 string: {text!r}")
        return cls.from_bits(int(c) for c in text)

    @classmethod
    def zeros(cls, dim: int) -> "BitVector":
        return cls(dim=dim, bits=np.zeros(word_count(dim), dtype=np.uint64))

    @classmethod
    def ones(cls, dim: int) -> "BitVector":
        return cls(dim=dim, bits=pack_bits(np.ones(dim, dtype=bool)))

    def to_bool(self) -> np.ndarray:
        return unpack_bits(self.bits, self.dim)

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.to_bool())

    def support(self) -> Tuple[int, ...]:
        """Sorted coordinates holding a one"""
        return tuple(int(i) for i in np.flatnonzero(self.to_bool()))

    @property
    def popcount(self) -> int:
        return int(popcount_words(self.bits))

    def __and__(self, other: "BitVector") -> "BitVector":
        self._check_dim(other)
        return BitVector(dim=self.dim, bits=self.bits & other.bits)

    def dot(self, other: "BitVector") -> int:
        """Integer inner product <x, y> = |support(x) ∩ support(y)|"""
        self._check_dim(other)
        return int(popcount_words(self.bits & other.bits))

    def contains(self, other: "BitVector") -> bool:
        """Check whether support(other) ⊆ support(self)"""
        self._check_dim(other)
        return not np.any(other.bits & ~self.bits)

    def _check_dim(self, other: "BitVector"):
        if other.dim != self.dim:
            raise InvalidArgumentError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.dim, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"BitVector({self.to_string()!r})"


@dataclass(frozen=True)
class VectorFamily:
    """An ordered multiset of BitVectors sharing one dimension (a problem side)"""

    dim: int
    vectors: Tuple[BitVector, ...]
    sparse_bound: Optional[int] = None  # max popcount in sparse mode

    def __post_init__(self):
        vectors = tuple(self.vectors)
        object.__setattr__(self, "vectors", vectors)
        if self.dim < 1:
            raise InvalidArgumentError(f"dim must be positive, got {self.dim}")
        for index, vector in enumerate(vectors):
            if vector.dim != self.dim:
                raise InvalidArgumentError(
                    f"vector {index} has dim {vector.dim}, family dim is {self.dim}"
                )
        if self.sparse_bound is not None:
            if self.sparse_bound < 1:
                raise InvalidArgumentError("sparse_bound must be positive")
            for index, vector in enumerate(vectors):
                if vector.popcount > self.sparse_bound:
                    raise InvalidArgumentError(
                        f"vector {index} has popcount {vector.popcount} "
                        f"> sparse_bound {self.sparse_bound}"
                    )

    @classmethod
    def from_strings(
        cls, rows: Sequence[str], sparse_bound: Optional[int] = None
    ) -> "VectorFamily":
        """Create a family from 0/1 strings of equal length"""
        vectors = [BitVector.from_string(row) for row in rows]
        if not vectors:
            raise InvalidArgumentError("cannot infer dim from an empty row list")
        return cls(dim=vectors[0].dim, vectors=tuple(vectors), sparse_bound=sparse_bound)

    @classmethod
    def from_bool(
        cls, matrix: np.ndarray, sparse_bound: Optional[int] = None
    ) -> "VectorFamily":
        """Create a family from a boolean (n, dim) matrix"""
        matrix = np.asarray(matrix, dtype=bool)
        if matrix.ndim != 2:
            raise InvalidArgumentError("expected a 2-D (n, dim) matrix")
        words = pack_bits(matrix)
        dim = matrix.shape[1]
        vectors = tuple(BitVector(dim=dim, bits=row) for row in words)
        return cls(dim=dim, vectors=vectors, sparse_bound=sparse_bound)

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __getitem__(self, index: int) -> BitVector:
        return self.vectors[index]

    @property
    def n(self) -> int:
        return len(self.vectors)

    @property
    def is_sparse(self) -> bool:
        return self.sparse_bound is not None

    @property
    def words(self) -> np.ndarray:
        """(n, words) uint64 matrix of the packed members"""
        if not self.vectors:
            return np.zeros((0, word_count(self.dim)), dtype=np.uint64)
        return np.stack([v.bits for v in self.vectors])

    def to_bool(self) -> np.ndarray:
        return unpack_bits(self.words, self.dim)

    def popcounts(self) -> np.ndarray:
        return popcount_words(self.words)

    @property
    def max_weight(self) -> int:
        """Largest member popcount (0 for an empty family)"""
        return int(self.popcounts().max()) if self.vectors else 0

    def column_counts(self) -> np.ndarray:
        """Number of members holding a one at each coordinate"""
        return self.to_bool().sum(axis=0, dtype=np.int64)


@dataclass(frozen=True, order=True)
class SubsetIndex:
    """Size-major / colexicographic index of a subset of [d]"""

    size: int
    colex_rank: int


@dataclass(frozen=True)
class OrPolynomial:
    """Univariate q with q(0)=1 and |q(t)| <= eps on t in [1, dim]"""

    dim: int
    eps: Fraction
    degree: int
    power_coeffs: Tuple[Fraction, ...]  # q(t) = sum a_k t^k
    elem_coeffs: Tuple[Fraction, ...]  # q(sum z) = sum c_j e_j(z)
    certified: bool = False

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "OrPolynomial":
        """Create an OrPolynomial from its JSON document"""
        try:
            return cls(
                dim=int(data["d"]),
                eps=to_rational(data["eps"]),
                degree=int(data["degree"]),
                power_coeffs=tuple(to_rational(c) for c in data["power_coeffs"]),
                elem_coeffs=tuple(to_rational(c) for c in data["elem_coeffs"]),
                certified=bool(data.get("certified", False)),
            )
        except KeyError as e:
            raise InvalidArgumentError(f"polynomial document lacks field {e}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.dim,
            "eps": format_rational(self.eps),
            "degree": self.degree,
            "power_coeffs": [format_rational(c) for c in self.power_coeffs],
            "elem_coeffs": [format_rational(c) for c in self.elem_coeffs],
            "certified": self.certified,
        }


@dataclass(frozen=True)
class CertificationReport:
    """Outcome of evaluating q exactly at every integer point of [0, dim]"""

    dim: int
    eps: Fraction
    value_at_zero: Fraction
    max_deviation: Fraction  # max |q(t)| over 1 <= t <= dim
    worst_t: Optional[int]
    certified: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.dim,
            "eps": format_rational(self.eps),
            "value_at_zero": format_rational(self.value_at_zero),
            "max_deviation": format_rational(self.max_deviation),
            "max_deviation_decimal": rational_to_decimal(self.max_deviation),
            "worst_t": self.worst_t,
            "certified": self.certified,
        }


SketchEntries = Union[np.ndarray, Dict[SubsetIndex, int]]


@dataclass(frozen=True, eq=False)
class Sketch:
    """Additive summary: entry[S] = number of aggregated vectors containing S"""

    dim: int
    degree: int
    backend: str  # "dense" or "sparse"
    count: int
    entries: SketchEntries
    max_weight: int = 0  # largest popcount aggregated

    @property
    def width(self) -> int:
        """Number of stored entries (dense array length or nonzero map size)"""
        if self.backend == "dense":
            return int(self.entries.shape[0])
        return len(self.entries)

    def items(self) -> List[Tuple[int, int]]:
        """(flat rank, value) for every nonzero entry, sorted by rank"""
        from .combinatorics import flat_rank

        if self.backend == "dense":
            nonzero = np.flatnonzero(self.entries)
            return [(int(r), int(self.entries[r])) for r in nonzero]
        return sorted(
            (flat_rank(idx, self.dim), value)
            for idx, value in self.entries.items()
            if value
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sketch):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.degree == other.degree
            and self.count == other.count
            and self.items() == other.items()
        )


@dataclass(frozen=True)
class CountEstimate:
    """Deterministic additive-error estimate E of an orthogonal-tuple count"""

    value: Fraction
    error_bound: Fraction  # eps * prod(n_i)
    eps: Fraction
    arity: int
    degree: int = 0
    sketch_width: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": format_rational(self.value),
            "value_decimal": rational_to_decimal(self.value),
            "error_bound": format_rational(self.error_bound),
            "eps": format_rational(self.eps),
            "arity": self.arity,
            "degree": self.degree,
            "sketch_width": self.sketch_width,
        }


@dataclass(frozen=True)
class SampledCountEstimate:
    """Random-sampling baseline estimate (probabilistic guarantee only)"""

    value: Fraction
    hits: int
    trials: int
    total_pairs: int

    def hoeffding_radius(self, delta: float) -> float:
        """Additive radius (in pairs) holding with probability >= 1 - delta"""
        return self.total_pairs * math.sqrt(math.log(2 / delta) / (2 * self.trials))


@dataclass(frozen=True)
class DisjProbPoly:
    """A sampled GF(2) polynomial prod_l (1 + sum_{i in T_l} z_i), expanded"""

    dim: int
    level: int
    subsets: Tuple[Tuple[int, ...], ...]  # T_1..T_L
    monomials: Tuple[Tuple[int, ...], ...]  # surviving monomials, sorted
    masks: np.ndarray = field(repr=False, compare=False)  # (rank, words) uint64

    @property
    def rank(self) -> int:
        return len(self.monomials)


@dataclass(frozen=True, eq=False)
class F2Matrix:
    """Row-major packed matrix over GF(2)"""

    rows: int
    cols: int
    bits: np.ndarray  # (rows, word_count(cols)) uint64

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=np.uint64)
        if bits.shape != (self.rows, word_count(self.cols)):
            raise InvalidArgumentError(
                f"expected bits of shape {(self.rows, word_count(self.cols))}, "
                f"got {bits.shape}"
            )
        tail = self.cols % 64
        if tail and self.rows and np.any(bits[:, -1] >> np.uint64(tail)):
            raise InvalidArgumentError("bits beyond cols must be zero")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_bool(cls, matrix: np.ndarray) -> "F2Matrix":
        matrix = np.asarray(matrix, dtype=bool)
        if matrix.ndim != 2:
            raise InvalidArgumentError("expected a 2-D matrix")
        rows, cols = matrix.shape
        return cls(rows=rows, cols=cols, bits=pack_bits(matrix))

    @classmethod
    def identity(cls, size: int) -> "F2Matrix":
        return cls.from_bool(np.eye(size, dtype=bool))

    def to_bool(self) -> np.ndarray:
        return unpack_bits(self.bits, self.cols)

    def transpose(self) -> "F2Matrix":
        return F2Matrix.from_bool(self.to_bool().T)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, F2Matrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and bool(np.array_equal(self.bits, other.bits))
        )


@dataclass(frozen=True)
class OvDecideParams:
    """Parameters of the grouped probabilistic-rank OV decision procedure"""

    eps_exponent: int  # L, so eps = 2^-L
    group_size: int  # m
    group_count: int  # g = ceil(n / m)
    repetitions: int  # T
    accept_fraction: Fraction = Fraction(3, 20)
    rank_cap: int = 2**22

    @property
    def eps(self) -> Fraction:
        return Fraction(1, 2**self.eps_exponent)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "L": self.eps_exponent,
            "eps": format_rational(self.eps),
            "group_size": self.group_size,
            "group_count": self.group_count,
            "repetitions": self.repetitions,
            "accept_fraction": format_rational(self.accept_fraction),
            "rank_cap": self.rank_cap,
        }


@dataclass(frozen=True)
class OvDecisionReport:
    """Full outcome of one run of the OV decision procedure"""

    answer: bool
    max_counter: int
    counters: np.ndarray = field(repr=False)  # (g, g) T_{i,j}
    params: OvDecideParams
    seed: int
    mean_rank: float = 0.0
    m_errors: Optional[int] = None  # instrumentation: wrong M entries seen

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "answer": self.answer,
            "max_counter": self.max_counter,
            "T": self.params.repetitions,
            "params": self.params.to_dict(),
            "seed": self.seed,
            "mean_rank": round(self.mean_rank, 3),
        }
        if self.m_errors is not None:
            data["m_errors"] = self.m_errors
        return data


@dataclass(frozen=True)
class GapIpChallenge:
    """Public random challenge of the Poisson Gap-Inner-Product protocol"""

    dim: int
    tau: int
    k: int
    weights: Tuple[int, ...]  # p_i ~ Pois(k / tau)
    threshold: Fraction  # 8k/5 at kappa = 2

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, w in enumerate(self.weights) if w > 0)


@dataclass(frozen=True)
class ProofList:
    """Merlin's enumerated proofs: inclusion-minimal qualifying sets"""

    dim: int
    threshold: Fraction
    proofs: Tuple[Tuple[int, ...], ...]
    weight_sums: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.proofs)

    @property
    def masks(self) -> np.ndarray:
        """(|proofs|, words) packed indicator rows"""
        flags = np.zeros((len(self.proofs), self.dim), dtype=bool)
        for row, proof in enumerate(self.proofs):
            flags[row, list(proof)] = True
        return pack_bits(flags)


@dataclass(frozen=True)
class GroupedAcceptMatrix:
    """Per-group column sums of accept vectors (g x |proofs|)"""

    groups: int
    proofs: int
    group_size: int
    entries: np.ndarray = field(repr=False)  # int64


@dataclass(frozen=True)
class SatisfyingPairReport:
    """Outcome of the satisfying-pair engine"""

    answer: bool
    repetitions: int
    group_size: int
    group_count: int
    best_votes: int  # largest number of positive repetitions of any group pair
    proof_counts: Tuple[int, ...]


@dataclass(frozen=True)
class MaxIpResult:
    """2-approximate Max-IP: v <= Max(A, B) <= 2v with the stated probability"""

    v: int
    calls: int
    per_call_eps: Fraction
    k: int
    probes: Tuple[Tuple[int, bool], ...] = ()

    @property
    def bracket(self) -> Tuple[int, int]:
        return (self.v, 2 * self.v)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "v": self.v,
            "bracket": list(self.bracket),
            "calls": self.calls,
            "per_call_eps": format_rational(self.per_call_eps),
            "k": self.k,
            "probes": [[tau, answer] for tau, answer in self.probes],
        }


@dataclass(frozen=True)
class RunConfig:
    """Effective configuration of one CLI invocation (echoed in its output)"""

    command: str
    inputs: Tuple[str, ...] = ()
    eps: Optional[Fraction] = None
    k_arity: Optional[int] = None
    tau: Optional[int] = None
    seed: int = 0
    reps: Optional[int] = None
    oracle: bool = False
    output_format: str = "json"
    threads: int = 1  # not echoed; results do not depend on it
    caps: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.eps is not None and not 0 < self.eps < 1:
            raise InvalidArgumentError(f"eps must lie in (0, 1), got {self.eps}")
        if self.output_format not in ("json", "csv"):
            raise InvalidArgumentError(f"unknown output format {self.output_format!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "inputs": list(self.inputs),
            "eps": None if self.eps is None else format_rational(self.eps),
            "k_arity": self.k_arity,
            "tau": self.tau,
            "seed": self.seed,
            "reps": self.reps,
            "oracle": self.oracle,
            "format": self.output_format,
            "caps": dict(sorted(self.caps.items())),
        }
