"""Dataset text format and seeded instance generators"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from .exceptions import DatasetFormatError, InvalidArgumentError
from .models import BitVector, VectorFamily
from .rng import SeededRng
from .utils import RationalLike, format_rational, to_rational

logger = logging.getLogger(__name__)

MODELS = ("uniform", "planted-orthogonal", "planted-ip", "sparse")


def parse_family(text: str) -> VectorFamily:
    """
    Parse the dataset text format.

    The first line is "d n [sparse_bound]"; n lines of exactly d characters
    from {0, 1} follow. Blank trailing lines are ignored.

    Raises:
        DatasetFormatError: On a malformed header, a wrong line count, a line
            of the wrong length or a character outside {0, 1}
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DatasetFormatError("empty dataset")

    header = lines[0].split()
    if len(header) not in (2, 3) or not all(h.isdigit() for h in header):
        raise DatasetFormatError(f"malformed header {lines[0]!r}, expected 'd n [sparse_bound]'")
    d, n = int(header[0]), int(header[1])
    sparse_bound = int(header[2]) if len(header) == 3 else None
    if d < 1:
        raise DatasetFormatError(f"dimension must be positive, got {d}")

    rows = [line.strip() for line in lines[1:]]
    if len(rows) != n:
        raise DatasetFormatError(f"header announces {n} vectors, found {len(rows)}")
    for number, row in enumerate(rows, start=2):
        if len(row) != d:
            raise DatasetFormatError(f"line {number}: expected {d} characters, got {len(row)}")
        if row.strip("01"):
            raise DatasetFormatError(f"line {number}: characters outside {{0, 1}}")

    try:
        vectors = tuple(BitVector.from_string(row) for row in rows)
        return VectorFamily(dim=d, vectors=vectors, sparse_bound=sparse_bound)
    except InvalidArgumentError as e:
        raise DatasetFormatError(str(e))


def format_family(family: VectorFamily) -> str:
    """Render a family in the dataset text format (newline terminated)"""
    header = [str(family.dim), str(len(family))]
    if family.sparse_bound is not None:
        header.append(str(family.sparse_bound))
    return "\n".join([" ".join(header)] + [x.to_string() for x in family]) + "\n"


def load_family(path: Union[str, Path]) -> VectorFamily:
    """Read a dataset file"""
    try:
        text = Path(path).read_text(encoding="ascii")
    except UnicodeDecodeError:
        raise DatasetFormatError(f"{path}: not an ASCII dataset")
    logger.debug("Loaded dataset %s", path)
    return parse_family(text)


def dump_family(family: VectorFamily, path: Union[str, Path]) -> None:
    """Write a dataset file"""
    Path(path).write_text(format_family(family), encoding="ascii")


def uniform_family(n: int, d: int, rng: SeededRng, p: RationalLike = Fraction(1, 2)) -> VectorFamily:
    """n vectors with i.i.d. Bernoulli(p) coordinates"""
    if n < 0 or d < 1:
        raise InvalidArgumentError(f"need n >= 0 and d >= 1, got n={n} d={d}")
    flags = rng.bernoulli(n * d, p).reshape(n, d)
    return VectorFamily.from_bool(flags) if n else VectorFamily(dim=d, vectors=())


def _random_subset(pool: List[int], size: int, rng: SeededRng) -> List[int]:
    order = rng.permutation(len(pool))
    return sorted(pool[i] for i in order[:size])


def planted_orthogonal(
    n: int, d: int, rng: SeededRng, p: RationalLike = Fraction(1, 2)
) -> Tuple[VectorFamily, VectorFamily, Tuple[int, int]]:
    """
    Uniform families with B[j] replaced by a subset of the complement of A[i].

    Returns:
        (A, B, (i, j)) where <A[i], B[j]> = 0
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    A = uniform_family(n, d, rng.derive("A"), p)
    B = uniform_family(n, d, rng.derive("B"), p)
    i, j = rng.below(n), rng.below(n)
    free = A[i].to_bool() == 0
    flags = rng.derive("witness").bernoulli(d, p) & free
    rows = list(B.vectors)
    rows[j] = BitVector.from_bits(flags)
    return A, VectorFamily(dim=d, vectors=tuple(rows)), (i, j)


def planted_ip(
    n: int, d: int, w: int, rng: SeededRng, p: RationalLike = Fraction(1, 2)
) -> Tuple[VectorFamily, VectorFamily, Tuple[int, int]]:
    """
    Uniform families where A[i] and B[j] share a planted support of w coordinates.

    Returns:
        (A, B, (i, j)) where <A[i], B[j]> >= w
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    if not 0 <= w <= d:
        raise InvalidArgumentError(f"planted weight must lie in [0, {d}], got {w}")
    A = uniform_family(n, d, rng.derive("A"), p)
    B = uniform_family(n, d, rng.derive("B"), p)
    i, j = rng.below(n), rng.below(n)
    shared = _random_subset(list(range(d)), w, rng.derive("witness"))
    rows_a, rows_b = list(A.vectors), list(B.vectors)
    for rows, index in ((rows_a, i), (rows_b, j)):
        flags = rows[index].to_bool()
        flags[shared] = True
        rows[index] = BitVector.from_bits(flags)
    return (
        VectorFamily(dim=d, vectors=tuple(rows_a)),
        VectorFamily(dim=d, vectors=tuple(rows_b)),
        (i, j),
    )


def sparse_family(n: int, m: int, bound: int, rng: SeededRng) -> VectorFamily:
    """n vectors of dimension m, each of uniformly random weight in [0, bound]"""
    if n < 0 or m < 1 or not 1 <= bound <= m:
        raise InvalidArgumentError(f"need n >= 0 and 1 <= bound <= m, got n={n} m={m} bound={bound}")
    coords = list(range(m))
    vectors = tuple(
        BitVector.from_support(m, _random_subset(coords, rng.below(bound + 1), rng))
        for _ in range(n)
    )
    return VectorFamily(dim=m, vectors=vectors, sparse_bound=bound)


def generate_instance(
    model: str,
    n: int,
    d: int,
    seed: int,
    families: int = 2,
    p: RationalLike = Fraction(1, 2),
    w: Optional[int] = None,
    sparse_bound: Optional[int] = None,
) -> Tuple[List[VectorFamily], Dict[str, Any]]:
    """
    Generate a reproducible instance and its sidecar record.

    Args:
        model: One of uniform, planted-orthogonal, planted-ip, sparse
        n: Vectors per family
        d: Dimension
        seed: Root seed
        families: Number of families (uniform and sparse only; planted models make 2)
        p: Coordinate density for the uniform-based models
        w: Planted inner product (planted-ip)
        sparse_bound: Weight bound (sparse)

    Returns:
        (families, sidecar) where the sidecar names the model, its parameters
        and the planted witness indices if any

    Raises:
        InvalidArgumentError: On an unknown model or missing/invalid parameters
    """
    if model not in MODELS:
        raise InvalidArgumentError(f"unknown model {model!r}, expected one of {', '.join(MODELS)}")
    if families < 1:
        raise InvalidArgumentError(f"families must be >= 1, got {families}")
    p = to_rational(p)
    if not 0 <= p <= 1:
        raise InvalidArgumentError(f"p must lie in [0, 1], got {p}")
    rng = SeededRng(seed).derive(("gen", model))
    params: Dict[str, Any] = {}
    witness = None

    if model == "uniform":
        params["p"] = format_rational(p)
        out = [uniform_family(n, d, rng.derive(f), p) for f in range(families)]
    elif model == "sparse":
        if sparse_bound is None:
            raise InvalidArgumentError("the sparse model needs sparse_bound")
        params["sparse_bound"] = sparse_bound
        out = [sparse_family(n, d, sparse_bound, rng.derive(f)) for f in range(families)]
    elif model == "planted-orthogonal":
        params["p"] = format_rational(p)
        A, B, witness = planted_orthogonal(n, d, rng, p)
        out = [A, B]
    else:
        if w is None:
            raise InvalidArgumentError("the planted-ip model needs w")
        params.update(p=format_rational(p), w=w)
        A, B, witness = planted_ip(n, d, w, rng, p)
        out = [A, B]

    sidecar = {
        "model": model,
        "n": n,
        "d": d,
        "seed": seed,
        "params": params,
        "families": len(out),
        "witness": list(witness) if witness is not None else None,
    }
    logger.info("Generated %s instance: %d families of %d vectors, d=%d", model, len(out), n, d)
    return out, sidecar
