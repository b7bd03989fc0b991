"""Certified univariate approximants to OR and their elementary-symmetric form"""

import json
import logging
from dataclasses import replace
from fractions import Fraction
from math import comb, factorial
from pathlib import Path
from typing import List, Sequence, Union

from .combinatorics import stirling2_table
from .exceptions import CertificationError, InvalidArgumentError, ResourceLimitError
from .models import CertificationReport, OrPolynomial
from .utils import RationalLike, parse_eps

logger = logging.getLogger(__name__)

DEFAULT_DEGREE_CAP = 64

Poly = List[Fraction]


def _poly_add(a: Poly, b: Poly) -> Poly:
    size = max(len(a), len(b))
    return [
        (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(size)
    ]


def _poly_mul(a: Poly, b: Poly) -> Poly:
    result = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                result[i + j] += x * y
    return result


def chebyshev_coeffs(D: int) -> List[int]:
    """Integer power-basis coefficients of T_D via T_D = 2x T_{D-1} - T_{D-2}"""
    prev, cur = [1], [0, 1]
    if D == 0:
        return prev
    for _ in range(D - 1):
        shifted = [0] + [2 * c for c in cur]
        prev, cur = cur, [
            s - (prev[i] if i < len(prev) else 0) for i, s in enumerate(shifted)
        ]
    return cur


def choose_degree(d: int, eps: RationalLike) -> int:
    """
    Smallest D with T_D((d+1)/(d-1)) >= 1/eps (D = 1 when d = 1).

    Args:
        d: Number of OR inputs (positive)
        eps: Target deviation, 0 < eps < 1

    Returns:
        The Chebyshev degree; may exceed d for small d and eps
    """
    eps = parse_eps(eps)
    if d < 1:
        raise InvalidArgumentError(f"d must be positive, got {d}")
    if d == 1:
        return 1
    x0 = Fraction(d + 1, d - 1)
    target = 1 / eps
    prev, cur, degree = Fraction(1), x0, 1
    while cur < target:
        prev, cur = cur, 2 * x0 * cur - prev
        degree += 1
    return degree


def _exact_indicator_coeffs(d: int) -> Poly:
    # prod_{i=1}^{d} (1 - t/i): 1 at t = 0, 0 on 1..d
    coeffs: Poly = [Fraction(1)]
    for i in range(1, d + 1):
        coeffs = _poly_mul(coeffs, [Fraction(1), Fraction(-1, i)])
    return coeffs


def _chebyshev_quotient_coeffs(d: int, D: int) -> Poly:
    # T_D(m(t)) / T_D(m(0)) with m(t) = (d + 1 - 2t) / (d - 1)
    alpha = Fraction(d + 1, d - 1)
    beta = Fraction(-2, d - 1)
    cheb = chebyshev_coeffs(D)
    composed: Poly = [Fraction(cheb[-1])]
    for c in reversed(cheb[:-1]):
        composed = _poly_add(_poly_mul(composed, [alpha, beta]), [Fraction(c)])
    scale = composed[0]  # T_D(alpha)
    return [c / scale for c in composed]


def power_to_elementary(power_coeffs: Sequence[Fraction], d: int, D: int) -> List[Fraction]:
    """
    Change of basis so that q(sum z_i) = sum_j c_j e_j(z) on z in {0,1}^d.

    Uses s^k = sum_j S2(k, j) j! e_j(z); c_j = sum_{k>=j} a_k S2(k, j) j!.

    Raises:
        InvalidArgumentError: If D > d or the coefficient list is longer than D + 1
    """
    if D > d:
        raise InvalidArgumentError(f"degree {D} exceeds dimension {d}")
    if len(power_coeffs) > D + 1:
        raise InvalidArgumentError(f"{len(power_coeffs)} coefficients for degree {D}")
    a = [Fraction(c) for c in power_coeffs] + [Fraction(0)] * (D + 1 - len(power_coeffs))
    stirling = stirling2_table(D)
    return [
        sum((a[k] * stirling[k][j] for k in range(j, D + 1)), Fraction(0)) * factorial(j)
        for j in range(D + 1)
    ]


def eval_univariate(p: OrPolynomial, t: int) -> Fraction:
    """Exact Horner evaluation of q at t"""
    result = Fraction(0)
    for coeff in reversed(p.power_coeffs):
        result = result * t + coeff
    return result


def eval_symmetric(p: OrPolynomial, weight: int) -> Fraction:
    """sum_j c_j e_j(z) for any z of the given popcount (e_j(z) = C(weight, j))"""
    return sum(
        (c * comb(weight, j) for j, c in enumerate(p.elem_coeffs)), Fraction(0)
    )


def verify_or_polynomial(p: OrPolynomial) -> CertificationReport:
    """
    Evaluate q exactly at every integer in [0, d] and report the deviation.

    The report certifies when q(0) = 1, max_{1<=t<=d} |q(t)| <= eps and the
    stored elementary coefficients match the power coefficients.
    """
    value_at_zero = eval_univariate(p, 0)
    worst_t, max_deviation = None, Fraction(0)
    for t in range(1, p.dim + 1):
        deviation = abs(eval_univariate(p, t))
        if worst_t is None or deviation > max_deviation:
            worst_t, max_deviation = t, deviation
    basis_ok = p.degree <= p.dim and len(p.elem_coeffs) == p.degree + 1
    if basis_ok:
        basis_ok = list(p.elem_coeffs) == power_to_elementary(
            p.power_coeffs, p.dim, p.degree
        )
    certified = value_at_zero == 1 and max_deviation <= p.eps and basis_ok
    return CertificationReport(
        dim=p.dim,
        eps=p.eps,
        value_at_zero=value_at_zero,
        max_deviation=max_deviation,
        worst_t=worst_t,
        certified=certified,
    )


def certify(p: OrPolynomial) -> OrPolynomial:
    """Return p with its certified flag set from verify_or_polynomial"""
    return replace(p, certified=verify_or_polynomial(p).certified)


def build_or_polynomial(
    d: int, eps: RationalLike, degree_cap: int = DEFAULT_DEGREE_CAP
) -> OrPolynomial:
    """
    Build and certify q with q(0) = 1 and |q(t)| <= eps for t = 1..d.

    For d >= 2 and a Chebyshev degree below d this is the scaled quotient
    T_D(m(t)) / T_D(m(0)); otherwise the exact degree-d indicator
    prod_{i<=d} (1 - t/i), which for d = 1 is 1 - t.

    Args:
        d: Number of OR inputs
        eps: Target deviation in (0, 1)
        degree_cap: Largest degree allowed

    Returns:
        A certified OrPolynomial

    Raises:
        ResourceLimitError: If the degree exceeds degree_cap
        CertificationError: If exact evaluation finds a violation
    """
    eps = parse_eps(eps)
    if d < 1:
        raise InvalidArgumentError(f"d must be positive, got {d}")
    degree = choose_degree(d, eps)
    if degree >= d:
        degree = d
        power = _exact_indicator_coeffs(d)
    else:
        power = _chebyshev_quotient_coeffs(d, degree)
    if degree > degree_cap:
        raise ResourceLimitError(f"degree {degree} exceeds the cap {degree_cap}")

    logger.debug("OR polynomial for d=%d eps=%s has degree %d", d, eps, degree)
    polynomial = OrPolynomial(
        dim=d,
        eps=eps,
        degree=degree,
        power_coeffs=tuple(power),
        elem_coeffs=tuple(power_to_elementary(power, d, degree)),
    )
    report = verify_or_polynomial(polynomial)
    if not report.certified:
        raise CertificationError(
            f"q violates the eps={eps} bound at t={report.worst_t}", t=report.worst_t
        )
    return replace(polynomial, certified=True)


def save_polynomial(p: OrPolynomial, path: Union[str, Path]) -> None:
    """Write the polynomial's JSON document"""
    Path(path).write_text(json.dumps(p.to_dict(), indent=2, sort_keys=True) + "\n")


def load_polynomial(path: Union[str, Path]) -> OrPolynomial:
    """Read a polynomial document and re-certify it by exact evaluation"""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise InvalidArgumentError(f"{path}: not a JSON document ({e})")
    return certify(OrPolynomial.from_dict(data))
