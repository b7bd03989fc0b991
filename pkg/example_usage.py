#!/usr/bin/env python3
"""
Example usage of the ov-approx toolkit.
Shows the counting, decision and Max-IP operations on small generated instances.
"""

from dotenv import load_dotenv

from ovapprox import OVToolkit, ResourceLimitError
from ovapprox.datasets import generate_instance
from ovapprox.oracle import brute_count_ov, brute_max_ip

# Load OVAPPROX_* settings from .env if present
load_dotenv()


def main():
    """Example usage of the ov-approx toolkit"""

    toolkit = OVToolkit()
    print(f"Using {toolkit!r}")

    # Example 1: A certified OR polynomial
    print("Example 1: Building an OR polynomial for d = 24, eps = 1/100")
    q = toolkit.polynomials.build(24, "1/100")
    report = toolkit.polynomials.verify(q)
    print(f"Degree {q.degree}, max |q(t)| = {float(report.max_deviation):.5f} at t = {report.worst_t}")

    # Example 2: Deterministic approximate #OV
    print("\nExample 2: Counting orthogonal pairs")
    (A, B), _ = generate_instance("uniform", n=128, d=12, seed=toolkit.seed)
    estimate = toolkit.counting.count_ov(A, B, "1/20")
    print(f"Estimate {float(estimate.value):.1f} +/- {float(estimate.error_bound):.1f}")
    print(f"Exact    {brute_count_ov(A, B)}")

    # Example 3: Deciding OV on a planted instance
    print("\nExample 3: Deciding whether an orthogonal pair exists")
    (A, B), sidecar = generate_instance("planted-orthogonal", n=64, d=16, seed=toolkit.seed)
    decision = toolkit.decision.decide(A, B)
    print(f"Answer {decision.answer}, planted pair at {sidecar.get('witness')}")
    print(f"Largest group counter {decision.max_counter} of {decision.params.repetitions}")

    # Example 4: 2-approximate maximum inner product
    print("\nExample 4: Bracketing the maximum inner product")
    (A, B), _ = generate_instance("planted-ip", n=16, d=32, seed=toolkit.seed, p="1/8", w=8)
    try:
        result = toolkit.maxip.approximate(A, B, "1/20")
        low, high = result.bracket
        print(f"Max inner product in [{low}, {high}], exact {brute_max_ip(A, B)}")
    except ResourceLimitError as e:
        print(f"Proof lists too large for this instance: {e}")


if __name__ == "__main__":
    main()
