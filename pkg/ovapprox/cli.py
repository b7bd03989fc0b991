"""Command-line interface: ov-approx <command> [options]"""

import argparse
import csv
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from .client import OVToolkit
from .config import Settings
from .datasets import MODELS, dump_family, generate_instance, load_family, uniform_family
from .exceptions import (
    CertificationError,
    InvalidArgumentError,
    OVApproxError,
    ResourceLimitError,
)
from .models import RunConfig
from .oracle import brute_count_kov, brute_count_ov, brute_max_ip
from .utils import format_rational, parse_eps, rational_to_decimal, to_rational

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_CERTIFICATION = 4

BENCH_COLUMNS = ("n", "d", "eps", "degree", "sketch_width", "ms")


def _rational(text: str) -> Fraction:
    try:
        return to_rational(text)
    except InvalidArgumentError as e:
        raise argparse.ArgumentTypeError(str(e))


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _rational_list(text: str) -> List[Fraction]:
    return [_rational(part) for part in text.split(",") if part.strip()]


class _Timer:
    """Wall-clock milliseconds, or None when timing is disabled"""

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.start = time.perf_counter()

    def elapsed_ms(self) -> Optional[float]:
        if not self.enabled:
            return None
        return round((time.perf_counter() - self.start) * 1000, 3)


def _emit_json(document: Dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(document, indent=2, sort_keys=True) + "\n")


def _emit_csv(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)


def _run_config(args: argparse.Namespace, toolkit: OVToolkit, **fields: Any) -> RunConfig:
    return RunConfig(
        command=args.command,
        inputs=tuple(str(p) for p in getattr(args, "inputs", ()) or ()),
        seed=toolkit.seed,
        oracle=getattr(args, "oracle", False),
        output_format=getattr(args, "format", "json"),
        threads=toolkit.threads,
        caps={
            "dense": toolkit.settings.dense_cap,
            "proof": toolkit.settings.proof_cap,
            "rank": toolkit.settings.rank_cap,
            "degree": toolkit.settings.degree_cap,
        },
        **fields,
    )


def _load_inputs(paths: Sequence[str], count: Optional[int] = None):
    if count is not None and len(paths) != count:
        raise InvalidArgumentError(f"expected {count} input files, got {len(paths)}")
    return [load_family(path) for path in paths]


def _counting_document(args, toolkit, estimate, families, exact_fn: Callable[[], int]):
    document = {
        "config": _run_config(args, toolkit, eps=estimate.eps, k_arity=len(families)).to_dict(),
        "result": estimate.to_dict(),
    }
    if args.oracle:
        exact = exact_fn()
        deviation = abs(estimate.value - exact)
        document["oracle"] = {
            "exact": str(exact),
            "deviation": format_rational(deviation),
            "deviation_decimal": rational_to_decimal(deviation),
            "within_bound": deviation <= estimate.error_bound,
        }
    return document


def cmd_gen(args, toolkit: OVToolkit) -> int:
    families, sidecar = generate_instance(
        args.model, args.n, args.d, toolkit.seed,
        families=args.families, p=args.p, w=args.w, sparse_bound=args.sparse_bound,
    )
    prefix = Path(args.out)
    paths = []
    for index, family in enumerate(families):
        path = prefix.parent / f"{prefix.name}.{index}.txt"
        dump_family(family, path)
        paths.append(str(path))
    sidecar["files"] = paths
    Path(f"{prefix}.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    _emit_json(sidecar)
    return EXIT_OK


def cmd_count_ov(args, toolkit: OVToolkit) -> int:
    timer = _Timer(not args.no_timing)
    A, B = _load_inputs(args.inputs, 2)
    estimate = toolkit.counting.count_ov(A, B, args.eps, backend=args.backend)
    document = _counting_document(args, toolkit, estimate, [A, B], lambda: brute_count_ov(A, B))
    document["wall_time_ms"] = timer.elapsed_ms()
    _emit_json(document)
    return EXIT_OK


def cmd_count_kov(args, toolkit: OVToolkit) -> int:
    timer = _Timer(not args.no_timing)
    families = _load_inputs(args.inputs)
    estimate = toolkit.counting.count_kov(families, args.eps, backend=args.backend)
    document = _counting_document(args, toolkit, estimate, families,
                                  lambda: brute_count_kov(families))
    document["wall_time_ms"] = timer.elapsed_ms()
    _emit_json(document)
    return EXIT_OK


def cmd_count_sparse_ov(args, toolkit: OVToolkit) -> int:
    timer = _Timer(not args.no_timing)
    A, B = _load_inputs(args.inputs, 2)
    estimate = toolkit.counting.count_sparse_ov(A, B, args.eps, backend=args.backend)
    document = _counting_document(args, toolkit, estimate, [A, B], lambda: brute_count_ov(A, B))
    document["wall_time_ms"] = timer.elapsed_ms()
    _emit_json(document)
    return EXIT_OK


def cmd_decide_ov(args, toolkit: OVToolkit) -> int:
    timer = _Timer(not args.no_timing)
    A, B = _load_inputs(args.inputs, 2)
    overrides = {
        "eps_exponent": args.L,
        "group_size": args.group_size,
        "repetitions": args.reps,
    }
    if args.accept_fraction is not None:
        overrides["accept_fraction"] = args.accept_fraction
    params = toolkit.decision.derive_params(
        len(A), A.dim, **{k: v for k, v in overrides.items() if v is not None}
    )
    report = toolkit.decision.decide(A, B, params)
    document = report.to_dict()
    document["config"] = _run_config(args, toolkit, reps=params.repetitions).to_dict()
    if args.oracle:
        exact = brute_count_ov(A, B)
        document["oracle"] = {"exact_count": str(exact), "exact_answer": exact > 0}
    document["wall_time_ms"] = timer.elapsed_ms()
    _emit_json(document)
    return EXIT_OK


def cmd_maxip(args, toolkit: OVToolkit) -> int:
    timer = _Timer(not args.no_timing)
    A, B = _load_inputs(args.inputs, 2)
    result = toolkit.maxip.approximate(A, B, args.delta)
    document = result.to_dict()
    document["seed"] = toolkit.seed
    document["config"] = _run_config(args, toolkit).to_dict()
    if args.oracle:
        exact = brute_max_ip(A, B)
        document["exact_max"] = exact
        document["within_bracket"] = result.v <= exact <= 2 * result.v
    document["wall_time_ms"] = timer.elapsed_ms()
    _emit_json(document)
    return EXIT_OK


def cmd_calibrate(args, toolkit: OVToolkit) -> int:
    rows = []
    for eps in args.eps:
        parse_eps(eps)
        for tau in args.tau:
            k = toolkit.maxip.calibrate(eps, tau, args.d, trials=args.trials)
            rows.append((format_rational(eps), tau, args.d, k))
    _emit_csv(("eps", "tau", "d", "k"), rows)
    return EXIT_OK


def cmd_verify_poly(args, toolkit: OVToolkit) -> int:
    timer = _Timer(not args.no_timing)
    p = toolkit.polynomials.build(args.d, args.eps)
    report = toolkit.polynomials.verify(p)
    if args.out:
        toolkit.polynomials.save(p, args.out)
    document = report.to_dict()
    document["degree"] = p.degree
    document["config"] = _run_config(args, toolkit, eps=p.eps).to_dict()
    document["wall_time_ms"] = timer.elapsed_ms()
    _emit_json(document)
    return EXIT_OK if report.certified else EXIT_CERTIFICATION


def cmd_bench(args, toolkit: OVToolkit) -> int:
    rows = []
    for n in args.n:
        for d in args.d:
            for eps in args.eps:
                stream = toolkit.rng(f"bench.{n}.{d}")
                A = uniform_family(n, d, stream.derive("A"))
                B = uniform_family(n, d, stream.derive("B"))
                timer = _Timer(not args.no_timing)
                estimate = toolkit.counting.count_ov(A, B, eps)
                ms = timer.elapsed_ms()
                rows.append((
                    n, d, format_rational(eps), estimate.degree, estimate.sketch_width,
                    "" if ms is None else ms,
                ))
                logger.info("bench n=%d d=%d eps=%s done", n, d, eps)
    _emit_csv(BENCH_COLUMNS, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Root seed (default: settings)")
    common.add_argument("--threads", type=int, default=None, help="Worker threads")
    common.add_argument("--log-level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    common.add_argument("--no-timing", action="store_true",
                        help="Emit null wall times so reruns are byte-identical")
    common.add_argument("--proof-cap", type=int, default=None)
    common.add_argument("--rank-cap", type=int, default=None)
    common.add_argument("--dense-cap", type=int, default=None)
    common.add_argument("--degree-cap", type=int, default=None)

    parser = argparse.ArgumentParser(
        prog="ov-approx",
        description="Approximate counting, decision and Max-IP on binary vector families.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", parents=[common], help="Generate a dataset")
    gen.add_argument("--model", choices=MODELS, default="uniform")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--p", type=_rational, default=Fraction(1, 2))
    gen.add_argument("--w", type=int, default=None, help="Planted inner product")
    gen.add_argument("--sparse-bound", type=int, default=None)
    gen.add_argument("--families", type=int, default=2)
    gen.add_argument("--out", required=True, help="Output prefix")
    gen.set_defaults(handler=cmd_gen)

    for name, handler, backend, help_text in (
        ("count-ov", cmd_count_ov, "auto", "Approximate #OV of two families"),
        ("count-kov", cmd_count_kov, "auto", "Approximate #k-OV of k families"),
        ("count-sparse-ov", cmd_count_sparse_ov, "sparse", "Approximate #OV of sparse families"),
    ):
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("inputs", nargs="+")
        sub.add_argument("--eps", type=_rational, required=True)
        sub.add_argument("--backend", choices=["dense", "sparse", "auto"], default=backend)
        sub.add_argument("--oracle", action="store_true", help="Add the brute-force count")
        sub.set_defaults(handler=handler)

    decide = commands.add_parser("decide-ov", parents=[common],
                                 help="Decide whether an orthogonal pair exists")
    decide.add_argument("inputs", nargs=2)
    decide.add_argument("--L", type=int, default=None, help="Polynomial error exponent")
    decide.add_argument("--group-size", type=int, default=None)
    decide.add_argument("--reps", type=int, default=None)
    decide.add_argument("--accept-fraction", type=_rational, default=None)
    decide.add_argument("--oracle", action="store_true")
    decide.set_defaults(handler=cmd_decide_ov)

    maxip = commands.add_parser("maxip", parents=[common], help="2-approximate Max-IP")
    maxip.add_argument("inputs", nargs=2)
    maxip.add_argument("--delta", type=_rational, default=Fraction(1, 20))
    maxip.add_argument("--oracle", action="store_true")
    maxip.set_defaults(handler=cmd_maxip)

    calibrate = commands.add_parser("calibrate", parents=[common],
                                    help="Calibrate the Poisson budget k")
    calibrate.add_argument("--eps", type=_rational_list, required=True)
    calibrate.add_argument("--tau", type=_int_list, required=True)
    calibrate.add_argument("--d", type=int, required=True)
    calibrate.add_argument("--trials", type=int, default=2000)
    calibrate.set_defaults(handler=cmd_calibrate)

    verify = commands.add_parser("verify-poly", parents=[common],
                                 help="Build and certify an OR polynomial")
    verify.add_argument("--d", type=int, required=True)
    verify.add_argument("--eps", type=_rational, required=True)
    verify.add_argument("--out", default=None, help="Write the polynomial JSON here")
    verify.set_defaults(handler=cmd_verify_poly)

    bench = commands.add_parser("bench", parents=[common], help="Time count-ov over a grid")
    bench.add_argument("--n", type=_int_list, default=[64, 128])
    bench.add_argument("--d", type=_int_list, default=[8, 12])
    bench.add_argument("--eps", type=_rational_list, default=[Fraction(1, 10)])
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings.from_env().with_overrides(
            seed=args.seed,
            threads=args.threads,
            log_level=args.log_level,
            proof_cap=args.proof_cap,
            rank_cap=args.rank_cap,
            dense_cap=args.dense_cap,
            degree_cap=args.degree_cap,
        )
        logging.basicConfig(
            level=settings.log_level,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        toolkit = OVToolkit(settings=settings)
        return args.handler(args, toolkit)
    except CertificationError as e:
        logger.error("certification failed at t=%s: %s", e.t, e)
        return EXIT_CERTIFICATION
    except ResourceLimitError as e:
        logger.error("resource limit: %s", e)
        return EXIT_RESOURCE
    except InvalidArgumentError as e:
        logger.error("invalid input: %s", e)
        return EXIT_INPUT
    except OSError as e:
        logger.error("cannot access file: %s", e)
        return EXIT_INPUT
    except OVApproxError as e:
        logger.error("%s", e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
