"""Command-line front end.

    solgap decide gap|ergodic|strong INPUT.json [--json]
    solgap certify INPUT.json -o CERT.json
    solgap verify CERT.json
    solgap simulate INPUT.json --heights 50 100 200 [--K 0] [--tol 1e-5]

Exit codes: 0 Gap / Ergodic / StronglyErgodic / verified, 1 NoGap /
NotErgodic / NotStronglyErgodic / not verified, 2 Undecided, 64 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from typing import Sequence

from . import __version__
from .decide import (
    certify,
    decide_ergodicity,
    decide_spectral_gap,
    decide_strong_ergodicity,
    ergodic_certificate,
    gap_certificate,
    verify_certificate,
)
from .koopman import TruncationTooLarge, Truncation, curve_csv, gap_curve
from .solenoid import InputError, load_problem, parse_problem

EXIT_INPUT = 64

EXIT_CODES = {
    "Gap": 0,
    "Ergodic": 0,
    "StronglyErgodic": 0,
    "NoGap": 1,
    "NotErgodic": 1,
    "NotStronglyErgodic": 1,
    "Undecided": 2,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="solgap", description="Spectral gap and ergodicity of affine actions on solenoids.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized probing (default 0)")
    common.add_argument("--bound", type=int, default=10 ** 5, help="group enumeration bound")

    p = sub.add_parser("decide", parents=[common], help="decide one property")
    p.add_argument("property", choices=["gap", "ergodic", "strong"])
    p.add_argument("input")

    p = sub.add_parser("certify", parents=[common], help="decide everything and write certificates")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("verify", parents=[common], help="replay a certificate file")
    p.add_argument("certificate")

    p = sub.add_parser("simulate", parents=[common], help="Koopman gap curve as CSV")
    p.add_argument("input")
    p.add_argument("--heights", type=int, nargs="+", default=[50, 100, 200])
    p.add_argument("--K", type=int, default=0, help="a-power denominator exponent bound")
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--max-iters", type=int, default=20000)
    return parser


def _input_hash(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _emit(args, tag: str, summary: str, extra: dict) -> int:
    if args.json:
        report = {"verdict": tag, "summary": summary, "tool_version": __version__}
        report.update(extra)
        print(json.dumps(report, indent=2))
    else:
        print(summary)
    return EXIT_CODES.get(tag, 2)


def _decide(args) -> int:
    spec, gens = load_problem(args.input)
    start = time.perf_counter()
    if args.property == "ergodic":
        v = decide_ergodicity(spec, gens, args.bound, args.seed)
        cert = ergodic_certificate(spec, gens, v, args.seed)
    else:
        fn = decide_spectral_gap if args.property == "gap" else decide_strong_ergodicity
        v = fn(spec, gens, args.bound, args.seed)
        cert = gap_certificate(spec, gens, v, args.property, args.seed)
    elapsed = time.perf_counter() - start
    extra = {"certificate": cert, "timing_seconds": elapsed, "input_hash": _input_hash(args.input)}
    return _emit(args, v.tag, v.summary(), extra)


def _certify(args) -> int:
    spec, gens = load_problem(args.input)
    bundle = certify(spec, gens, args.bound, args.seed)
    ok = verify_certificate(spec, gens, bundle)
    with open(args.output, "w") as fh:
        json.dump(bundle, fh, indent=2)
    tags = [c["verdict"] for c in bundle["certificates"]]
    if args.json:
        print(json.dumps({"verdicts": tags, "verified": ok, "output": args.output, "tool_version": __version__}, indent=2))
    else:
        print(", ".join(tags) + (" (certificates verified)" if ok else " (certificate replay FAILED)"))
    return 0 if ok else 1


def _verify(args) -> int:
    try:
        with open(args.certificate) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"certificate: cannot read {args.certificate}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"certificate: malformed JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(doc, dict) or "problem" not in doc:
        raise InputError("certificate.problem: missing field")
    try:
        spec, gens = parse_problem(doc["problem"])
    except InputError as exc:
        raise InputError(f"certificate.problem.{exc}") from exc
    ok = verify_certificate(spec, gens, doc)
    if args.json:
        print(json.dumps({"verified": ok, "tool_version": __version__}))
    else:
        print("verified" if ok else "NOT verified")
    return 0 if ok else 1


def _simulate(args) -> int:
    spec, gens = load_problem(args.input)
    if not gens:
        raise InputError("generators: simulation needs at least one generator")
    if any(h < 1 for h in args.heights) or args.K < 0:
        raise InputError("heights: must be positive; K must be nonnegative")
    truncs = [Truncation(h, args.K) for h in sorted(args.heights)]
    try:
        rows = gap_curve(spec, gens, truncs, args.max_iters, args.tol)
    except TruncationTooLarge as exc:
        raise InputError(f"heights: {exc}") from exc
    if args.json:
        out = [{"a": spec.a, "d": spec.d, "H": t.H, "K": e.truncation.K, "lambda": e.lam,
                "iterations": e.iterations, "residual": e.residual, "converged": e.converged} for t, e in rows]
        print(json.dumps({"curve": out, "tool_version": __version__}, indent=2))
    else:
        sys.stdout.write(curve_csv(spec, rows))
    return 0


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"decide": _decide, "certify": _certify, "verify": _verify, "simulate": _simulate}
    try:
        return handlers[args.command](args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
