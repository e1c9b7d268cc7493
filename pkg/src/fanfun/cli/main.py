"""``fanfun`` command line."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ParseError
from ..functionals import Fuel
from .jobs import JOB_KINDS, JobRequest, run_job, verify_certificate

EXIT_OK, EXIT_VERIFY, EXIT_FUEL, EXIT_PARSE = 0, 2, 3, 4

HELP = {
    "cover": "special cover of G by bar search",
    "weakcover": "weak cover of G of measure at least 1 - 2^-k",
    "measure": "exact measure of the cylinders C",
    "eval": "evaluate the Kleene index E on --numbers (and paths gs)",
    "atr": "ATR realiser for order A, formula Gamma and set Z",
    "muc": "uniform-continuity modulus of Y",
    "hbu": "finite subcover of [0, 1] for the gauge Psi",
    "check-structure": "falsify the axioms of a structure code",
    "suffices": "does the path list seq suffice for F at precision k",
    "sample": "empirical sufficiency rate of random sequences for F",
}


def _numbers(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fanfun", description="Fan functionals on associate-coded inputs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in JOB_KINDS:
        p = sub.add_parser(kind, help=HELP[kind])
        p.add_argument("spec", nargs="?", help="spec file ('-' for stdin)")
        p.add_argument("-e", "--expr", action="append", default=[], help="inline spec line (repeatable)")
        p.add_argument("--fuel-depth", type=int, default=32)
        p.add_argument("--fuel-steps", type=int, default=200_000)
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--descent-len", type=int, default=20)
        p.add_argument("--out", help="write the certificate here instead of stdout")
        if kind == "eval":
            p.add_argument("--numbers", type=_numbers, default=(), help="comma-separated numeric arguments")
            p.add_argument("--oracle", choices=("theta", "lambda", "none"), default="theta")
        if kind == "sample":
            p.add_argument("--m", type=int, default=16)
            p.add_argument("--trials", type=int, default=200)
        if kind == "check-structure":
            p.add_argument("--code", help="structure code JSON file")
    v = sub.add_parser("verify", help="re-verify a certificate file")
    v.add_argument("certificate")
    return parser


def _spec_text(args) -> str:
    parts = []
    if args.spec == "-":
        parts.append(sys.stdin.read())
    elif args.spec:
        parts.append(Path(args.spec).read_text())
    parts.extend(args.expr)
    return "\n".join(parts)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        verdict = verify_certificate(Path(args.certificate).read_text())
        print("reproduced" if verdict else f"NOT reproduced: {verdict.reason}")
        return EXIT_OK if verdict else EXIT_VERIFY
    req = JobRequest(
        kind=args.command,
        spec_text=_spec_text(args),
        fuel=Fuel(args.fuel_depth, args.fuel_steps),
        k=args.k,
        seed=args.seed,
        descent_len=args.descent_len,
        numbers=getattr(args, "numbers", ()),
        oracle=getattr(args, "oracle", "theta"),
        m=getattr(args, "m", 16),
        trials=getattr(args, "trials", 200),
        code_json=Path(args.code).read_text() if getattr(args, "code", None) else None,
    )
    try:
        result = run_job(req)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_PARSE
    text = result.dumps()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return {"ok": EXIT_OK, "verification": EXIT_VERIFY, "fuel": EXIT_FUEL}[result.status]


if __name__ == "__main__":
    sys.exit(main())
