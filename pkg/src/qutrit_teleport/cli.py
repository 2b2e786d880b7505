"""Command-line front end: ``qutrit-teleport {eigs,sweep,threshold,verify}``."""

from __future__ import annotations

import argparse
import sys

from . import sweep, telefidelity
from .linalg_core import eig_hermitian
from .state_zoo import OutOfRange


def _a_value(text: str) -> float:
    try:
        return sweep.parse_a(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise SystemExit(_fail(f"cannot write {path}: {exc.strerror or exc}", 2))


def _fail(message: str, code: int) -> int:
    print(f"qutrit-teleport: error: {message}", file=sys.stderr)
    return code


def cmd_eigs(args: argparse.Namespace) -> int:
    try:
        report = telefidelity.fidelity_bound(args.a)
    except OutOfRange as exc:
        return _fail(str(exc), 2)
    spectrum = eig_hermitian(telefidelity.rho_tilde(args.a))
    print(f"a = {sweep.fmt(args.a)}")
    print("eigenvalues of rho_tilde (ascending):")
    for value, mult in spectrum.grouped():
        print(f"  {sweep.fmt(value)}  x{mult}")
    print(f"lambda_max = {sweep.fmt(report.lambda_max)}")
    print(f"bound = {sweep.fmt(report.bound)}")
    print(f"classical baseline = {sweep.fmt(telefidelity.CLASSICAL_BASELINE)} (random-basis measure-and-prepare scheme, not proven optimal)")
    print(f"verdict = {report.verdict.value}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = sweep.RunConfig(
        a_min=args.a_min,
        a_max=args.a_max,
        steps=args.steps,
        output_format=args.format,
        output_path=args.out,
    )
    try:
        config.validate()
    except ValueError as exc:
        return _fail(str(exc), 2)
    rows = sweep.sweep_rows(config.grid())
    text = sweep.rows_to_csv(rows) if config.output_format == "csv" else sweep.json_report(config, rows=rows)
    _write(text, config.output_path)
    return 0


def cmd_threshold(args: argparse.Namespace) -> int:
    try:
        a_star = sweep.find_threshold(args.tol)
    except ValueError as exc:
        return _fail(str(exc), 2)
    except sweep.NoSignChange as exc:
        return _fail(str(exc), 1)
    print(sweep.fmt(a_star))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    config = sweep.RunConfig(
        seed=args.seed,
        samples=args.samples,
        output_format=args.format,
        output_path=args.out,
        workers=args.workers,
    )
    try:
        config.validate()
    except ValueError as exc:
        return _fail(str(exc), 2)
    if config.samples < 2:
        return _fail("verify needs at least 2 samples", 2)
    checks = sweep.run_verification(config.samples, config.seed, config.workers)
    if args.format == "json":
        text = sweep.json_report(config, checks=checks)
    else:
        text = sweep.checks_to_text(checks)
    _write(text, config.output_path)
    return 0 if all(c.passed for c in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qutrit-teleport",
        description="Teleportation fidelity bounds for the Horodecki two-qutrit family.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigs", help="spectrum of rho_tilde, bound and verdict at one a")
    p.add_argument("--a", type=_a_value, required=True, help="decimal in [0, 1] or 'sqrt3/2'")
    p.set_defaults(func=cmd_eigs)

    p = sub.add_parser("sweep", help="bound and verdict on a uniform a-grid")
    p.add_argument("--a-min", type=float, default=0.0)
    p.add_argument("--a-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101, help="number of grid points (default 101)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-", help="output file, '-' for stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", help="bisect the a where lambda_max crosses 1/3")
    p.add_argument("--tol", type=float, default=1e-10, help="bracket width, in (0, 1e-3]")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("verify", help="run the invariant and Monte-Carlo check suite")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
