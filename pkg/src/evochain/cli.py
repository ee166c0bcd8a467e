"""Command-line frontend.

Every command reads a ChainSpec JSON file (except ``families`` and
``discrepancies``) and writes JSON to stdout, or CSV for ``scan``. Errors are
reported as one JSON line on stderr and mapped to exit codes: 0 success,
2 invalid spec, 3 domain or solver failure, 4 bad usage.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, TextIO

from .chains import FAMILIES, ChainSpec, ck_verify, matrix_at, validate, validated
from .classify import Mode, classify, idempotent_set_at
from .core import AlgebraElement, iterate
from .errors import EvoChainError, SpecError
from .registry import discrepancy_registry
from .scan import PROPERTIES, grid_scan, measure_estimate

EXIT_OK, EXIT_SPEC, EXIT_DOMAIN, EXIT_USAGE = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def dumps(obj: Any) -> str:
    """Compact JSON with floats written to 17 significant digits; non-finite floats become null."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if hasattr(obj, "item"):
        return dumps(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _threads() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="evochain", description="Chains of two-dimensional evolution algebras.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name: str, help: str, spec: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        if spec:
            p.add_argument("--spec", required=True, help="ChainSpec JSON file")
        return p

    def point(p: argparse.ArgumentParser) -> None:
        p.add_argument("--s", type=float, required=True)
        p.add_argument("--t", type=float, required=True)

    def mode(p: argparse.ArgumentParser) -> None:
        p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.DERIVED.value)

    p = cmd("validate", "check a spec on [0, tmax]")
    p.add_argument("--tmax", type=float, required=True)

    p = cmd("ck-check", "verify the chain law on random triples")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)

    p = cmd("classify", "baric status, nilpotents and idempotents at (s, t)")
    point(p)
    mode(p)

    p = cmd("idempotents", "idempotent set at (s, t)")
    point(p)
    mode(p)

    p = cmd("trajectory", "iterate the evolution operator at (s, t)")
    point(p)
    p.add_argument("--x0", required=True, help='start point as "p,q"')
    p.add_argument("--steps", type=int, required=True)

    p = cmd("scan", "property diagram over the time triangle")
    p.add_argument("--property", choices=PROPERTIES, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--threads", type=int, default=None)
    mode(p)

    p = cmd("measure", "Monte Carlo measure of a duration set")
    p.add_argument("--property", choices=PROPERTIES, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=None, help="idempotent count to measure")
    p.add_argument("--threads", type=int, default=None)
    mode(p)

    cmd("families", "list families and their required slots", spec=False)
    cmd("discrepancies", "list known table discrepancies", spec=False)
    return ap


def load_spec(path: str) -> ChainSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read spec file: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec file is not valid JSON: {exc}") from exc
    return ChainSpec.from_dict(data)


def _at(path: str, t: float) -> ChainSpec:
    # Validate on [0, t]; a positive floor keeps t = 0 well defined.
    return validated(load_spec(path), max(t, 1e-9))


def _x0(text: str) -> AlgebraElement:
    try:
        p, q = (float(v) for v in text.split(","))
        return AlgebraElement(p, q)
    except ValueError as exc:
        raise UsageError(f'--x0 must be "p,q" with finite numbers, got {text!r}') from exc


def _workers(n: int | None) -> int:
    if n is not None and n < 1:
        raise UsageError("--threads must be at least 1")
    return n or _threads()


def _dispatch(args: argparse.Namespace, out: TextIO) -> int:
    c = args.command
    if c == "families":
        out.write(dumps([info.to_dict() for info in FAMILIES.values()]) + "\n")
        return EXIT_OK
    if c == "discrepancies":
        out.write(dumps([e.to_dict() for e in discrepancy_registry()]) + "\n")
        return EXIT_OK
    if c == "validate":
        problems = validate(load_spec(args.spec), args.tmax)
        out.write(dumps({"valid": not problems, "violations": [v.to_dict() for v in problems]}) + "\n")
        if problems:
            raise SpecError(f"{len(problems)} violation(s): " + ", ".join(v.kind for v in problems))
        return EXIT_OK
    if c == "ck-check":
        spec = validated(load_spec(args.spec), args.tmax)
        out.write(dumps(ck_verify(spec, args.tmax, args.trials, args.seed).to_dict()) + "\n")
        return EXIT_OK
    if c in ("classify", "idempotents", "trajectory"):
        spec = _at(args.spec, args.t)
        if c == "classify":
            out.write(dumps(classify(spec, args.s, args.t, args.mode).to_dict()) + "\n")
        elif c == "idempotents":
            rep = idempotent_set_at(spec, args.s, args.t, args.mode)
            out.write(
                dumps(
                    {
                        "points": [p.to_dict() for p in rep.points],
                        "D": rep.discriminant,
                        "boundary": rep.boundary,
                        "tabulated": rep.tabulated,
                        "complete": rep.complete,
                        "mode": args.mode,
                    }
                )
                + "\n"
            )
        else:
            if args.steps < 0:
                raise UsageError("--steps must be non-negative")
            traj = iterate(_x0(args.x0), matrix_at(spec, args.s, args.t), args.steps)
            out.write(dumps({"points": [list(p) for p in traj.points], "divergedAt": traj.diverged_at}) + "\n")
        return EXIT_OK
    spec = validated(load_spec(args.spec), args.tmax)
    workers = _workers(args.threads)
    if c == "scan":
        if args.grid < 2:
            raise UsageError("--grid must be at least 2")
        d = grid_scan(spec, args.property, args.tmax, args.grid, args.mode, workers)
        text = d.to_csv() if args.format == "csv" else dumps(d.to_dict()) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            out.write(text)
        return EXIT_OK
    if args.samples < 100:
        raise UsageError("--samples must be at least 100")
    if args.property == "idempotent" and args.count is None:
        raise UsageError("--count is required for the idempotent property")
    est = measure_estimate(spec, args.property, args.tmax, args.samples, args.seed, args.mode, workers, args.count)
    out.write(dumps(est.to_dict()) + "\n")
    return EXIT_OK


def _fail(err: TextIO, kind: str, detail: str, code: int) -> int:
    err.write(dumps({"error": kind, "detail": " ".join(detail.split())}) + "\n")
    return code


def run(argv: list[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return _dispatch(args, out)
    except UsageError as exc:
        return _fail(err, "UsageError", str(exc), EXIT_USAGE)
    except SpecError as exc:
        return _fail(err, exc.kind, str(exc), EXIT_SPEC)
    except EvoChainError as exc:
        return _fail(err, exc.kind, str(exc), EXIT_DOMAIN)
    except ValueError as exc:
        return _fail(err, "UsageError", str(exc), EXIT_USAGE)


def main() -> None:
    sys.exit(run())
