"""fltquad command line.

Exit status: 0 on success, 1 on a usage or data error, 2 when a computed
result disagrees with its expected value (acceptance mismatch).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .curvedata import CurveDataError, find_record, ingest_curves
from .curves import SingularCurve, trace_at
from .quadfield import QuadField, UnsupportedField, split_prime
from .reporting import canonical_json, checksum

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str
    elapsed_s: float
    workers: int
    checksum: str


def _emit(result: dict, args, command: str, config: dict, t0: float, workers: int = 1) -> None:
    manifest = RunManifest(command, config, __version__, round(time.perf_counter() - t0, 3), workers, checksum(result))
    text = json.dumps({"manifest": asdict(manifest), "result": result}, sort_keys=True, indent=2)
    _write(text + "\n", getattr(args, "out", None))


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


_W_ELEM = re.compile(r"(?:([+-]?\d+)(?=[+-]))?([+-]?)(\d*)w")


def parse_element(F: QuadField | None, s: str):
    """'3', '2,-1', '2-w', '-3w' -> QInt (or a rational int when F is None)."""
    s = s.replace(" ", "")
    try:
        if F is None or "w" not in s and "," not in s:
            return int(s) if F is None else F(int(s))
        if "," in s:
            x, y = s.split(",", 1)
            return F(int(x), int(y))
    except ValueError:
        raise UsageError(f"cannot parse element {s!r}") from None
    m = _W_ELEM.fullmatch(s)
    if not m:
        raise UsageError(f"cannot parse element {s!r}")
    x = int(m.group(1)) if m.group(1) else 0
    y = int(m.group(3)) if m.group(3) else 1
    return F(x, -y if m.group(2) == "-" else y)


def _field(d: int) -> QuadField:
    try:
        return QuadField(d)
    except (ValueError, UnsupportedField) as exc:
        raise UsageError(str(exc)) from None


def _config(d: int, r: int):
    from .sieve import SieveConfig, UnsupportedConfig

    try:
        return SieveConfig(d, r)
    except UnsupportedConfig as exc:
        raise UsageError(str(exc)) from None


def _jobs(args) -> int:
    from .sieve import default_jobs

    if args.jobs is not None:
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        return args.jobs
    try:
        return default_jobs()
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# commands


def cmd_sieve(args) -> int:
    from .sieve import eliminated_classes

    t0 = time.perf_counter()
    cfg = _config(args.field, args.zeta)
    jobs = _jobs(args)
    rep = eliminated_classes(cfg, jobs=jobs, swap_roots=args.swap_roots)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["modulus", "R_star", "status", "survivors"])
        for R in cfg.R_range:
            status = "eliminated" if R in set(rep.eliminated_R_star) else "open"
            w.writerow([cfg.G, R, status, rep.survivors[R]])
        _write(buf.getvalue(), args.out)
        return EXIT_OK
    _emit(rep.to_dict(), args, "sieve", cfg.to_dict() | {"swap_roots": args.swap_roots}, t0, jobs)
    return EXIT_OK


def cmd_bound(args) -> int:
    from .sieve import exponent_bound

    t0 = time.perf_counter()
    cfg = _config(args.field, args.zeta)
    primes, witnesses = exponent_bound(cfg)
    _emit({"bound_primes": primes, "witnesses": witnesses}, args, "bound", cfg.to_dict(), t0)
    return EXIT_OK


def cmd_theorem(args) -> int:
    from .sieve import theorem_report

    t0 = time.perf_counter()
    if args.field not in (5, 17):
        raise UsageError(f"no sieve for d = {args.field}")
    jobs = _jobs(args)
    _emit(theorem_report(args.field, jobs=jobs), args, "theorem", {"d": args.field}, t0, jobs)
    return EXIT_OK


def cmd_obstruct(args) -> int:
    from .obstructions import Window, cross_check, find_all, saturation_check, verify_triple
    from .sieve import SieveConfig, eliminated_classes

    t0 = time.perf_counter()
    _field(args.field)
    records = [r for r in ingest_curves(args.curves) if r.d == args.field]
    if not records:
        raise UsageError(f"{args.curves or 'bundled data'} has no curves over d = {args.field}")
    if args.window < 1:
        raise UsageError("--window must be positive")
    window = Window(args.window, args.window)
    jobs = _jobs(args)
    triples = find_all(records, window, jobs)
    by_label = {r.label: r for r in records}
    problems = {}
    for t in triples:
        bad = verify_triple(t, by_label[t.source])
        if bad:
            problems[canonical_json(t.to_dict())] = bad
    result = {
        "d": args.field,
        "window": [window.m, window.n],
        "curves": [r.to_dict() for r in records],
        "triples": [t.to_dict() for t in triples],
        "invariant_failures": [{"triple": json.loads(k), "problems": v} for k, v in sorted(problems.items())],
        "saturation": [saturation_check(r, window) for r in records] if args.saturation else None,
    }
    status = EXIT_MISMATCH if problems else EXIT_OK
    if args.cross_check and args.field in (5, 17):
        reps = [eliminated_classes(SieveConfig(args.field, r), jobs=jobs) for r in (1, 3)]
        verdict = cross_check(triples, reps)
        result["cross_check"] = verdict.to_dict()
        if not verdict.consistent:
            status = EXIT_MISMATCH
    _emit(result, args, "obstruct", {"d": args.field, "curves": str(args.curves or "bundled")}, t0, jobs)
    return status


def cmd_symbol(args) -> int:
    from . import symbols as S

    t0 = time.perf_counter()
    F = None if args.field == 1 else _field(args.field)
    vals = [parse_element(F, s) for s in args.args]
    kind = args.eval

    def need(n):
        if len(vals) != n:
            raise UsageError(f"--eval {kind} takes {n} arguments, got {len(vals)}")

    def prime_ideal(p: int):
        if F is None:
            return p
        primes = split_prime(F, p)
        idx = args.index
        if idx >= len(primes):
            raise UsageError(f"{p} has only {len(primes)} prime(s) above it")
        return primes[idx]

    out: dict = {"kind": kind, "field": args.field, "args": [repr(v) for v in vals]}
    try:
        if kind == "legendre":
            need(1)
            if F is None or args.prime is None:
                raise UsageError("legendre needs a quadratic field and --prime")
            out["value"] = S.legendre_at(vals[0], prime_ideal(args.prime))
        elif kind == "jacobi":
            need(2)
            if F is None:
                raise UsageError("jacobi is evaluated over a quadratic field")
            out["value"] = S.jacobi(vals[0], vals[1])
        elif kind == "hilbert":
            need(2)
            place = args.place
            if place is None:
                raise UsageError("hilbert needs --place (inf, inf1, inf2 or a prime)")
            if place.startswith("inf"):
                idx = int(place[3:] or 1)
                out["value"] = S.hilbert_real(vals[0], vals[1], idx)
            else:
                p = int(place)
                if F is None:
                    out["value"] = S.hilbert_q2(*vals) if p == 2 else S.hilbert_qp(vals[0], vals[1], p)
                else:
                    P = prime_ideal(p)
                    if p == 2:
                        out["value"] = S.hilbert_even_special(vals[0], vals[1], P)
                    else:
                        out["value"] = S.hilbert_odd(vals[0], vals[1], P)
            out["place"] = place
        elif kind == "reciprocity":
            need(2)
            res = S.reciprocity_product(vals[0], vals[1], F)
            out["value"] = res.product
            out["factors"] = res.factors
        elif kind == "genrec":
            need(2)
            inst = S.genrec_check(vals[0], vals[1])
            out.update(value=inst.lhs, expected=inst.rhs, sigma=inst.sigma, holds=inst.holds)
        elif kind == "constraint":
            need(2)
            a, b = vals
            res = S.hilbert_constraint_check(S.constraint_instance_from_triple(a, b, -a - b))
            out.update(value=res.product, real=res.real, even=res.even, odd=res.odd, factors=res.factors)
    except (S.HypothesisNotMet, S.UnsupportedEvenPlace) as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from None
    _emit(out, args, "symbol", {"eval": kind, "field": args.field}, t0)
    return EXIT_OK


def cmd_trace(args) -> int:
    t0 = time.perf_counter()
    F = _field(args.field)
    try:
        rec = find_record([r for r in ingest_curves(args.curves) if r.d == args.field], args.curve)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    rows = []
    for P in split_prime(F, args.prime):
        if not P.odd:
            raise UsageError("traces are computed at odd primes only")
        try:
            tr = trace_at(rec.curve, P)
            rows.append({"prime": repr(P), "N": tr.N_q, "a": tr.a_q})
        except SingularCurve:
            rows.append({"prime": repr(P), "N": P.norm, "a": None, "bad_reduction": True})
    _emit({"curve": rec.label, "traces": rows}, args, "trace", {"d": args.field, "p": args.prime}, t0)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    results = run_all(print)
    failed = [c.number for c in results if not c.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_MISMATCH if failed else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fltquad", description="Sieve, symbol and curve computations over Q(sqrt 5) and Q(sqrt 17).")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_out(sp):
        sp.add_argument("--out", help="write the report here instead of stdout")

    sp = sub.add_parser("sieve", help="eliminated exponent classes")
    sp.add_argument("--field", type=int, required=True)
    sp.add_argument("--zeta", type=int, required=True, help="r: 1 or 3")
    sp.add_argument("--jobs", type=int, help="worker processes (default $FLT_SIEVE_JOBS or 1)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--swap-roots", action="store_true", help="use the other image of w in each residue field")
    common_out(sp)
    sp.set_defaults(func=cmd_sieve)

    sp = sub.add_parser("bound", help="exponent bound primes")
    sp.add_argument("--field", type=int, required=True)
    sp.add_argument("--zeta", type=int, required=True)
    common_out(sp)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("theorem", help="combined congruence statement for a field")
    sp.add_argument("--field", type=int, required=True)
    sp.add_argument("--jobs", type=int)
    common_out(sp)
    sp.set_defaults(func=cmd_theorem)

    sp = sub.add_parser("obstruct", help="obstructive triples from a curve file")
    sp.add_argument("--field", type=int, required=True)
    sp.add_argument("--curves", help="JSON-lines curve file (default: bundled curves)")
    sp.add_argument("--window", type=int, default=12, help="S-unit exponent window (default 12)")
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--no-cross-check", dest="cross_check", action="store_false")
    sp.add_argument("--saturation", action="store_true", help="also rerun with the window doubled")
    common_out(sp)
    sp.set_defaults(func=cmd_obstruct)

    sp = sub.add_parser("symbol", help="evaluate a residue or Hilbert symbol")
    sp.add_argument("--eval", required=True,
                    choices=("legendre", "jacobi", "hilbert", "reciprocity", "genrec", "constraint"))
    sp.add_argument("--field", type=int, required=True, help="5 or 17, or 1 for the rationals")
    sp.add_argument("--prime", type=int, help="rational prime below the place (legendre)")
    sp.add_argument("--place", help="inf, inf1, inf2 or a rational prime (hilbert)")
    sp.add_argument("--index", type=int, default=0, help="which prime above --prime/--place when it splits")
    sp.add_argument("args", nargs="+", help="elements: 3, 2,-1 or 2-w")
    common_out(sp)
    sp.set_defaults(func=cmd_symbol)

    sp = sub.add_parser("trace", help="trace of Frobenius of a stored curve")
    sp.add_argument("--field", type=int, required=True)
    sp.add_argument("--curve", required=True, help="curve label")
    sp.add_argument("--prime", type=int, required=True)
    sp.add_argument("--curves", help="JSON-lines curve file (default: bundled curves)")
    common_out(sp)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("selftest", help="run the acceptance criteria")
    sp.set_defaults(func=cmd_selftest)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and argparse errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fltquad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CurveDataError, UnsupportedField, ValueError, OSError) as exc:
        print(f"fltquad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
