"""Command line front end: ``scenerylab <command> [options]``.

Exit codes: 0 success or Reconstructive, 10 NotReconstructive (also a
singular reconstruction), 20 Unknown, 3 pair refused, 1 any error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    EXIT_CODES,
    Verdict,
    analyze,
    bounded_support_N,
    embed_mod_n,
    primes_above,
)
from .errors import CapacityError, SceneryLabError, SingularSystemError
from .groups import ENUMERATION_CAP, GroupSpec
from .io import cached_fourier_transform, parse_scenery_arg, parse_walk_arg, split_elements, tomllib
from .oracle import enumerate_classes, equivalent, verify_verdict
from .scenery import (
    build_pair_cycle,
    build_pair_product,
    build_pair_stay_put,
    is_shift_of,
)
from .sim import estimate_b, simulate, write_trace
from .spectral import full_pipeline, temporal_autocorrelation_exact

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REFUSED = 3

CONFIG_KEYS = {"group", "walk", "scenery", "seed", "precision_bits", "max_order", "out", "format", "threads", "force", "explain", "steps"}


def _emit(args, payload, csv_text: str | None = None):
    if args.format == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(payload, indent=2, default=str) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _group(args) -> GroupSpec | None:
    return GroupSpec.parse(args.group) if args.group else None


def _walk(args):
    if not args.walk:
        raise SceneryLabError("--walk is required")
    walk = parse_walk_arg(args.walk, _group(args), args.precision_bits)
    if walk.group.order > args.max_order:
        raise CapacityError(f"{walk.group} has order {walk.group.order} > --max-order {args.max_order}")
    return walk


def _analyze(args, walk):
    table = cached_fourier_transform(walk, args.precision_bits, cap=args.max_order)
    return analyze(walk, table=table, precision_bits=args.precision_bits, cap=args.max_order)


def cmd_analyze(args) -> int:
    walk = _walk(args)
    verdict = _analyze(args, walk)
    payload = {"group": str(walk.group), "walk": walk.describe(), **verdict.to_json(args.explain)}
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["x", "re", "im"])
    for x, entry in payload["fourier_table"].items():
        w.writerow([x, entry["re"], entry["im"]])
    _emit(args, payload, rows.getvalue())
    return verdict.exit_code


def _pair_for(walk, verdict, x=None, y=None):
    g = walk.group
    if x is None:
        col = verdict.collisions[0]
        x, y, v = col.x, col.y, col.multiplier
    else:
        x, y, v = g.element(x), g.element(y), None
        if g.is_cycle and not x.is_zero() and not y.is_zero():
            v = y.flat[0] * pow(x.flat[0], -1, g.order) % g.order
    if walk(g.zero()) == 1:
        return build_pair_stay_put(g)
    if g.is_cycle and v is not None:
        return build_pair_cycle(g.order, v, x, y)
    return build_pair_product(g, x, y)


def cmd_pair(args) -> int:
    walk = _walk(args)
    verdict = _analyze(args, walk)
    explicit = args.x is not None and args.y is not None
    if verdict.verdict != Verdict.NOT_RECONSTRUCTIVE and not (args.force and (explicit or verdict.collisions)):
        msg = {
            "refused": True,
            "verdict": verdict.verdict.value,
            "reason": (
                "walk has pairwise distinct Fourier coefficients, so every pair of sceneries "
                "that are not shifts of each other is distinguishable"
                if verdict.verdict == Verdict.RECONSTRUCTIVE
                else f"verdict is Unknown ({verdict.reason}); use --force with --x/--y to build a candidate anyway"
            ),
        }
        _emit(args, msg)
        return EXIT_REFUSED
    g = walk.group
    if explicit:
        pair = _pair_for(walk, verdict, g.parse_element(args.x), g.parse_element(args.y))
    else:
        pair = _pair_for(walk, verdict)
    res = equivalent(walk, pair.f1, pair.f2)
    pair.oracle = res.to_json()
    payload = {"verdict": verdict.verdict.value, "walk": walk.describe(), **pair.to_json()}
    _emit(args, payload)
    if not res.equivalent:
        sys.stderr.write(f"oracle distinguishes the constructed pair with word {res.certificate}\n")
        return EXIT_ERROR
    return EXIT_OK


def cmd_simulate(args) -> int:
    walk = _walk(args)
    if not args.scenery:
        raise SceneryLabError("--scenery is required")
    f = parse_scenery_arg(args.scenery, walk.group)
    trace = simulate(walk, f, args.steps, args.seed)
    payload = {"seed": args.seed, "steps": args.steps, "ones_observed": int(trace.observations.sum())}
    if args.trace_out:
        payload["trace"] = write_trace(trace, args.trace_out, walk, f, args.emit_positions)
    csv_text = None
    if args.lags is not None:
        est = estimate_b(trace, args.lags)
        exact = temporal_autocorrelation_exact(walk, f, args.lags).values if walk.exact else None
        rows = []
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lag", "estimate", "stderr", "exact"])
        for lag in range(args.lags + 1):
            ex = None if exact is None else str(exact[lag])
            rows.append({"lag": lag, "estimate": float(est.values[lag]), "stderr": float(est.stderr[lag]), "exact": ex})
            w.writerow([lag, est.values[lag], est.stderr[lag], ex or ""])
        payload["b"] = rows
        csv_text = buf.getvalue()
    _emit(args, payload, csv_text)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    walk = _walk(args)
    if not args.scenery:
        raise SceneryLabError("--scenery is required")
    f = parse_scenery_arg(args.scenery, walk.group)
    try:
        rec = full_pipeline(walk, f)
    except SingularSystemError as exc:
        _emit(args, {"error": "singular", "message": str(exc), "collisions": exc.collisions})
        return EXIT_CODES[Verdict.NOT_RECONSTRUCTIVE]
    shift = is_shift_of(f, rec)
    payload = {
        "group": str(walk.group),
        "input": f.to_json(),
        "recovered": rec.to_json(),
        "shift_equivalent": shift is not None,
        "shift": None if shift is None else str(shift),
    }
    _emit(args, payload)
    return EXIT_OK if shift is not None else EXIT_ERROR


def cmd_classes(args) -> int:
    walk = _walk(args)
    report = enumerate_classes(walk.group, walk, threads=args.threads)
    _emit(args, report.to_json(), report.histogram_csv())
    return EXIT_OK


def cmd_bounded_n(args) -> int:
    elems = [int(e) for e in split_elements(args.multiset)]
    res = bounded_support_N(elems)
    payload = res.to_json()
    if res.symmetric:
        payload["status"] = "symmetric: no N makes this walk reconstructive"
        _emit(args, payload)
        return EXIT_OK
    rows = []
    for p in primes_above(res.N, 3):
        v = analyze(embed_mod_n(elems, p))
        rows.append({"n": p, "verdict": v.verdict.value})
    payload["status"] = "bounded"
    payload["verification"] = rows
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "verdict"])
    for r in rows:
        w.writerow([r["n"], r["verdict"]])
    _emit(args, payload, buf.getvalue())
    bad = [r for r in rows if r["verdict"] != Verdict.RECONSTRUCTIVE.value]
    return EXIT_OK if not bad else EXIT_ERROR


def cmd_verify(args) -> int:
    walk = _walk(args)
    verdict = _analyze(args, walk)
    check = verify_verdict(verdict, walk.group, walk, threads=args.threads)
    _emit(args, check.to_json())
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "pair": cmd_pair,
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "classes": cmd_classes,
    "bounded-n": cmd_bounded_n,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with default option values (flags win)")
    common.add_argument("--group", help='group such as "Z7", "Z7^2" or "Z7xZ11"')
    common.add_argument("--walk", help='walk TOML file, "preset:delta-z7", or inline multiset like "1,2,4"')
    common.add_argument("--scenery", help='scenery JSON, bit string "0110000", or "ones:0,1"')
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--precision-bits", type=int, default=None)
    common.add_argument("--max-order", type=int, default=ENUMERATION_CAP)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--force", action="store_true")
    common.add_argument("--explain", action="store_true", help="include exact cyclotomic forms")

    parser = argparse.ArgumentParser(prog="scenerylab", description="Scenery reconstruction toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="Fourier verdict for a walk")
    p = sub.add_parser("pair", parents=[common], help="oracle-checked indistinguishable pair")
    p.add_argument("--x", help="collision element x (with --force)")
    p.add_argument("--y", help="collision element y (with --force)")
    p = sub.add_parser("simulate", parents=[common], help="seeded trace of a labeled walk")
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--trace-out", help="packed-bit trace file (writes a .json sidecar)")
    p.add_argument("--emit-positions", action="store_true")
    p.add_argument("--lags", type=int, default=None, help="estimate b_f up to this lag")
    sub.add_parser("reconstruct", parents=[common], help="recover a scenery from exact statistics")
    sub.add_parser("classes", parents=[common], help="brute-force equivalence classes")
    p = sub.add_parser("bounded-n", parents=[common], help="explicit N for an integer multiset")
    p.add_argument("multiset", help='integer steps such as "1,2"')
    sub.add_parser("verify", parents=[common], help="cross-check the verdict against the oracle")
    return parser


def _apply_config(args, argv):
    if not args.config:
        return args
    with open(args.config, "rb") as fh:
        cfg = tomllib.load(fh)
    given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr not in CONFIG_KEYS:
            raise SceneryLabError(f"unknown config key {key!r}")
        if attr not in given and hasattr(args, attr):
            setattr(args, attr, value)
    return args


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(argv)
    try:
        args = _apply_config(args, argv)
        return COMMANDS[args.command](args)
    except (SceneryLabError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
