"""Command-line front door: build instances, decompose, verify, report.

JSON is the single interchange format; tables are derived views.  Exit
codes: 0 ok, 1 verification failure, 2 invalid input, 3 internal
inconsistency (a theorem-violation finding).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .datum import (
    HypothesisError,
    InconsistencyError,
    e_ranks,
    level_from_str,
    level_str,
    load_datum,
    save_datum,
)
from .decompose import (
    decompose,
    load_decomposition,
    save_decomposition,
    verify,
)
from .gmod import jordan_type, make_module
from .local_fields import build_datum, make_tower
from .synth import SynthParams, save_sidecar, synthesize

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INVALID = 2
EXIT_INCONSISTENT = 3


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="galmod", description=__doc__)
    top.add_argument("--version", action="version", version=f"galmod {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic datum with a known answer")
    p_synth.add_argument("--p", type=int, required=True)
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument(
        "--m", type=str, default="n/a",
        help="level, -inf, or n/a (write --m=-inf so the dash is not read as a flag)",
    )
    p_synth.add_argument("--e", type=str, required=True, help="comma list e_0,...,e_n")
    p_synth.add_argument("--xi", action="store_true", help="xi_p lies in the base")
    p_synth.add_argument(
        "--minus-one-norm", choices=["true", "false"], default=None,
        help="p=2, n=1 bookkeeping flag",
    )
    p_synth.add_argument("--seed", type=int, default=None, help="basis shuffle seed")
    p_synth.add_argument("--out", required=True, help="datum JSON path")
    p_synth.add_argument("--sidecar", default=None, help="expected-answer JSON path")

    p_dec = sub.add_parser("decompose", help="decompose a datum JSON")
    p_dec.add_argument("--in", dest="infile", required=True)
    p_dec.add_argument("--out", default=None, help="decomposition JSON path")
    p_dec.add_argument("--format", choices=["json", "table"], default="table")

    p_ver = sub.add_parser("verify", help="re-check a decomposition against a datum")
    p_ver.add_argument("--in", dest="infile", required=True, help="datum JSON")
    p_ver.add_argument("--decomposition", required=True, help="decomposition JSON")

    p_inv = sub.add_parser("invariants", help="run the lemma property suite on a datum")
    p_inv.add_argument("--in", dest="infile", required=True)

    p_loc = sub.add_parser("local", help="build a p-adic tower and emit its datum")
    p_loc.add_argument("--p", type=int, required=True)
    p_loc.add_argument("--kind", choices=["unramified", "cyclotomic"], required=True)
    p_loc.add_argument("--n", type=int, required=True)
    p_loc.add_argument("--precision", type=int, default=None, help="pi-adic digits")
    p_loc.add_argument("--out", required=True)

    p_jor = sub.add_parser("jordan", help="block multiset of a raw (sigma, p, n) JSON")
    p_jor.add_argument("--in", dest="infile", required=True)

    p_self = sub.add_parser("selftest", help="run the acceptance sweep")
    p_self.add_argument("--jobs", type=int, default=1)
    p_self.add_argument("--dim-cap", type=int, default=120)
    p_self.add_argument("--quick", action="store_true", help="smaller sweep")

    return top


def _cmd_synth(args) -> int:
    try:
        e = tuple(int(x) for x in args.e.split(","))
        m = level_from_str(args.m)
        m1 = None if args.minus_one_norm is None else args.minus_one_norm == "true"
        params = SynthParams(
            p=args.p, n=args.n, m=m, e=e, xi_in_F=args.xi,
            minus_one_is_norm=m1, shuffle_seed=args.seed,
        )
        params.check()
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    d = synthesize(params)
    save_datum(d, args.out)
    if args.sidecar:
        save_sidecar(params, args.sidecar)
    print(f"wrote datum (dim J = {d.J.dim}) to {args.out}")
    return EXIT_OK


def _cmd_decompose(args) -> int:
    try:
        d = load_datum(args.infile)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"cannot read datum: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        dec = decompose(d)
    except (ValueError, HypothesisError) as exc:
        print(f"invalid datum: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InconsistencyError as exc:
        print(f"inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    if args.out:
        save_decomposition(dec, args.out)
    if args.format == "table":
        e = e_ranks(d)
        print(f"m            : {level_str(dec.m)}")
        print(f"e-vector     : {e}")
        print(f"y-ranks      : {dec.y_ranks()}")
        print(f"blocks       : {dec.block_multiset()}")
        print(f"dim J        : {d.J.dim}")
    else:
        from .decompose import decomposition_to_json

        print(json.dumps(decomposition_to_json(dec), indent=1))
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        d = load_datum(args.infile)
        dec = load_decomposition(args.decomposition)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report = verify(dec, d)
    failed = [k for k, v in report.items() if not k.startswith("_") and not v]
    for k, v in report.items():
        if k.startswith("_"):
            continue
        print(f"{'pass' if v else 'FAIL'}  {k}")
    for note in report.get("_notes", []):
        print(f"note  {note}")
    return EXIT_OK if not failed else EXIT_VERIFY_FAIL


def _cmd_invariants(args) -> int:
    try:
        d = load_datum(args.infile)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"cannot read datum: {exc}", file=sys.stderr)
        return EXIT_INVALID
    from .invariants import lemma_property_suite

    report = lemma_property_suite(d)
    failed = [k for k, v in report.items() if not k.startswith("_") and not v]
    for k, v in report.items():
        if k.startswith("_"):
            continue
        print(f"{'pass' if v else 'FAIL'}  {k}")
    for note in report.get("_notes", []):
        print(f"note  {note}")
    return EXIT_OK if not failed else EXIT_VERIFY_FAIL


def _cmd_local(args) -> int:
    from .local_fields import PrecisionError

    precision = args.precision
    try:
        if precision is None:
            # conservative default well above the module's minimum
            if args.kind == "cyclotomic":
                e = 2 ** (args.n + 1) if args.p == 2 else args.p**args.n * (args.p - 1)
            else:
                e = 1
            precision = e * 3 + e + 24
        tower = make_tower(args.p, args.kind, args.n, precision)
        d = build_datum(tower)
    except (ValueError, PrecisionError) as exc:
        print(f"cannot build tower: {exc}", file=sys.stderr)
        return EXIT_INVALID
    save_datum(d, args.out)
    print(
        f"wrote datum for {args.kind} tower (p={args.p}, n={args.n}, "
        f"dim J = {d.J.dim}) to {args.out}"
    )
    return EXIT_OK


def _cmd_jordan(args) -> int:
    try:
        with open(args.infile, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        m = make_module(int(obj["p"]), int(obj["n"]), obj["sigma"])
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"cannot read module: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(jordan_type(m))
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from .sweep import run_sweep

    result = run_sweep(jobs=args.jobs, dim_cap=args.dim_cap, quick=args.quick)
    for line in result.lines:
        print(line)
    print(
        f"{result.instances} instances, {result.failures} failures, "
        f"{result.seconds:.1f} s"
    )
    return EXIT_OK if result.failures == 0 else EXIT_VERIFY_FAIL


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {
        "synth": _cmd_synth,
        "decompose": _cmd_decompose,
        "verify": _cmd_verify,
        "invariants": _cmd_invariants,
        "local": _cmd_local,
        "jordan": _cmd_jordan,
        "selftest": _cmd_selftest,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
