"""Command-line front end.

Exit codes: 0 success, 1 computation failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import io, reproduce
from .channel import DEFAULT_EXTENT, DEFAULT_SPACING, build_grid
from .constellation import InvalidArgument, build_xor_classes, check_ambiguity_free, get_constellation
from .info import (POWER_RULES, DEFAULT_POWER_RULE, InputDistribution, UnreachableRateError,
                   channel_at_snr, mb_lambda_search, mutual_information, mutual_information_mc)
from .optimizer import (ASYMMETRIC, FAMILIES, SYMMETRIC, OptimizationFailed, ShapingProblem,
                        Tolerances, optimize, snr_threshold, sweep)

log = logging.getLogger("macshaping")


class UsageError(Exception):
    pass


def _dist(spec: str | None, c) -> InputDistribution:
    if spec is None or spec == "uniform":
        return InputDistribution.uniform(c)
    return io.load_distribution(spec, c.M)


def _manifest(args, command) -> io.RunManifest:
    flags = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return io.RunManifest(command, flags, getattr(args, "seed", None),
                          {"spacing": getattr(args, "grid_spacing", None),
                           "extent": getattr(args, "grid_extent", None)})


def _emit(args, payload: dict | None = None, text: str | None = None, manifest=None):
    if payload is not None:
        if manifest is not None:
            payload["manifest"] = manifest.finish().to_json()
        text = io.dumps(payload)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        if payload is None and manifest is not None:
            with open(args.out + ".manifest.json", "w") as fh:
                fh.write(io.dumps(manifest.finish().to_json()))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _problem(args, c, snr_db) -> ShapingProblem:
    return ShapingProblem(
        c.name, snr_db, mode=ASYMMETRIC if args.asymmetric else SYMMETRIC,
        starts=args.starts, seed=args.seed,
        tol=Tolerances(args.grad_tol, args.obj_tol, args.max_iters),
        spacing=args.grid_spacing, extent=args.grid_extent,
        power_rule=args.power_rule, workers=args.threads)


# ---------------------------------------------------------------------------

def cmd_eval(args):
    m = _manifest(args, "eval")
    c = get_constellation(args.constellation)
    x = build_xor_classes(c)
    p = _dist(args.dist, c)
    q = _dist(args.dist_b, c) if args.dist_b else p
    if args.snr_db is None:
        raise UsageError("--snr-db is required")
    ch = channel_at_snr(p, q, x, args.snr_db, args.power_rule)
    if args.method == "mc":
        res = mutual_information_mc(p, q, x, ch, args.mc_samples, args.seed)
    else:
        res = mutual_information(p, q, x, ch, build_grid(x, ch, args.grid_spacing, args.grid_extent))
    res.provenance.update(snr_db=args.snr_db, power_rule=args.power_rule)
    _emit(args, res.to_json(), manifest=m)


def cmd_optimize(args):
    m = _manifest(args, "optimize")
    c = get_constellation(args.constellation)
    if args.snr_db is None:
        raise UsageError("--snr-db is required")
    res = optimize(_problem(args, c, args.snr_db))
    _emit(args, res.to_json(), manifest=m)


def cmd_threshold(args):
    m = _manifest(args, "threshold")
    c = get_constellation(args.constellation)
    if args.rate is None:
        raise UsageError("--rate is required")
    fam = args.family
    if fam == "fixed":
        if not args.dist:
            raise UsageError("--family fixed needs --dist")
        p = _dist(args.dist, c)
        source = (p, _dist(args.dist_b, c)) if args.dist_b else p
    else:
        source = fam
    template = _problem(args, c, 0.0)
    thr = snr_threshold(c, source, args.rate, template=template, tol=args.tol,
                        spacing=args.grid_spacing, extent=args.grid_extent)
    _emit(args, {"constellation": c.name, "family": fam, "rate_bits": args.rate,
                 "threshold_snr_db": thr}, manifest=m)


def cmd_sweep(args):
    m = _manifest(args, "sweep")
    c = get_constellation(args.constellation)
    fams = [f.strip() for f in args.families.split(",") if f.strip()]
    fixed = _dist(args.dist, c) if "fixed" in fams else None
    rows = sweep(c, args.snr_from, args.snr_to, args.snr_step, fams,
                 template=_problem(args, c, 0.0), fixed=fixed,
                 spacing=args.grid_spacing, extent=args.grid_extent)
    if args.format == "json":
        _emit(args, {"rows": rows}, manifest=m)
    else:
        _emit(args, text=io.rows_to_csv(rows), manifest=m)


def cmd_mbfit(args):
    m = _manifest(args, "mbfit")
    c = get_constellation(args.constellation)
    if args.rate is None:
        raise UsageError("--rate is required")
    fit = mb_lambda_search(c, build_xor_classes(c), args.rate,
                           spacing=args.grid_spacing, extent=args.grid_extent)
    _emit(args, {"constellation": c.name, "rate_bits": args.rate, **fit}, manifest=m)


def cmd_ambiguity(args):
    m = _manifest(args, "ambiguity")
    c = get_constellation(args.constellation)
    x = build_xor_classes(c)
    ok = check_ambiguity_free(x)
    witness = None
    if x.collisions:
        (k, l), (k2, l2) = x.collisions[0]
        witness = {"pair_a": [k, l], "pair_b": [k2, l2],
                   "class_a": int(c.labels[k] ^ c.labels[l]),
                   "class_b": int(c.labels[k2] ^ c.labels[l2])}
    _emit(args, {"constellation": c.name, "ambiguity_free": ok,
                 "n_collisions": len(x.collisions), "witness": witness}, manifest=m)


def cmd_reproduce(args):
    m = _manifest(args, "reproduce")
    if args.table == 1:
        checks = reproduce.table1_checks(include_mb=not args.skip_mb)
        checks.append(reproduce.asymmetric_pair_check())
    else:
        checks = reproduce.table2_checks(include_mb=not args.skip_mb, starts=args.starts,
                                         seed=args.seed)
    if args.format == "json":
        _emit(args, {"table": args.table, "checks": [ch.to_json() for ch in checks]}, manifest=m)
    else:
        _emit(args, text=reproduce.report(checks) + "\n")
    if args.strict and not all(ch.passed for ch in checks if ch.required):
        return 1
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--constellation", default="pam16",
                        help="pam2 ... pam256 or qam16-gray (default pam16)")
    common.add_argument("--snr-db", type=float)
    common.add_argument("--rate", type=float)
    common.add_argument("--dist", help="distribution JSON file, or 'uniform'")
    common.add_argument("--dist-b", help="second user's distribution (asymmetric)")
    common.add_argument("--family", default="optimized",
                        choices=["optimized", "uniform", "mb", "cutset", "fixed"])
    common.add_argument("--asymmetric", action="store_true",
                        help="optimize p and q independently")
    common.add_argument("--power-rule", default=DEFAULT_POWER_RULE, choices=POWER_RULES,
                        help="how unequal user powers map to one SNR")
    common.add_argument("--starts", type=int, default=32)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grad-tol", type=float, default=1e-7)
    common.add_argument("--obj-tol", type=float, default=1e-10)
    common.add_argument("--max-iters", type=int, default=2000)
    common.add_argument("--grid-spacing", type=float, default=DEFAULT_SPACING)
    common.add_argument("--grid-extent", type=float, default=DEFAULT_EXTENT)
    common.add_argument("--mc-samples", type=int, default=200_000)
    common.add_argument("--method", choices=["quad", "mc"], default="quad")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out")
    common.add_argument("--format", choices=["json", "csv"], default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="macshaping", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("eval", parents=[common], help="evaluate I(W_C;Y)").set_defaults(func=cmd_eval)
    sub.add_parser("optimize", parents=[common],
                   help="multi-start rate maximization").set_defaults(func=cmd_optimize)
    sp = sub.add_parser("threshold", parents=[common], help="SNR threshold for a target rate")
    sp.add_argument("--tol", type=float, default=0.01, help="bisection tolerance in dB")
    sp.set_defaults(func=cmd_threshold)
    sp = sub.add_parser("sweep", parents=[common], help="rate-vs-SNR table")
    sp.add_argument("--snr-from", type=float, default=-5.0)
    sp.add_argument("--snr-to", type=float, default=25.0)
    sp.add_argument("--snr-step", type=float, default=1.0)
    sp.add_argument("--families", default=",".join(FAMILIES))
    sp.set_defaults(func=cmd_sweep)
    sub.add_parser("mbfit", parents=[common],
                   help="best Maxwell-Boltzmann lambda for a rate").set_defaults(func=cmd_mbfit)
    sub.add_parser("ambiguity", parents=[common],
                   help="ambiguity-free detection check").set_defaults(func=cmd_ambiguity)
    sp = sub.add_parser("reproduce", parents=[common], help="check against the published tables")
    sp.add_argument("--table", type=int, choices=[1, 2], required=True)
    sp.add_argument("--skip-mb", action="store_true")
    sp.add_argument("--strict", action="store_true", help="exit 1 if any required check fails")
    sp.set_defaults(func=cmd_reproduce, starts=8)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.format is None:
        args.format = "csv" if args.command == "sweep" else (
            "text" if args.command == "reproduce" else "json")
    try:
        rc = args.func(args)
    except (UsageError, InvalidArgument) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UnreachableRateError, OptimizationFailed, ArithmeticError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
