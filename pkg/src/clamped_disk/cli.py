"""Command-line front end.

Exit status: 0 success, 1 verification failure, 2 usage error,
3 precision exhausted.  Output is byte-deterministic for fixed options.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from . import __version__
from .bessel_eval import (
    EvalConfig,
    PrecisionExhausted,
    bessel_derivs,
    bessel_I,
    bessel_J,
    cross_W,
    cross_W_deriv,
    ode_residual,
    recursion_residual,
)
from .cache import ResultCache
from .exact_algebra import PolyQ, SeriesTruncationError, render_rat
from .four_form import CertificateViolation, claim_scan, coords_F, coords_table, load_coords_table
from .series_verify import (
    series_I,
    series_J,
    series_W,
    verify_base_matrix,
    verify_lemma_formulas,
    verify_recursion_series,
    verify_recursion_symbolic,
)
from .spectrum import (
    ZeroRecord,
    build_table,
    collision_scan,
    radial_profile,
    zeros_for_orders,
)

log = logging.getLogger("clamped_disk")

# Every default lives here.
DEFAULTS: dict[str, Any] = {
    "prec": 128,          # working precision in bits
    "target": "1e-30",    # absolute error target for `eval`
    "width": "2^-64",     # zero enclosure width
    "grid": "1/100",      # zero scan grid step
    "order": 80,          # series truncation order
    "max": 12,            # largest index for `verify fourform` and `spectrum`
    "scan_max": 10,       # largest order for `scan-collisions`
    "xmax": "50",         # scan range
    "samples": 11,        # radial profile samples
    "radius_tol": "1e-18",  # u'(1) radius bound, relative to w
    "count": 1000,        # random residual samples
    "seed": 20240601,
    "digits": 25,         # decimal places in renderings
    "jobs": 1,
    "format": "table",
}

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Argument parsing helpers


def parse_rational(text: str) -> Fraction:
    """Exact rational from '3', '2.5', '1e-20', '7/3' or '2^-64'."""
    s = str(text).strip()
    try:
        if "^" in s:
            base, exp = s.split("^", 1)
            return Fraction(int(base)) ** int(exp)
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from exc


def parse_positive(text: str) -> Fraction:
    q = parse_rational(text)
    if q <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return q


def parse_range(text: str) -> list[int]:
    """'3', '0..10' or '0,2,5'."""
    s = str(text).strip()
    try:
        if ".." in s:
            a, b = s.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            out = list(range(lo, hi + 1))
        else:
            out = [int(p) for p in s.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad index range {text!r}") from exc
    if any(v < 0 for v in out):
        raise argparse.ArgumentTypeError("indices must be nonnegative")
    return out


def parse_bool(text: str) -> bool:
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def load_config(path: str) -> dict[str, str]:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("table", "csv", "jsonl"), default=DEFAULTS["format"])
    common.add_argument("--out", help="write records to this file instead of stdout")
    common.add_argument("--cache-dir", help="persist results in this directory")
    common.add_argument("--jobs", type=int, default=DEFAULTS["jobs"], help="worker processes")
    common.add_argument("--config", help="key=value file; command-line flags override it")
    common.add_argument("--digits", type=int, default=DEFAULTS["digits"])

    numeric = _Parser(add_help=False)
    numeric.add_argument("--prec", type=int, default=DEFAULTS["prec"])
    numeric.add_argument("--scaled", dest="scaled", action="store_true", default=None,
                         help="evaluate e^{-x}-scaled modified functions")
    numeric.add_argument("--unscaled", dest="scaled", action="store_false")

    scan = _Parser(add_help=False)
    scan.add_argument("--xmax", type=parse_positive, default=DEFAULTS["xmax"])
    scan.add_argument("--width", type=parse_positive, default=DEFAULTS["width"])
    scan.add_argument("--grid", type=parse_positive, default=DEFAULTS["grid"])

    p = _Parser(prog="clamped-disk", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", parents=[common, numeric], help="error-bounded J, I, W values")
    e.add_argument("--fn", choices=("J", "I", "Jp", "Ip", "W", "Wp"), required=True)
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--x", type=parse_rational, required=True)
    e.add_argument("--target", type=parse_positive, default=DEFAULTS["target"])
    e.add_argument("--via", choices=("lemma", "definition"), default="lemma")

    s = sub.add_parser("series", parents=[common], help="exact Taylor coefficients")
    s.add_argument("--fn", choices=("J", "I", "W"), required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--order", type=int, default=DEFAULTS["order"])

    z = sub.add_parser("zeros", parents=[common, numeric, scan], help="certified zeros of W_m (or J_m)")
    z.add_argument("--m", type=parse_range, required=True)
    z.add_argument("--vm", action="store_true", help="zeros of J_m instead of W_m")

    sp = sub.add_parser("spectrum", parents=[common, numeric, scan], help="plate eigenvalue table")
    sp.add_argument("--max", type=int, default=DEFAULTS["max"])

    pr = sub.add_parser("profile", parents=[common, numeric, scan], help="radial eigenfunction profiles")
    pr.add_argument("--m", type=parse_range, default=None)
    pr.add_argument("--max", type=int, default=None, help="all orders 0..MAX")
    pr.add_argument("--k", type=int, default=None, help="sample this zero instead of summarizing all")
    pr.add_argument("--samples", type=int, default=DEFAULTS["samples"])
    pr.add_argument("--radius-tol", type=parse_positive, default=DEFAULTS["radius_tol"])

    c = sub.add_parser("scan-collisions", parents=[common, numeric, scan], help="forbidden joint-zero scan")
    c.add_argument("--max", type=int, default=DEFAULTS["scan_max"])

    v = sub.add_parser("verify", help="verification suites")
    vs = v.add_subparsers(dest="suite", required=True, parser_class=_Parser)
    vl = vs.add_parser("lemma", parents=[common])
    vl.add_argument("--m", type=parse_range, default="0..10")
    vl.add_argument("--order", type=int, default=DEFAULTS["order"])
    vl.add_argument("--skip-negative-orders", action="store_true",
                    help="at m = 0 skip formulas that need order -1 instead of J_-1 = -J_1, I_-1 = I_1")
    vr = vs.add_parser("recursion", parents=[common])
    vr.add_argument("--m", type=parse_range, default="0..10")
    vr.add_argument("--order", type=int, default=DEFAULTS["order"])
    vy = vs.add_parser("recursion-symbolic", parents=[common])
    vy.add_argument("--m", type=parse_range, default="0..10")
    vs.add_parser("basematrix", parents=[common])
    vf = vs.add_parser("fourform", parents=[common])
    vf.add_argument("--max", type=int, default=DEFAULTS["max"])
    for name in ("ode", "residuals"):
        vo = vs.add_parser(name, parents=[common, numeric])
        vo.add_argument("--count", type=int, default=DEFAULTS["count"])
        vo.add_argument("--seed", type=int, default=DEFAULTS["seed"])
        vo.add_argument("--mmax", type=int, default=10)
        vo.add_argument("--xlo", type=parse_rational, default="1/2", help="exclusive lower end")
        vo.add_argument("--xhi", type=parse_rational, default="40")
        vo.add_argument("--target", type=parse_positive, default="1e-25")
    return p


def _subparsers(parser: argparse.ArgumentParser) -> Iterable[argparse.ArgumentParser]:
    yield parser
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sp in action.choices.values():
                yield from _subparsers(sp)


def _apply_config(parser: argparse.ArgumentParser, config: dict[str, str]) -> None:
    known: set[str] = set()
    for sp in _subparsers(parser):
        dests = {}
        for a in sp._actions:
            if a.option_strings and a.dest not in ("help", "version", "config"):
                dests[a.dest] = a
        known |= dests.keys()
        values = {}
        for k, v in config.items():
            if k in dests:
                a = dests[k]
                values[k] = parse_bool(v) if a.nargs == 0 else v
        if values:
            sp.set_defaults(**values)
    unknown = sorted(set(config) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if known.config:
        _apply_config(parser, load_config(known.config))
    return parser.parse_args(argv)


# ---------------------------------------------------------------------------
# Output


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return str(v)


def render(records: list[dict], fmt: str) -> str:
    if not records:
        return ""
    if fmt == "jsonl":
        return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)
    fields: list[str] = []
    for r in records:
        for k in r:
            if k not in fields:
                fields.append(k)
    rows = [[_cell(r.get(k)) for k in fields] for r in records]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        w.writerows(rows)
        return buf.getvalue()
    widths = [max(len(f), *(len(row[i]) for row in rows)) for i, f in enumerate(fields)]
    lines = ["  ".join(f.ljust(w) for f, w in zip(fields, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def _emit(args, records: list[dict]) -> None:
    text = render(records, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# Commands


def _cfg(args, default_scaled: bool) -> EvalConfig:
    scaled = default_scaled if args.scaled is None else args.scaled
    target = getattr(args, "target", Fraction(DEFAULTS["target"]))
    return EvalConfig(prec_bits=args.prec, target_abs_err=target, scaled=scaled)


def _cached(args, key: dict, compute: Callable[[], Any]) -> Any:
    if not args.cache_dir:
        return compute()
    return ResultCache(args.cache_dir).get_or_compute(key, compute)


def _sci(q: Fraction) -> str:
    return f"{float(q):.6e}"


def cmd_eval(args) -> int:
    cfg = _cfg(args, False)
    m, x = args.m, args.x
    if args.fn == "J":
        r = bessel_J(m, x, cfg)
    elif args.fn == "I":
        r = bessel_I(m, x, cfg)
    elif args.fn in ("Jp", "Ip"):
        jp, ip = bessel_derivs(m, x, cfg)
        r = jp if args.fn == "Jp" else ip
    elif args.fn == "W":
        r = cross_W(m, x, cfg, via=args.via)
    else:
        r = cross_W_deriv(m, x, cfg)
    _emit(args, [{
        "fn": args.fn, "m": m, "x": render_rat(x), "scaled": cfg.scaled,
        "value": r.to_decimal(args.digits), "err": _sci(r.err), "prec_bits": r.prec_bits,
    }])
    return EXIT_OK


def cmd_series(args) -> int:
    fn = {"J": series_J, "I": series_I, "W": series_W}[args.fn]
    s = fn(args.m, args.order)
    recs = [{"fn": args.fn, "m": args.m, "exponent": e, "coeff": render_rat(c), "valid_order": s.order}
            for e, c in sorted(s.terms().items())]
    _emit(args, recs)
    return EXIT_OK


def _zero_rows(args, orders: list[int], xmax: Fraction, vm: bool, cfg: EvalConfig) -> list[dict]:
    key = {
        "op": "zeros", "kind": "J" if vm else "W", "m": orders, "xmax": render_rat(xmax),
        "width": render_rat(args.width), "grid": render_rat(args.grid),
        "prec": cfg.prec_bits, "scaled": cfg.scaled, "digits": args.digits,
    }

    def compute():
        by_m = zeros_for_orders(orders, xmax, args.width, cfg, args.grid, args.jobs, "J" if vm else "W")
        return [z.as_row(args.digits) | {"prec_bits": z.prec_bits} for m in orders for z in by_m[m]]

    return _cached(args, key, compute)


def _records_to_zeros(rows: list[dict], kind: str) -> list[ZeroRecord]:
    return [ZeroRecord(r["m"], r["k"], Fraction(r["lo"]), Fraction(r["hi"]), r["prec_bits"], kind) for r in rows]


def cmd_zeros(args) -> int:
    cfg = _cfg(args, True)
    rows = _zero_rows(args, args.m, args.xmax, args.vm, cfg)
    _emit(args, rows)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = _cfg(args, True)
    rows = _zero_rows(args, list(range(args.max + 1)), args.xmax, False, cfg)
    table = build_table(_records_to_zeros(rows, "W"))
    cluster_of = {}
    for ci, members in enumerate(table.clusters, start=1):
        for i in members:
            cluster_of[i] = (ci, sum(table.rows[j].mult for j in members))
    recs = []
    for i, z in enumerate(table.rows):
        ci, cm = cluster_of[i]
        recs.append(z.as_row(args.digits) | {"cluster": ci, "cluster_mult": cm})
    _emit(args, recs)
    _note(f"{len(recs)} zeros, {len(table.clusters)} clusters, max multiplicity {table.max_multiplicity}, "
          f"ground state isolated: {table.ground_state_isolated()}")
    return EXIT_OK if table.max_multiplicity <= 6 else EXIT_FAIL


def cmd_profile(args) -> int:
    cfg = _cfg(args, True)
    if args.max is not None:
        orders = list(range(args.max + 1))
    elif args.m is not None:
        orders = args.m
    else:
        raise UsageError("profile: give --m or --max")
    zeros = _records_to_zeros(_zero_rows(args, orders, args.xmax, False, cfg), "W")
    if args.k is not None:
        if len(orders) != 1:
            raise UsageError("profile: --k needs a single order in --m")
        match = [z for z in zeros if z.k == args.k]
        if not match:
            raise UsageError(f"profile: no zero with k={args.k} below xmax")
        prof = radial_profile(match[0], args.samples, cfg)
        _emit(args, [{"m": prof.zero.m, "k": prof.zero.k, "r": render_rat(r),
                      "u": v.to_decimal(args.digits), "err": _sci(v.err)}
                     for r, v in zip(prof.radii, prof.values)])
        return EXIT_OK
    recs, ok_all = [], True
    for z in zeros:
        prof = radial_profile(z, args.samples, cfg)
        bound = z.mid * args.radius_tol
        ok = (prof.u_at_1.value == 0 and prof.u_at_1.err == 0
              and prof.du_at_1.contains_zero() and prof.du_radius <= bound)
        ok_all &= ok
        recs.append({
            "m": z.m, "k": z.k, "w_mid": z.mid_decimal(args.digits),
            "u1": prof.u_at_1.to_decimal(args.digits),
            "du1_lo": _sci(prof.du_at_1.lo), "du1_hi": _sci(prof.du_at_1.hi),
            "du1_radius": _sci(prof.du_radius), "radius_bound": _sci(bound),
            "interior_sign_changes": prof.interior_sign_changes, "pass": ok,
        })
    _emit(args, recs)
    return EXIT_OK if ok_all else EXIT_FAIL


def cmd_scan(args) -> int:
    cfg = _cfg(args, True)
    rep = collision_scan(args.max, args.xmax, args.width, cfg, args.grid, args.jobs)
    summary = rep.summary()
    summary["close_pairs"] = len(rep.close_pairs)
    ok = rep.passed and rep.table.max_multiplicity <= 6
    summary["pass"] = ok
    _emit(args, [summary])
    return EXIT_OK if ok else EXIT_FAIL


def _map(fn, items, jobs: int) -> list:
    items = list(items)
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _flatten(report_dict: dict) -> dict:
    d = dict(report_dict)
    params = d.pop("params", {})
    out = {"name": d.pop("name")}
    out.update(params)
    out.update(d)
    return out


def _lemma_task(a):
    m, n, conv = a
    return verify_lemma_formulas(m, n, convention=conv).as_dict()


def _recursion_task(a):
    m, n = a
    return verify_recursion_series(m, n).as_dict()


def _symbolic_task(m):
    return verify_recursion_symbolic(m).as_dict()


def _report_exit(args, dicts: list[dict]) -> int:
    recs = [_flatten(d) for d in dicts]
    _emit(args, recs)
    return EXIT_OK if all(r["pass"] for r in recs) else EXIT_FAIL


def _coords_payload(max_index: int) -> list:
    coords_F(max_index)
    return [[[render_rat(c) for c in p.coeffs] for p in row] for row in coords_table()[: max_index + 1]]


def _load_coords_payload(payload: list) -> None:
    load_coords_table([tuple(PolyQ([Fraction(c) for c in p]) for p in row) for row in payload])


def cmd_verify(args) -> int:
    suite = args.suite
    if suite == "lemma":
        return _report_exit(args, _map(_lemma_task, [(m, args.order, not args.skip_negative_orders) for m in args.m], args.jobs))
    if suite == "recursion":
        return _report_exit(args, _map(_recursion_task, [(m, args.order) for m in args.m], args.jobs))
    if suite == "recursion-symbolic":
        return _report_exit(args, _map(_symbolic_task, args.m, args.jobs))
    if suite == "basematrix":
        return _report_exit(args, [verify_base_matrix().as_dict()])
    if suite == "fourform":
        payload = _cached(args, {"op": "coords_F", "max": args.max}, lambda: _coords_payload(args.max))
        _load_coords_payload(payload)
        try:
            rep = claim_scan(args.max, args.jobs)
        except CertificateViolation as exc:
            _emit(args, [{"name": "fourform", "pass": False, "offending": str(exc)}])
            return EXIT_FAIL
        _emit(args, [c.as_dict() for c in rep.certificates])
        _note(json.dumps(rep.summary(), separators=(",", ":")))
        return EXIT_OK if rep.passed else EXIT_FAIL
    if suite in ("ode", "residuals"):
        return _residual_suite(args)
    raise UsageError(f"unknown suite {suite}")


def residual_samples(count: int, seed: int, mmax: int, xlo: Fraction, xhi: Fraction) -> list[tuple[int, Fraction]]:
    """Deterministic (m, x) samples with x a multiple of 1/1000 in (xlo, xhi]."""
    rng = random.Random(seed)
    lo = int(xlo * 1000) + 1
    hi = int(xhi * 1000)
    return [(rng.randint(0, mmax), Fraction(rng.randint(lo, hi), 1000)) for _ in range(count)]


def _residual_task(a):
    checks, m, x, prec, target, scaled = a
    cfg = EvalConfig(prec_bits=prec, target_abs_err=target, scaled=scaled)
    out = []
    for name in checks:
        if name == "recursion":
            r = recursion_residual(m, x, cfg)
        else:
            r = ode_residual(name[-1], m, x, cfg)
        out.append((name, m, render_rat(x), r.contains_zero(), r.err <= target, abs(r.value) <= r.err,
                    float(r.err), r.prec_bits))
    return out


def _residual_suite(args) -> int:
    checks = ("ode-J", "ode-I") if args.suite == "ode" else ("recursion", "ode-J", "ode-I")
    scaled = bool(args.scaled)
    samples = residual_samples(args.count, args.seed, args.mmax, args.xlo, args.xhi)
    tasks = [(checks, m, x, args.prec, args.target, scaled) for m, x in samples]
    results = [row for rows in _map(_residual_task, tasks, args.jobs) for row in rows]
    recs = []
    for name in checks:
        rows = [r for r in results if r[0] == name]
        bad = [f"m={r[1]} x={r[2]}" for r in rows if not (r[3] and r[4] and r[5])]
        recs.append({
            "name": name, "count": len(rows), "seed": args.seed, "prec": args.prec, "scaled": scaled,
            "target": _sci(args.target), "contains_zero": sum(r[3] for r in rows),
            "err_within_target": sum(r[4] for r in rows), "max_err": f"{max(r[6] for r in rows):.6e}",
            "max_prec_bits": max(r[7] for r in rows), "pass": not bad, "offending": bad[0] if bad else None,
        })
    _emit(args, recs)
    return EXIT_OK if all(r["pass"] for r in recs) else EXIT_FAIL


COMMANDS = {
    "eval": cmd_eval,
    "series": cmd_series,
    "zeros": cmd_zeros,
    "spectrum": cmd_spectrum,
    "profile": cmd_profile,
    "scan-collisions": cmd_scan,
    "verify": cmd_verify,
}


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        t0 = time.perf_counter()
        status = COMMANDS[args.command](args)
        log.info("%s finished in %.2fs", args.command, time.perf_counter() - t0)
        return status
    except UsageError as exc:
        _note(str(exc))
        return EXIT_USAGE
    except SeriesTruncationError as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE
    except PrecisionExhausted as exc:
        _note(f"precision exhausted: {exc}")
        return EXIT_PRECISION
    except ValueError as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
