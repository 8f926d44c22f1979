"""Certified zeros of W_m and J_m, clamped-disk eigenvalue tables, collision scans.

A zero is reported as an exact rational bracket [lo, hi] with
sign(W_m(lo)) != sign(W_m(hi)), both signs decided by error-bounded
evaluation, and with W_m' of one fixed sign at lo, at the midpoint and at
hi (the simple-zero certificate).  Evaluation uses e^{-x} W_m by default,
which has the same zeros and signs as W_m.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .bessel_eval import (
    MAX_DOUBLINGS,
    EvalConfig,
    ErrFloat,
    PrecisionExhausted,
    _exp_neg_at,
    _I_at,
    _J_at,
    _Jp_at,
    _W_at,
    _Wp_at,
    decimal_str,
)
from .exact_algebra import render_rat

DEFAULT_WIDTH = Fraction(1, 2**64)
DEFAULT_GRID = Fraction(1, 100)
DEFAULT_CFG = EvalConfig(prec_bits=128, scaled=True)
MAX_GRID_HALVINGS = 8
MID_PLACES = 25

Evaluator = Callable[[Fraction, int], ErrFloat]


class ZeroCertificationError(ArithmeticError):
    """A bracket could not be certified as holding a simple zero."""


@dataclass(frozen=True)
class ZeroRecord:
    m: int
    k: int
    lo: Fraction
    hi: Fraction
    prec_bits: int
    kind: str = "W"

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def lambda_lo(self) -> Fraction:
        """Lower end of the eigenvalue enclosure (w^4 for the plate, j^2 for the membrane)."""
        return self.lo**4 if self.kind == "W" else self.lo**2

    @property
    def lambda_hi(self) -> Fraction:
        return self.hi**4 if self.kind == "W" else self.hi**2

    @property
    def mult(self) -> int:
        return 1 if self.m == 0 else 2

    def mid_decimal(self, places: int = MID_PLACES) -> str:
        return decimal_str(self.mid, places)

    def overlaps(self, other: ZeroRecord) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def gap(self, other: ZeroRecord) -> Fraction:
        """Distance between the two enclosures (negative when they overlap)."""
        return max(other.lo - self.hi, self.lo - other.hi)

    def as_row(self, places: int = MID_PLACES) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "lo": render_rat(self.lo),
            "hi": render_rat(self.hi),
            "mid_decimal": self.mid_decimal(places),
            "lambda_lo": _decimal_floor(self.lambda_lo, places),
            "lambda_hi": _decimal_ceil(self.lambda_hi, places),
            "mult": self.mult,
        }


def _decimal_floor(q: Fraction, places: int) -> str:
    n = math.floor(q * 10**places)
    return decimal_str(Fraction(n, 10**places), places)


def _decimal_ceil(q: Fraction, places: int) -> str:
    n = math.ceil(q * 10**places)
    return decimal_str(Fraction(n, 10**places), places)


# ---------------------------------------------------------------------------
# Sign decisions


def _evaluators(kind: str, m: int, scaled: bool) -> tuple[Evaluator, Evaluator]:
    if kind == "W":
        return (lambda x, p: _W_at(m, x, p, scaled)), (lambda x, p: _Wp_at(m, x, p, scaled))
    if kind == "J":
        return (lambda x, p: _J_at(m, x, p)), (lambda x, p: _Jp_at(m, x, p))
    raise ValueError(f"unknown function kind {kind!r}")


def _sign(fn: Evaluator, x: Fraction, prec: int) -> tuple[int, int]:
    """Decided sign and the precision that decided it; sign 0 when undecidable."""
    p = prec
    for _ in range(MAX_DOUBLINGS + 1):
        s = fn(x, p).sign()
        if s:
            return s, p
        p *= 2
    return 0, p // 2


class _Prober:
    def __init__(self, f: Evaluator, df: Evaluator, prec: int):
        self.f, self.df, self.prec = f, df, prec
        self.max_prec = prec

    def value_sign(self, x: Fraction) -> int:
        s, p = _sign(self.f, x, self.prec)
        if s == 0:
            raise PrecisionExhausted(f"cannot decide the sign at x = {x}")
        self.max_prec = max(self.max_prec, p)
        return s

    def deriv_sign(self, x: Fraction) -> int:
        s, p = _sign(self.df, x, self.prec)
        self.max_prec = max(self.max_prec, p)
        return s

    def probe(self, x: Fraction) -> tuple[int, int]:
        return self.value_sign(x), self.deriv_sign(x)


def _cell_brackets(pr: _Prober, x0, v0, x1, v1, depth: int) -> list[tuple[Fraction, Fraction, int, int]]:
    # A derivative sign change (or an undecided derivative) inside the cell
    # can hide a pair of zeros: halve the cell until it is monotone.
    if (v0[1] != v1[1] or v0[1] == 0) and depth < MAX_GRID_HALVINGS:
        xm = (x0 + x1) / 2
        vm = pr.probe(xm)
        return (_cell_brackets(pr, x0, v0, xm, vm, depth + 1)
                + _cell_brackets(pr, xm, vm, x1, v1, depth + 1))
    if v0[0] != v1[0]:
        return [(x0, x1, v0[0], v1[0])]
    return []


def _refine(pr: _Prober, lo: Fraction, hi: Fraction, slo: int, width: Fraction) -> tuple[Fraction, Fraction]:
    while hi - lo > width:
        mid = (lo + hi) / 2
        if pr.value_sign(mid) == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _certify(pr: _Prober, lo: Fraction, hi: Fraction) -> None:
    if pr.value_sign(lo) == pr.value_sign(hi):
        raise ZeroCertificationError(f"no sign change on [{lo}, {hi}]")
    ds = {pr.deriv_sign(lo), pr.deriv_sign((lo + hi) / 2), pr.deriv_sign(hi)}
    if len(ds) != 1 or 0 in ds:
        raise ZeroCertificationError(f"derivative not of one sign on [{lo}, {hi}]")


def _find(kind: str, m: int, xmax, width, cfg: EvalConfig, grid) -> list[ZeroRecord]:
    xmax, width, grid = Fraction(xmax), Fraction(width), Fraction(grid)
    if xmax <= 0 or width <= 0 or grid <= 0:
        raise ValueError("xmax, width and grid must be positive")
    f, df = _evaluators(kind, m, cfg.scaled)
    pr = _Prober(f, df, cfg.prec_bits)
    n = math.ceil(xmax / grid)
    xs = [grid * i for i in range(1, n + 1)]
    vals = [pr.probe(x) for x in xs]
    brackets = []
    for i in range(n - 1):
        brackets += _cell_brackets(pr, xs[i], vals[i], xs[i + 1], vals[i + 1], 0)
    out = []
    for lo, hi, slo, _ in brackets:
        lo, hi = _refine(pr, lo, hi, slo, width)
        _certify(pr, lo, hi)
        if lo <= xmax:
            out.append((lo, hi))
    return [ZeroRecord(m, k, lo, hi, pr.max_prec, kind) for k, (lo, hi) in enumerate(out, start=1)]


def find_zeros(m: int, xmax, width=DEFAULT_WIDTH, cfg: EvalConfig = DEFAULT_CFG, grid=DEFAULT_GRID) -> list[ZeroRecord]:
    """Certified positive zeros w_{m,k} <= xmax of the cross product W_m."""
    return _find("W", m, xmax, width, cfg, grid)


def find_zeros_vm(m: int, xmax, width=DEFAULT_WIDTH, cfg: EvalConfig = DEFAULT_CFG, grid=DEFAULT_GRID) -> list[ZeroRecord]:
    """Certified positive zeros j_{m,k} <= xmax of J_m (membrane problem)."""
    return _find("J", m, xmax, width, cfg, grid)


def recheck_zero(z: ZeroRecord, cfg: EvalConfig = DEFAULT_CFG) -> bool:
    """Re-run the sign-change and simple-zero certificates from stored lo/hi."""
    f, df = _evaluators(z.kind, z.m, cfg.scaled)
    pr = _Prober(f, df, cfg.prec_bits)
    try:
        _certify(pr, z.lo, z.hi)
    except (ZeroCertificationError, PrecisionExhausted):
        return False
    return True


def _find_task(args):
    kind, m, xmax, width, cfg, grid = args
    return _find(kind, m, xmax, width, cfg, grid)


def zeros_for_orders(
    orders, xmax, width=DEFAULT_WIDTH, cfg: EvalConfig = DEFAULT_CFG, grid=DEFAULT_GRID,
    jobs: int = 1, kind: str = "W",
) -> dict[int, list[ZeroRecord]]:
    orders = list(orders)
    tasks = [(kind, m, Fraction(xmax), Fraction(width), cfg, Fraction(grid)) for m in orders]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_find_task, tasks))
    else:
        results = [_find_task(t) for t in tasks]
    return dict(zip(orders, results))


# ---------------------------------------------------------------------------
# Spectrum tables


@dataclass(frozen=True)
class SpectrumTable:
    rows: tuple[ZeroRecord, ...]
    clusters: tuple[tuple[int, ...], ...]  # row indices, enclosures overlapping

    @property
    def cluster_multiplicities(self) -> list[int]:
        return [sum(self.rows[i].mult for i in c) for c in self.clusters]

    @property
    def max_multiplicity(self) -> int:
        return max(self.cluster_multiplicities, default=0)

    @property
    def all_singletons(self) -> bool:
        return all(len(c) == 1 for c in self.clusters)

    def ground_state(self) -> ZeroRecord:
        return self.rows[0]

    def ground_state_isolated(self) -> bool:
        """The smallest zero belongs to m = 0 and lies strictly below every other enclosure."""
        g = self.rows[0]
        return g.m == 0 and all(g.hi < r.lo for r in self.rows[1:])


def build_table(zeros: list[ZeroRecord]) -> SpectrumTable:
    rows = sorted(zeros, key=lambda z: (z.mid, z.m, z.k))
    clusters: list[list[int]] = []
    reach = None
    for i, z in enumerate(rows):
        if clusters and z.lo <= reach:
            clusters[-1].append(i)
            reach = max(reach, z.hi)
        else:
            clusters.append([i])
            reach = z.hi
    return SpectrumTable(tuple(rows), tuple(tuple(c) for c in clusters))


def eigenvalues_vp(
    max_order: int, xmax, width=DEFAULT_WIDTH, cfg: EvalConfig = DEFAULT_CFG,
    grid=DEFAULT_GRID, jobs: int = 1,
) -> SpectrumTable:
    """All plate frequencies w_{m,k} <= xmax for m <= max_order, with multiplicities."""
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    by_m = zeros_for_orders(range(max_order + 1), xmax, width, cfg, grid, jobs)
    return build_table([z for zs in by_m.values() for z in zs])


# ---------------------------------------------------------------------------
# Collision scan


@dataclass(frozen=True)
class CollisionReport:
    max_order: int
    xmax: Fraction
    width: Fraction
    zero_count: int
    adjacent_ok: bool  # W_m and W_{m+1}
    skip_one_ok: bool  # W_m and W_{m+2}
    overlaps: tuple[tuple[ZeroRecord, ZeroRecord], ...]
    min_gap: Fraction
    min_gap_pair: tuple[ZeroRecord, ZeroRecord] | None
    close_pairs: tuple[tuple[ZeroRecord, ZeroRecord, Fraction], ...] = field(default=())
    table: SpectrumTable | None = None

    @property
    def passed(self) -> bool:
        return self.adjacent_ok and self.skip_one_ok

    def summary(self) -> dict:
        d = {
            "name": "scan-collisions",
            "max_order": self.max_order,
            "xmax": render_rat(self.xmax),
            "width": render_rat(self.width),
            "zeros": self.zero_count,
            "pattern_m_m+1": self.adjacent_ok,
            "pattern_m_m+2": self.skip_one_ok,
            "pass": self.passed,
            "min_gap": decimal_str(self.min_gap, 12),
        }
        if self.min_gap_pair:
            a, b = self.min_gap_pair
            d["min_gap_pair"] = f"w[{a.m},{a.k}] w[{b.m},{b.k}]"
        if self.table is not None:
            d["max_cluster_multiplicity"] = self.table.max_multiplicity
            d["all_singletons"] = self.table.all_singletons
            d["ground_state_isolated"] = self.table.ground_state_isolated()
        return d


def _refine_record(z: ZeroRecord, width: Fraction, cfg: EvalConfig) -> ZeroRecord:
    f, df = _evaluators(z.kind, z.m, cfg.scaled)
    pr = _Prober(f, df, max(cfg.prec_bits, z.prec_bits))
    slo = pr.value_sign(z.lo)
    lo, hi = _refine(pr, z.lo, z.hi, slo, width)
    _certify(pr, lo, hi)
    return ZeroRecord(z.m, z.k, lo, hi, pr.max_prec, z.kind)


def collision_scan(
    max_order: int, xmax, width=DEFAULT_WIDTH, cfg: EvalConfig = DEFAULT_CFG,
    grid=DEFAULT_GRID, jobs: int = 1, report_threshold=Fraction(1, 100), refinements: int = 4,
) -> CollisionReport:
    """Check that W_m, W_{m+1} and W_m, W_{m+2} share no zero in (0, xmax]."""
    xmax, width = Fraction(xmax), Fraction(width)
    by_m = zeros_for_orders(range(max_order + 1), xmax, width, cfg, grid, jobs)

    def bad_pairs():
        out = []
        for m in range(max_order + 1):
            for d in (1, 2):
                for a in by_m.get(m, []):
                    for b in by_m.get(m + d, []):
                        if a.overlaps(b):
                            out.append((a, b))
        return out

    overlaps = bad_pairs()
    w = width
    for _ in range(refinements):
        if not overlaps:
            break
        # a genuine joint zero would survive any refinement
        w = w / 2**8
        touched = {(z.m, z.k) for pair in overlaps for z in pair}
        for m, zs in by_m.items():
            by_m[m] = [_refine_record(z, w, cfg) if (z.m, z.k) in touched else z for z in zs]
        overlaps = bad_pairs()

    allz = sorted((z for zs in by_m.values() for z in zs), key=lambda z: (z.lo, z.m))
    min_gap, min_pair = None, None
    close = []
    for i, a in enumerate(allz):
        for b in allz[i + 1:]:
            if b.lo - a.hi > max(report_threshold, min_gap or 0):
                break
            if a.m == b.m:
                continue
            g = a.gap(b)
            if min_gap is None or g < min_gap:
                min_gap, min_pair = g, (a, b)
            if g < report_threshold:
                close.append((a, b, g))
    if min_gap is None:
        # no close pair found within the threshold window; fall back to the full search
        for i, a in enumerate(allz):
            for b in allz[i + 1:]:
                if a.m != b.m and (min_gap is None or a.gap(b) < min_gap):
                    min_gap, min_pair = a.gap(b), (a, b)
    adjacent_ok = not any(abs(a.m - b.m) == 1 for a, b in overlaps)
    skip_ok = not any(abs(a.m - b.m) == 2 for a, b in overlaps)
    return CollisionReport(
        max_order=max_order,
        xmax=xmax,
        width=width,
        zero_count=len(allz),
        adjacent_ok=adjacent_ok,
        skip_one_ok=skip_ok,
        overlaps=tuple(overlaps),
        min_gap=min_gap if min_gap is not None else Fraction(0),
        min_gap_pair=min_pair,
        close_pairs=tuple(close),
        table=build_table(allz),
    )


# ---------------------------------------------------------------------------
# Radial profiles


@dataclass(frozen=True)
class RadialProfile:
    zero: ZeroRecord
    radii: tuple[Fraction, ...]
    values: tuple[ErrFloat, ...]
    u_at_1: ErrFloat
    du_at_1: ErrFloat
    interior_sign_changes: int
    scaled: bool

    @property
    def du_radius(self) -> Fraction:
        return abs(self.du_at_1.value) + self.du_at_1.err


def radial_profile(z: ZeroRecord, n_samples: int = 11, cfg: EvalConfig = DEFAULT_CFG) -> RadialProfile:
    """Sample u(r) = I_m(w) J_m(w r) - J_m(w) I_m(w r) on [0, 1] at w = mid of the bracket.

    With ``cfg.scaled`` the profile is multiplied by e^{-w}.  u(1) vanishes
    identically; u'(1) = -w W_m(w) is enclosed over the whole bracket by the
    hull of its endpoint values, which have opposite signs.
    """
    if z.kind != "W":
        raise ValueError("radial profiles are defined for plate zeros")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    m, w, p = z.m, z.mid, max(cfg.prec_bits, z.prec_bits)
    scale = _exp_neg_at(w, p) if cfg.scaled else ErrFloat(Fraction(1), Fraction(0), p)
    Iw = _I_at(m, w, p, False) * scale
    Jw = _J_at(m, w, p)
    radii = tuple(Fraction(i, n_samples - 1) for i in range(n_samples))
    values = []
    for r in radii:
        if r == 1:
            values.append(ErrFloat(Fraction(0), Fraction(0), p))
            continue
        x = w * r
        values.append(Iw * _J_at(m, x, p) - Jw * (_I_at(m, x, p, False) * scale))
    ends = [-(_W_at(m, x, p, cfg.scaled) * x) for x in (z.lo, z.hi)]
    lo = min(e.lo for e in ends)
    hi = max(e.hi for e in ends)
    du = ErrFloat((lo + hi) / 2, (hi - lo) / 2, p)
    signs = [v.sign() for v in values[1:-1] if v.sign() != 0]
    changes = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    return RadialProfile(z, radii, tuple(values), values[-1], du, changes, cfg.scaled)
