"""Exact checks of the Bessel cross-product identities.

Two independent tracks:

* truncated power series with rational coefficients (``series_*``), where
  an identity passes when its residual is the zero series to its valid order;
* coordinates over Q(z) in the basis (I0 J0, I0' J0, I0 J0', I0' J0'),
  where an identity passes when the residual vector is exactly zero.

Orders below zero follow J_{-n} = (-1)^n J_n and I_{-n} = I_n.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .exact_algebra import (
    PolyQ,
    RatFunQ,
    SeriesQ,
    SeriesTruncationError,
    det4,
    det_cofactor,
    render_rat,
    series_times_ratfun,
)

BASIS_NAMES = ("I0*J0", "I0'*J0", "I0*J0'", "I0'*J0'")

SeriesFn = Callable[[int, int], SeriesQ]


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class IdentityReport:
    name: str
    params: tuple[tuple[str, int | str], ...]
    passed: bool
    checked: tuple[str, ...] = ()
    skipped: tuple[str, ...] = ()
    offending: str | None = None
    valid_order: int | None = None
    extra: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        d = {
            "name": self.name,
            "params": dict(self.params),
            "pass": self.passed,
            "checked": list(self.checked),
            "skipped": list(self.skipped),
            "offending": self.offending,
        }
        if self.valid_order is not None:
            d["valid_order"] = self.valid_order
        d.update(dict(self.extra))
        return d

    def to_record(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))


def _describe_series_residual(label: str, r: SeriesQ) -> str | None:
    t = r.first_nonzero()
    if t is None:
        return None
    e, c = t
    return f"{label}: z^{e} coefficient {render_rat(c)}"


# ---------------------------------------------------------------------------
# Series track


@lru_cache(maxsize=None)
def _series_bessel(m: int, N: int, alternating: bool) -> SeriesQ:
    n = abs(m)
    sign = -1 if (alternating and m < 0 and n % 2) else 1
    terms = {}
    k = 0
    while 2 * k + n < N:
        c = Fraction(1, math.factorial(k) * math.factorial(n + k) * 2 ** (2 * k + n))
        if alternating and k % 2:
            c = -c
        terms[2 * k + n] = sign * c
        k += 1
    return SeriesQ.from_dict(terms, N)


def series_J(m: int, N: int) -> SeriesQ:
    """Taylor series of J_m valid modulo z**N."""
    return _series_bessel(m, N, True)


def series_I(m: int, N: int) -> SeriesQ:
    return _series_bessel(m, N, False)


def series_W(m: int, N: int, *, via: str = "definition", J: SeriesFn = series_J, I: SeriesFn = series_I) -> SeriesQ:
    """Series of W_m valid modulo z**(N-1)."""
    if via == "definition":
        i, j = I(m, N), J(m, N)
        w = i.deriv() * j - i * j.deriv()
    elif via == "lemma":
        w = I(m + 1, N) * J(m, N) + I(m, N) * J(m + 1, N)
    else:
        raise ValueError(f"unknown route {via!r}")
    return w.truncate(N - 1)


def _zero_check(label: str, residual: SeriesQ, offending: list[str], orders: list[int]):
    orders.append(residual.order)
    msg = _describe_series_residual(label, residual)
    if msg is not None:
        offending.append(msg)


def verify_lemma_formulas(
    m: int,
    N: int,
    *,
    convention: bool = True,
    J: SeriesFn = series_J,
    I: SeriesFn = series_I,
) -> IdentityReport:
    """Check the six cross-product formulas (a)-(f) for W_m on series.

    (a) W_m = I_{m+1} J_m + I_m J_{m+1}
    (b) W_m = I_{m-1} J_m - I_m J_{m-1}
    (c) W_{m-1} + W_{m+1} = (4m/z) I_m J_m
    (d) W_{m-1} - W_{m+1} = 2 (I_m J_m)'
    (e) W_m + W_{m+1} = 2 I_m J_{m+1}
    (f) W_m - W_{m+1} = 2 I_{m+1} J_m

    With ``convention=False`` and ``m == 0`` the formulas that involve order
    -1 ((b), (c), (d)) are skipped instead of using J_{-1} = -J_1, I_{-1} = I_1.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if N < 2 * m + 8:
        raise SeriesTruncationError(f"order {N} too short for m={m}; need N >= {2 * m + 8}")

    def W(n: int) -> SeriesQ:
        return series_W(n, N, J=J, I=I)

    Jm, Jp, Jn = J(m, N), J(m + 1, N), J(m - 1, N)
    Im, Ip, In = I(m, N), I(m + 1, N), I(m - 1, N)
    Wm, Wp = W(m), W(m + 1)
    residuals: dict[str, Callable[[], SeriesQ]] = {
        "a": lambda: Wm - (Ip * Jm + Im * Jp),
        "b": lambda: Wm - (In * Jm - Im * Jn),
        "c": lambda: (W(m - 1) + Wp) - (Im * Jm).shift(-1).scale(4 * m),
        "d": lambda: (W(m - 1) - Wp) - (Im * Jm).deriv().scale(2),
        "e": lambda: (Wm + Wp) - (Im * Jp).scale(2),
        "f": lambda: (Wm - Wp) - (Ip * Jm).scale(2),
    }
    skip = {"b", "c", "d"} if (m == 0 and not convention) else set()
    offending: list[str] = []
    orders: list[int] = []
    checked = []
    for label, fn in residuals.items():
        if label in skip:
            continue
        checked.append(label)
        _zero_check(f"({label})", fn(), offending, orders)
    return IdentityReport(
        name="lemma",
        params=(("m", m), ("N", N), ("convention", "J_-1=-J_1,I_-1=I_1" if convention else "skip")),
        passed=not offending,
        checked=tuple(checked),
        skipped=tuple(sorted(skip)),
        offending=offending[0] if offending else None,
        valid_order=min(orders),
    )


def recursion_alpha(m: int) -> Fraction:
    return Fraction(4 * (m + 2) * (m + 3))


def recursion_beta(m: int) -> Fraction:
    return Fraction(m + 3, m + 1)


def verify_recursion_series(
    m: int,
    N: int,
    *,
    alpha: Fraction | None = None,
    beta: Fraction | None = None,
) -> IdentityReport:
    """Series check of the length-four recursion, multiplied through by z^2:

    z^2 (W_{m+2} + W_{m+4}) - alpha (W_{m+1} - W_{m+3}) + beta z^2 (W_m + W_{m+2}) = 0
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if N < 2 * m + 12:
        raise SeriesTruncationError(f"order {N} too short for m={m}; need N >= {2 * m + 12}")
    a = recursion_alpha(m) if alpha is None else Fraction(alpha)
    b = recursion_beta(m) if beta is None else Fraction(beta)
    W = [series_W(m + i, N) for i in range(5)]
    res = ((W[2] + W[4]).shift(2) - (W[1] - W[3]).scale(a) + (W[0] + W[2]).shift(2).scale(b))
    msg = _describe_series_residual("residual", res)
    return IdentityReport(
        name="recursion",
        params=(("m", m), ("N", N)),
        passed=msg is None,
        checked=("recursion",),
        offending=msg,
        valid_order=res.order,
        extra=(("alpha", render_rat(a)), ("beta", render_rat(b))),
    )


# ---------------------------------------------------------------------------
# Q(z) coordinate track

Vec2 = tuple[RatFunQ, RatFunQ]


@dataclass(frozen=True)
class BasisVecQz:
    """Coordinates over (I0 J0, I0' J0, I0 J0', I0' J0')."""

    coords: tuple[RatFunQ, RatFunQ, RatFunQ, RatFunQ]

    def __add__(self, other: BasisVecQz) -> BasisVecQz:
        return BasisVecQz(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: BasisVecQz) -> BasisVecQz:
        return BasisVecQz(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def scale(self, c: RatFunQ | Fraction | int) -> BasisVecQz:
        return BasisVecQz(tuple(a * c for a in self.coords))

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.coords)

    def render(self) -> str:
        return "(" + ", ".join(a.render("z") for a in self.coords) + ")"

    def first_nonzero(self) -> str | None:
        for name, a in zip(BASIS_NAMES, self.coords):
            if not a.is_zero():
                return f"{name}: {a.render('z')}"
        return None


_TWO_OVER_Z = RatFunQ.z_power(-1, 2)


@lru_cache(maxsize=None)
def _j_coords(n: int) -> Vec2:
    """J_n = p J_0 + q J_0'."""
    if n == 0:
        return RatFunQ(1), RatFunQ(0)
    if n == 1:
        return RatFunQ(0), RatFunQ(-1)
    # J_n = (2(n-1)/z) J_{n-1} - J_{n-2}
    p1, q1 = _j_coords(n - 1)
    p2, q2 = _j_coords(n - 2)
    c = _TWO_OVER_Z * (n - 1)
    return c * p1 - p2, c * q1 - q2


@lru_cache(maxsize=None)
def _i_coords(n: int) -> Vec2:
    """I_n = r I_0 + s I_0'."""
    if n == 0:
        return RatFunQ(1), RatFunQ(0)
    if n == 1:
        return RatFunQ(0), RatFunQ(1)
    # I_n = I_{n-2} - (2(n-1)/z) I_{n-1}
    r1, s1 = _i_coords(n - 1)
    r2, s2 = _i_coords(n - 2)
    c = _TWO_OVER_Z * (n - 1)
    return r2 - c * r1, s2 - c * s1


def _outer(i: Vec2, j: Vec2) -> BasisVecQz:
    (r, s), (p, q) = i, j
    return BasisVecQz((r * p, s * p, r * q, s * q))


@lru_cache(maxsize=None)
def reduce_to_basis(m: int) -> BasisVecQz:
    """Exact coordinates of W_m over (I0 J0, I0' J0, I0 J0', I0' J0')."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    m_over_z = RatFunQ.z_power(-1, m)
    Jm, Jn = _j_coords(m), _j_coords(m + 1)
    Im, In = _i_coords(m), _i_coords(m + 1)
    # I_m' = (m/z) I_m + I_{m+1},  J_m' = (m/z) J_m - J_{m+1}
    Ip = (m_over_z * Im[0] + In[0], m_over_z * Im[1] + In[1])
    Jp = (m_over_z * Jm[0] - Jn[0], m_over_z * Jm[1] - Jn[1])
    return _outer(Ip, Jm) - _outer(Im, Jp)


def _z(k: int, c=1) -> RatFunQ:
    return RatFunQ.z_power(k, c)


def base_matrix_expected() -> list[list[RatFunQ]]:
    """The known 4x4 matrix expressing (W0..W3) in the product basis."""
    one = RatFunQ(1)
    zero = RatFunQ(0)
    return [
        [zero, one, -one, zero],
        [zero, -one, -one, zero],
        [zero, -one, one, _z(-1, -4)],
        [_z(-1, -8), one + _z(-2, 16), one - _z(-2, 16), _z(-3, 32)],
    ]


def verify_base_matrix() -> IdentityReport:
    expected = base_matrix_expected()
    rows = [list(reduce_to_basis(m).coords) for m in range(4)]
    mismatches = [
        f"row W_{i} col {BASIS_NAMES[j]}: got {rows[i][j].render()} expected {expected[i][j].render()}"
        for i in range(4)
        for j in range(4)
        if rows[i][j] != expected[i][j]
    ]
    det = det4(rows)
    det_oracle = det_cofactor(rows)
    invertible = not det.is_zero()
    problems = list(mismatches)
    if det != det_oracle:
        problems.append(f"determinant mismatch: bareiss {det.render()} vs cofactor {det_oracle.render()}")
    if not invertible:
        problems.append("matrix is singular")
    return IdentityReport(
        name="basematrix",
        params=(),
        passed=not problems,
        checked=("rows", "det", "invertible"),
        offending=problems[0] if problems else None,
        extra=(("det", det.render("z")), ("invertible", invertible)),
    )


def verify_recursion_symbolic(
    m: int,
    *,
    alpha: Fraction | None = None,
    beta: Fraction | None = None,
) -> IdentityReport:
    """The recursion as an identity between coordinate vectors in Q(z)^4."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    a = recursion_alpha(m) if alpha is None else Fraction(alpha)
    b = recursion_beta(m) if beta is None else Fraction(beta)
    V = [reduce_to_basis(m + i) for i in range(5)]
    res = (V[2] + V[4]) - (V[1] - V[3]).scale(_z(-2, a)) + (V[0] + V[2]).scale(b)
    msg = res.first_nonzero()
    return IdentityReport(
        name="recursion-symbolic",
        params=(("m", m),),
        passed=msg is None,
        checked=("recursion",),
        offending=msg,
        extra=(("alpha", render_rat(a)), ("beta", render_rat(b))),
    )


def basis_series(N: int) -> tuple[SeriesQ, SeriesQ, SeriesQ, SeriesQ]:
    i0, j0 = series_I(0, N), series_J(0, N)
    i0p, j0p = i0.deriv(), j0.deriv()
    return (i0 * j0, i0p * j0, i0 * j0p, i0p * j0p)


def series_from_basis(v: BasisVecQz, N: int) -> SeriesQ:
    """Substitute the basis series into coordinates (denominators must be powers of z)."""
    parts = [series_times_ratfun(s, c) for s, c in zip(basis_series(N), v.coords) if not c.is_zero()]
    if not parts:
        return SeriesQ(0, (), N - 1)
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out


def denominators_are_z_powers(v: BasisVecQz) -> bool:
    return all(c.den.is_monomial() for c in v.coords)
