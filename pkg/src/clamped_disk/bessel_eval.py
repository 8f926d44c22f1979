"""Error-bounded evaluation of J_m, I_m and the cross product W_m.

Every value is an :class:`ErrFloat`: a rational midpoint with a rigorous
absolute error bound.  Series are summed in fixed point on Python integers;
each truncating division contributes at most one unit in the last place,
and that bound is propagated term to term, so the reported error covers
both rounding and the truncated tail.

``prec_bits`` is the working precision relative to the leading term of each
series.  The public functions retry with doubled precision (at most four
times) until ``target_abs_err`` is met, then give up with
:class:`PrecisionExhausted`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .exact_algebra import as_rat

MAX_DOUBLINGS = 4
_GUARD = 16
_ERR_BITS = 40


class PrecisionExhausted(ArithmeticError):
    """The requested accuracy could not be reached at the maximal precision."""


# ---------------------------------------------------------------------------
# ErrFloat


def _round_value(v: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Truncate ``v`` to ``prec`` significant bits; returns (value, error bound)."""
    n, d = v.numerator, v.denominator
    if n == 0 or d & (d - 1) == 0 and abs(n).bit_length() <= prec:
        return v, Fraction(0)
    shift = prec - (abs(n).bit_length() - d.bit_length())
    if shift >= 0:
        q, r = divmod(n << shift, d)
        if r == 0:
            return Fraction(q, 1 << shift), Fraction(0)
        return Fraction(q, 1 << shift), Fraction(1, 1 << shift)
    q, r = divmod(n, d << -shift)
    if r == 0:
        return Fraction(q << -shift), Fraction(0)
    return Fraction(q << -shift), Fraction(1 << -shift)


def _round_up(e: Fraction) -> Fraction:
    """An upper bound for ``e >= 0`` with a short mantissa."""
    n, d = e.numerator, e.denominator
    if n == 0:
        return e
    shift = _ERR_BITS - (n.bit_length() - d.bit_length())
    if shift >= 0:
        return Fraction(-((-n << shift) // d), 1 << shift)
    return Fraction(-(-n // (d << -shift)) << -shift)


def _coerce_rat(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return as_rat(x)


@dataclass(frozen=True)
class ErrFloat:
    """A real number known to lie in ``[value - err, value + err]``."""

    value: Fraction
    err: Fraction = Fraction(0)
    prec_bits: int = 128

    def __post_init__(self):
        if self.err < 0:
            raise ValueError("error bound must be nonnegative")

    @classmethod
    def exact(cls, q, prec_bits: int = 128) -> ErrFloat:
        return cls(_coerce_rat(q), Fraction(0), prec_bits)

    @property
    def lo(self) -> Fraction:
        return self.value - self.err

    @property
    def hi(self) -> Fraction:
        return self.value + self.err

    def contains(self, q) -> bool:
        q = _coerce_rat(q)
        return self.lo <= q <= self.hi

    def contains_zero(self) -> bool:
        return abs(self.value) <= self.err

    def sign(self) -> int:
        """+1 or -1 when the enclosure excludes zero, else 0."""
        if self.value > self.err:
            return 1
        if self.value < -self.err:
            return -1
        return 0

    def overlaps(self, other: ErrFloat) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def _with(self, value: Fraction, err: Fraction, prec: int) -> ErrFloat:
        v, r = _round_value(value, prec)
        return ErrFloat(v, _round_up(err + r), prec)

    def _prec(self, other) -> int:
        if isinstance(other, ErrFloat):
            return min(self.prec_bits, other.prec_bits)
        return self.prec_bits

    def __add__(self, other) -> ErrFloat:
        if isinstance(other, ErrFloat):
            return self._with(self.value + other.value, self.err + other.err, self._prec(other))
        q = _coerce_rat(other)
        return self._with(self.value + q, self.err, self.prec_bits)

    __radd__ = __add__

    def __neg__(self) -> ErrFloat:
        return ErrFloat(-self.value, self.err, self.prec_bits)

    def __sub__(self, other) -> ErrFloat:
        return self + (-other)

    def __rsub__(self, other) -> ErrFloat:
        return (-self) + other

    def __mul__(self, other) -> ErrFloat:
        if isinstance(other, ErrFloat):
            a, b = self, other
            err = abs(a.value) * b.err + abs(b.value) * a.err + a.err * b.err
            return self._with(a.value * b.value, err, self._prec(other))
        q = _coerce_rat(other)
        return self._with(self.value * q, self.err * abs(q), self.prec_bits)

    __rmul__ = __mul__

    def __truediv__(self, other) -> ErrFloat:
        if isinstance(other, ErrFloat):
            return self * other.reciprocal()
        q = _coerce_rat(other)
        return self._with(self.value / q, self.err / abs(q), self.prec_bits)

    def reciprocal(self) -> ErrFloat:
        if self.contains_zero():
            raise ZeroDivisionError("enclosure contains zero")
        v = self.value
        err = self.err / (abs(v) * (abs(v) - self.err))
        return self._with(1 / v, err, self.prec_bits)

    def __abs__(self) -> ErrFloat:
        return ErrFloat(abs(self.value), self.err, self.prec_bits)

    def __float__(self) -> float:
        return float(self.value)

    def to_decimal(self, places: int = 20) -> str:
        return decimal_str(self.value, places)

    def __str__(self) -> str:
        return f"{decimal_str(self.value, 30)} +/- {float(self.err):.3e}"


def decimal_str(q: Fraction, places: int) -> str:
    """Round-half-even fixed-point rendering with ``places`` fractional digits."""
    n = round(q * 10**places)
    sign = "-" if n < 0 else ""
    digits = str(abs(n)).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


# ---------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class EvalConfig:
    prec_bits: int = 128
    target_abs_err: Fraction = field(default=Fraction(1, 10**30))
    scaled: bool = False

    def __post_init__(self):
        if self.prec_bits < 53:
            raise ValueError("prec_bits must be at least 53")
        object.__setattr__(self, "target_abs_err", _coerce_rat(self.target_abs_err))
        if self.target_abs_err <= 0:
            raise ValueError("target_abs_err must be positive")


def _adaptive(fn: Callable[[int], ErrFloat], cfg: EvalConfig, what: str) -> ErrFloat:
    p = cfg.prec_bits
    for _ in range(MAX_DOUBLINGS + 1):
        r = fn(p)
        if r.err <= cfg.target_abs_err:
            return r
        p *= 2
    raise PrecisionExhausted(
        f"{what}: error {float(r.err):.3e} above target {float(cfg.target_abs_err):.3e} at {p // 2} bits"
    )


def _check_x(x) -> Fraction:
    x = _coerce_rat(x)
    if x < 0:
        raise ValueError("x must be nonnegative")
    return x


# ---------------------------------------------------------------------------
# Fixed-point series kernels


def _log2_lead(m: int, x: Fraction) -> float:
    """log2 of (x/2)^m / m!."""
    return m * (math.log2(x.numerator) - math.log2(x.denominator) - 1) - math.lgamma(m + 1) / math.log(2)


def _log2_peak_ratio(m: int, x: Fraction) -> float:
    """log2 of (largest term / first term) of the Bessel series."""
    q = float(x) ** 2 / 4
    acc, k = 0.0, 1
    while q > k * (m + k):
        acc += math.log2(q / (k * (m + k)))
        k += 1
    return acc


def _bessel_fixed(m: int, x: Fraction, F: int, alternating: bool) -> tuple[int, int]:
    """Sum of (+-1)^k (x/2)^(m+2k) / (k!(m+k)!) scaled by 2**F.

    Returns integers (S, E) with |S - 2**F * true sum| <= E.
    """
    a, b = x.numerator, x.denominator
    num = a**m << F
    den = (b**m << m) * math.factorial(m)
    T, r = divmod(num, den)
    e = 0 if r == 0 else 1
    S, E = T, e
    a2, b2 = a * a, 4 * b * b
    k = 0
    while True:
        k += 1
        d = b2 * k * (m + k)
        T, r = divmod(T * a2, d)
        # |T_k - tau_k| <= |T_{k-1} - tau_{k-1}| * ratio + 1
        e = -(-e * a2 // d) + (1 if r else 0)
        S = S - T if alternating and k & 1 else S + T
        E += e
        # stop once later terms shrink geometrically (ratio <= 1/2) and the
        # current term is below one unit; the tail is then bounded by it.
        if T + e <= 1 and 2 * a2 <= b2 * (k + 1) * (m + k + 1):
            # tail <= t_{k+1} / (1 - r) <= 2 * ratio * t_k <= t_k
            E += T + e
            return S, E


def _exp_fixed(x: Fraction, F: int) -> tuple[int, int]:
    a, b = x.numerator, x.denominator
    T, e = 1 << F, 0
    S, E = T, 0
    k = 0
    while True:
        k += 1
        d = b * k
        T, r = divmod(T * a, d)
        e = -(-e * a // d) + (1 if r else 0)
        S += T
        E += e
        if T + e <= 1 and 2 * a <= b * (k + 1):
            E += T + e
            return S, E


def _frac_bits(prec: int, log2_scale: float) -> int:
    return prec + _GUARD + max(0, -math.floor(log2_scale))


@lru_cache(maxsize=8192)
def _J_at(m: int, x: Fraction, prec: int) -> ErrFloat:
    if m < 0:
        v = _J_at(-m, x, prec)
        return -v if m & 1 else v
    if x == 0:
        return ErrFloat(Fraction(1 if m == 0 else 0), Fraction(0), prec)
    lead = _log2_lead(m, x)
    F = _frac_bits(prec, lead) + math.ceil(_log2_peak_ratio(m, x))
    S, E = _bessel_fixed(m, x, F, alternating=True)
    scale = 1 << F
    return ErrFloat(Fraction(S, scale), _round_up(Fraction(E, scale)), prec)


@lru_cache(maxsize=8192)
def _I_raw(m: int, x: Fraction, prec: int) -> ErrFloat:
    if x == 0:
        return ErrFloat(Fraction(1 if m == 0 else 0), Fraction(0), prec)
    F = _frac_bits(prec, _log2_lead(m, x))
    S, E = _bessel_fixed(m, x, F, alternating=False)
    scale = 1 << F
    return ErrFloat(Fraction(S, scale), _round_up(Fraction(E, scale)), prec)


@lru_cache(maxsize=1024)
def _exp_neg_at(x: Fraction, prec: int) -> ErrFloat:
    if x == 0:
        return ErrFloat(Fraction(1), Fraction(0), prec)
    F = prec + _GUARD
    S, E = _exp_fixed(x, F)
    scale = 1 << F
    return ErrFloat(Fraction(S, scale), _round_up(Fraction(E, scale)), prec).reciprocal()


def _I_at(m: int, x: Fraction, prec: int, scaled: bool) -> ErrFloat:
    v = _I_raw(abs(m), x, prec)
    return v * _exp_neg_at(x, prec) if scaled else v


def _Jp_at(m: int, x: Fraction, prec: int) -> ErrFloat:
    """J_m' = (m/x) J_m - J_{m+1}."""
    j1 = _J_at(m + 1, x, prec)
    if m == 0:
        return -j1
    return _J_at(m, x, prec) * Fraction(m) / x - j1


def _Ip_at(m: int, x: Fraction, prec: int, scaled: bool) -> ErrFloat:
    """I_m' = (m/x) I_m + I_{m+1}."""
    i1 = _I_at(m + 1, x, prec, scaled)
    if m == 0:
        return i1
    return _I_at(m, x, prec, scaled) * Fraction(m) / x + i1


def _W_at(m: int, x: Fraction, prec: int, scaled: bool, via: str = "lemma") -> ErrFloat:
    if x == 0:
        return ErrFloat(Fraction(0), Fraction(0), prec)
    if via == "lemma":
        # W_m = I_{m+1} J_m + I_m J_{m+1}
        return (_I_at(m + 1, x, prec, scaled) * _J_at(m, x, prec)
                + _I_at(m, x, prec, scaled) * _J_at(m + 1, x, prec))
    if via == "definition":
        return (_Ip_at(m, x, prec, scaled) * _J_at(m, x, prec)
                - _I_at(m, x, prec, scaled) * _Jp_at(m, x, prec))
    raise ValueError(f"unknown route {via!r}")


def _Wp_at(m: int, x: Fraction, prec: int, scaled: bool) -> ErrFloat:
    """W_m' = 2 I_m J_m - W_m / x (times e^{-x} when scaled)."""
    return 2 * _I_at(m, x, prec, scaled) * _J_at(m, x, prec) - _W_at(m, x, prec, scaled) / x


def recursion_coeffs(m: int, x: Fraction) -> tuple[Fraction, Fraction]:
    """(4(m+2)(m+3)/x^2, (m+3)/(m+1))."""
    return Fraction(4 * (m + 2) * (m + 3)) / (x * x), Fraction(m + 3, m + 1)


def _recursion_residual_at(m: int, x: Fraction, prec: int, scaled: bool) -> ErrFloat:
    W = [_W_at(m + i, x, prec, scaled) for i in range(5)]
    alpha, beta = recursion_coeffs(m, x)
    lhs = W[2] + W[4]
    rhs = (W[1] - W[3]) * alpha - (W[0] + W[2]) * beta
    return lhs - rhs


def _ode_residual_at(kind: str, m: int, x: Fraction, prec: int, scaled: bool) -> ErrFloat:
    # f' from the lowering rule, f'' by differentiating the raising rule;
    # the residual vanishes only through the three-term recurrence.
    mq = Fraction(m)
    if kind == "J":
        f0, fm, fp = (_J_at(m + d, x, prec) for d in (0, -1, 1))
        d1 = fm - f0 * mq / x
        d1_next = f0 - fp * (mq + 1) / x
        d2 = -f0 * mq / (x * x) + d1 * mq / x - d1_next
        return d2 + d1 / x - f0 * (mq * mq / (x * x) - 1)
    if kind == "I":
        f0, fm, fp = (_I_at(m + d, x, prec, scaled) for d in (0, -1, 1))
        d1 = fm - f0 * mq / x
        d1_next = f0 - fp * (mq + 1) / x
        d2 = -f0 * mq / (x * x) + d1 * mq / x + d1_next
        return d2 + d1 / x - f0 * (mq * mq / (x * x) + 1)
    raise ValueError(f"kind must be 'J' or 'I', got {kind!r}")


# ---------------------------------------------------------------------------
# Public API


def bessel_J(m: int, x, cfg: EvalConfig = EvalConfig()) -> ErrFloat:
    x = _check_x(x)
    return _adaptive(lambda p: _J_at(m, x, p), cfg, f"J_{m}({x})")


def bessel_I(m: int, x, cfg: EvalConfig = EvalConfig()) -> ErrFloat:
    """I_m(x), or e^{-x} I_m(x) when ``cfg.scaled``."""
    x = _check_x(x)
    return _adaptive(lambda p: _I_at(m, x, p, cfg.scaled), cfg, f"I_{m}({x})")


def exp_neg(x, cfg: EvalConfig = EvalConfig()) -> ErrFloat:
    x = _check_x(x)
    return _adaptive(lambda p: _exp_neg_at(x, p), cfg, f"exp(-{x})")


def bessel_derivs(m: int, x, cfg: EvalConfig = EvalConfig()) -> tuple[ErrFloat, ErrFloat]:
    x = _check_x(x)
    if x == 0:
        raise ValueError("derivatives are evaluated at x > 0")
    jp = _adaptive(lambda p: _Jp_at(m, x, p), cfg, f"J_{m}'({x})")
    ip = _adaptive(lambda p: _Ip_at(m, x, p, cfg.scaled), cfg, f"I_{m}'({x})")
    return jp, ip


def cross_W(m: int, x, cfg: EvalConfig = EvalConfig(), via: str = "lemma") -> ErrFloat:
    """W_m(x) = I_m' J_m - I_m J_m' (times e^{-x} when scaled).

    ``via="lemma"`` evaluates I_{m+1} J_m + I_m J_{m+1}; ``via="definition"``
    goes through the derivatives.
    """
    x = _check_x(x)
    return _adaptive(lambda p: _W_at(m, x, p, cfg.scaled, via), cfg, f"W_{m}({x})")


def cross_W_deriv(m: int, x, cfg: EvalConfig = EvalConfig()) -> ErrFloat:
    x = _check_x(x)
    if x == 0:
        raise ValueError("W' is evaluated at x > 0")
    return _adaptive(lambda p: _Wp_at(m, x, p, cfg.scaled), cfg, f"W_{m}'({x})")


def recursion_residual(m: int, x, cfg: EvalConfig = EvalConfig()) -> ErrFloat:
    """LHS - RHS of the length-four recursion for W at x; the enclosure must contain 0."""
    x = _check_x(x)
    if x == 0 or m < 0:
        raise ValueError("need x > 0 and m >= 0")
    return _adaptive(lambda p: _recursion_residual_at(m, x, p, cfg.scaled), cfg, f"recursion m={m} x={x}")


def ode_residual(kind: str, m: int, x, cfg: EvalConfig = EvalConfig()) -> ErrFloat:
    x = _check_x(x)
    if x == 0:
        raise ValueError("need x > 0")
    return _adaptive(lambda p: _ode_residual_at(kind, m, x, p, cfg.scaled), cfg, f"ode {kind}_{m} x={x}")


def eval_at_prec(fn: str, m: int, x, prec: int, scaled: bool = False) -> ErrFloat:
    """Single evaluation at a fixed precision (no adaptive loop)."""
    x = _check_x(x)
    if fn == "J":
        return _J_at(m, x, prec)
    if fn == "I":
        return _I_at(m, x, prec, scaled)
    if fn == "W":
        return _W_at(m, x, prec, scaled)
    if fn == "Wp":
        return _Wp_at(m, x, prec, scaled)
    if fn == "Jp":
        return _Jp_at(m, x, prec)
    raise ValueError(f"unknown function {fn!r}")
