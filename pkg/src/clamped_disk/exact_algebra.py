"""Exact arithmetic over the rationals.

Rationals are :class:`fractions.Fraction` (always reduced, positive
denominator).  On top of that this module provides dense univariate
polynomials (:class:`PolyQ`), rational functions (:class:`RatFunQ`),
truncated Laurent series (:class:`SeriesQ`) and 4x4 determinants.

The polynomial variable is a formal symbol; callers pick the name used
when rendering (``t`` for the four-form, ``z`` for coordinate vectors).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rat = Fraction

# Degree of the zero polynomial.  Compares below every integer.
DEG_ZERO = -math.inf

Scalar = Union[int, Fraction]


class SeriesTruncationError(ArithmeticError):
    """A series operation left no valid coefficient (truncation too short)."""


def as_rat(x: Scalar | str) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("binary floats are not accepted; pass a Fraction or a decimal string")
    return Fraction(x)


def render_rat(q: Fraction) -> str:
    """``p/q`` rendering, ``p`` for integers."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# Polynomials


def _strip(coeffs: Iterable[Scalar]) -> tuple[Fraction, ...]:
    cs = [as_rat(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


class PolyQ:
    """Dense polynomial with rational coefficients, ``coeffs[i]`` of degree ``i``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        object.__setattr__(self, "coeffs", _strip(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("PolyQ is immutable")

    def __reduce__(self):
        return (PolyQ, (self.coeffs,))

    @classmethod
    def const(cls, c: Scalar) -> PolyQ:
        return cls((c,))

    @classmethod
    def monomial(cls, degree: int, c: Scalar = 1) -> PolyQ:
        return cls([0] * degree + [c])

    @property
    def degree(self) -> float:
        return len(self.coeffs) - 1 if self.coeffs else DEG_ZERO

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = PolyQ.const(other)
        if not isinstance(other, PolyQ):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __repr__(self) -> str:
        return f"PolyQ({self.render()!r})"

    # -- arithmetic -------------------------------------------------------

    @staticmethod
    def _coerce(other) -> PolyQ:
        if isinstance(other, PolyQ):
            return other
        if isinstance(other, (int, Fraction)):
            return PolyQ.const(other)
        return NotImplemented

    def __add__(self, other) -> PolyQ:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return PolyQ([x + y for x, y in itertools.zip_longest(a, b, fillvalue=0)])

    __radd__ = __add__

    def __neg__(self) -> PolyQ:
        return PolyQ([-c for c in self.coeffs])

    def __sub__(self, other) -> PolyQ:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> PolyQ:
        return (-self) + other

    def __mul__(self, other) -> PolyQ:
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return PolyQ()
            return PolyQ([c * other for c in self.coeffs])
        if not isinstance(other, PolyQ):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return PolyQ()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return PolyQ(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> PolyQ:
        result, base = PolyQ.const(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other: PolyQ) -> tuple[PolyQ, PolyQ]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        db = len(other.coeffs) - 1
        lead = other.lead
        if len(rem) - 1 < db:
            return PolyQ(), self
        quot = [Fraction(0)] * (len(rem) - db)
        for i in range(len(rem) - 1, db - 1, -1):
            c = rem[i] / lead
            quot[i - db] = c
            if c:
                for j, y in enumerate(other.coeffs):
                    rem[i - db + j] -= c * y
        return PolyQ(quot), PolyQ(rem[:db])

    def __floordiv__(self, other: PolyQ) -> PolyQ:
        return divmod(self, other)[0]

    def __mod__(self, other: PolyQ) -> PolyQ:
        return divmod(self, other)[1]

    def exact_div(self, other: PolyQ) -> PolyQ:
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ArithmeticError("polynomial division is not exact")
        return q

    def monic(self) -> PolyQ:
        if self.is_zero():
            return self
        return self * (1 / self.lead)

    def deriv(self) -> PolyQ:
        return PolyQ([i * c for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, x: Scalar):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def valuation(self) -> float:
        """Lowest degree with a nonzero coefficient."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return math.inf

    def is_monomial(self) -> bool:
        return sum(1 for c in self.coeffs if c) == 1

    def render(self, var: str = "t") -> str:
        if not self.coeffs:
            return "0"
        parts: list[str] = []
        for deg in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[deg]
            if not c:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if deg == 0:
                body = render_rat(mag)
            else:
                power = var if deg == 1 else f"{var}^{deg}"
                body = power if mag == 1 else f"{render_rat(mag)}*{power}"
            if not parts:
                parts.append(body if sign == "+" else f"-{body}")
            else:
                parts.append(f"{sign} {body}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.render()


def poly_gcd(a: PolyQ, b: PolyQ) -> PolyQ:
    """Monic gcd; ``gcd(0, 0) = 0``."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_arith(a: PolyQ, b: PolyQ, op: str) -> PolyQ:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown polynomial operation {op!r}")


# ---------------------------------------------------------------------------
# Rational functions


class RatFunQ:
    """Reduced quotient ``num/den`` of polynomials with ``den`` monic."""

    __slots__ = ("num", "den")

    def __init__(self, num: PolyQ | Scalar, den: PolyQ | Scalar = 1):
        if not isinstance(num, PolyQ):
            num = PolyQ.const(num)
        if not isinstance(den, PolyQ):
            den = PolyQ.const(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            num, den = PolyQ(), PolyQ.const(1)
        else:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num, den = num.exact_div(g), den.exact_div(g)
            lc = den.lead
            num, den = num * (1 / lc), den * (1 / lc)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatFunQ is immutable")

    def __reduce__(self):
        return (RatFunQ, (self.num, self.den))

    @classmethod
    def z_power(cls, k: int, c: Scalar = 1) -> RatFunQ:
        """``c * z**k`` for any integer ``k``."""
        if k >= 0:
            return cls(PolyQ.monomial(k, c))
        return cls(PolyQ.const(c), PolyQ.monomial(-k))

    def normalize(self) -> RatFunQ:
        return RatFunQ(self.num, self.den)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    @staticmethod
    def _coerce(other) -> RatFunQ:
        if isinstance(other, RatFunQ):
            return other
        if isinstance(other, (int, Fraction, PolyQ)):
            return RatFunQ(other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __add__(self, other) -> RatFunQ:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RatFunQ(self.num + other.num, self.den)
        return RatFunQ(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> RatFunQ:
        return RatFunQ(-self.num, self.den)

    def __sub__(self, other) -> RatFunQ:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> RatFunQ:
        return (-self) + other

    def __mul__(self, other) -> RatFunQ:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RatFunQ(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> RatFunQ:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunQ(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> RatFunQ:
        return self._coerce(other) / self

    def __call__(self, x: Scalar):
        return self.num(x) / self.den(x)

    def __repr__(self) -> str:
        return f"RatFunQ({self.render()!r})"

    def render(self, var: str = "z") -> str:
        num = self.num.render(var)
        if self.den == PolyQ.const(1):
            return num
        den = self.den.render(var)
        if len(self.num.coeffs) and not self.num.is_monomial():
            num = f"({num})"
        if not self.den.is_monomial():
            den = f"({den})"
        return f"{num}/{den}"

    def __str__(self) -> str:
        return self.render()


# ---------------------------------------------------------------------------
# Truncated Laurent series


@dataclass(frozen=True)
class SeriesQ:
    """``sum coeffs[i] * z**(base + i) + O(z**order)``.

    Coefficients at or beyond ``order`` are dropped on construction.
    """

    base: int
    coeffs: tuple[Fraction, ...]
    order: int

    def __post_init__(self):
        keep = max(0, self.order - self.base)
        cs = tuple(as_rat(c) for c in self.coeffs[:keep])
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def from_dict(cls, terms: dict[int, Scalar], order: int) -> SeriesQ:
        if not terms:
            return cls(order, (), order)
        lo = min(terms)
        cs = [Fraction(0)] * (max(terms) - lo + 1)
        for e, c in terms.items():
            cs[e - lo] = as_rat(c)
        return cls(lo, tuple(cs), order)

    @classmethod
    def from_poly(cls, p: PolyQ, order: int) -> SeriesQ:
        return cls(0, p.coeffs, order)

    def coeff(self, e: int) -> Fraction:
        if e >= self.order:
            raise SeriesTruncationError(f"coefficient z^{e} beyond valid order {self.order}")
        i = e - self.base
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def terms(self) -> dict[int, Fraction]:
        return {self.base + i: c for i, c in enumerate(self.coeffs) if c}

    def valuation(self) -> int:
        for i, c in enumerate(self.coeffs):
            if c:
                return self.base + i
        return self.order

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def first_nonzero(self) -> tuple[int, Fraction] | None:
        for i, c in enumerate(self.coeffs):
            if c:
                return self.base + i, c
        return None

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeriesQ):
            return NotImplemented
        return self.order == other.order and self.terms() == other.terms()

    def __hash__(self) -> int:
        return hash((self.order, tuple(sorted(self.terms().items()))))

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: SeriesQ) -> SeriesQ:
        order = min(self.order, other.order)
        base = min(self.base, other.base)
        if order <= base:
            raise SeriesTruncationError("sum has no valid coefficients")
        out = [Fraction(0)] * (order - base)
        for s in (self, other):
            for i, c in enumerate(s.coeffs):
                e = s.base + i
                if e < order:
                    out[e - base] += c
        return SeriesQ(base, tuple(out), order)

    def __neg__(self) -> SeriesQ:
        return SeriesQ(self.base, tuple(-c for c in self.coeffs), self.order)

    def __sub__(self, other: SeriesQ) -> SeriesQ:
        return self + (-other)

    def __mul__(self, other) -> SeriesQ:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, SeriesQ):
            return NotImplemented
        va, vb = self.valuation(), other.valuation()
        order = min(self.order + vb, other.order + va)
        base = self.base + other.base
        if order <= base:
            raise SeriesTruncationError("product has no valid coefficients")
        out = [Fraction(0)] * (order - base)
        n = len(out)
        for i, x in enumerate(self.coeffs):
            if not x or i >= n:
                continue
            for j, y in enumerate(other.coeffs):
                if i + j >= n:
                    break
                if y:
                    out[i + j] += x * y
        return SeriesQ(base, tuple(out), order)

    def __rmul__(self, other) -> SeriesQ:
        return self.__mul__(other)

    def scale(self, c: Scalar) -> SeriesQ:
        c = as_rat(c)
        return SeriesQ(self.base, tuple(c * x for x in self.coeffs), self.order)

    def shift(self, k: int) -> SeriesQ:
        """Multiply by ``z**k``."""
        return SeriesQ(self.base + k, self.coeffs, self.order + k)

    shift_by_power = shift

    def deriv(self) -> SeriesQ:
        cs = tuple((self.base + i) * c for i, c in enumerate(self.coeffs))
        return SeriesQ(self.base - 1, cs, self.order - 1)

    def truncate(self, order: int) -> SeriesQ:
        return SeriesQ(self.base, self.coeffs, min(order, self.order))

    def render(self, var: str = "z") -> str:
        parts = []
        for e, c in sorted(self.terms().items()):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            power = "" if e == 0 else (var if e == 1 else f"{var}^{e}")
            if not power:
                body = render_rat(mag)
            else:
                body = power if mag == 1 else f"{render_rat(mag)}*{power}"
            parts.append(body if not parts and sign == "+" else (f"-{body}" if not parts else f"{sign} {body}"))
        tail = f"O({var}^{self.order})"
        return (" ".join(parts) + " + " + tail) if parts else tail

    def __str__(self) -> str:
        return self.render()


def series_arith(a: SeriesQ, b: SeriesQ | Scalar | int, op: str) -> SeriesQ:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "shift_by_power":
        return a.shift(int(b))
    if op == "scale":
        return a.scale(b)
    raise ValueError(f"unknown series operation {op!r}")


def series_times_ratfun(s: SeriesQ, f: RatFunQ) -> SeriesQ:
    """Multiply a series by a rational function whose denominator is ``c*z**d``."""
    if f.den.is_monomial():
        d = int(f.den.degree)
        out = s.scale(0)
        for i, c in enumerate(f.num.coeffs):
            if c:
                out = out + s.shift(i - d).scale(c / f.den.lead)
        return out
    raise ValueError("only denominators that are powers of z are supported")


# ---------------------------------------------------------------------------
# Determinants

Matrix4 = Sequence[Sequence]


def _zero_like(x):
    return x * 0


def _one_like(x):
    if isinstance(x, PolyQ):
        return PolyQ.const(1)
    if isinstance(x, RatFunQ):
        return RatFunQ(1)
    return Fraction(1)


def det_bareiss(M: Matrix4):
    """Fraction-free (Bareiss) determinant.

    Entries may be PolyQ, RatFunQ or rationals.  For polynomial entries every
    division is exact, so no rational-function arithmetic is needed.
    """
    n = len(M)
    if n == 0:
        return Fraction(1)
    a = [list(row) for row in M]
    proto = a[0][0]
    sign = 1
    prev = _one_like(proto)
    for k in range(n - 1):
        if _is_zero(a[k][k]):
            for r in range(k + 1, n):
                if not _is_zero(a[r][k]):
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return _zero_like(proto)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = _exact_div(num, prev)
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return d if sign == 1 else -d


def det_cofactor(M: Matrix4):
    """Laplace expansion along the first column (test oracle)."""
    n = len(M)
    if n == 1:
        return M[0][0]
    total = None
    for i in range(n):
        if _is_zero(M[i][0]):
            continue
        minor = [row[1:] for r, row in enumerate(M) if r != i]
        term = M[i][0] * det_cofactor(minor)
        if i % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else _zero_like(M[0][0])


def det_leibniz(M: Matrix4):
    """Permutation-sum determinant (independent test oracle)."""
    n = len(M)
    total = None
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = M[0][perm[0]]
        for r in range(1, n):
            term = term * M[r][perm[r]]
        if inv % 2:
            term = -term
        total = term if total is None else total + term
    return total


def det4(M: Matrix4):
    if len(M) != 4 or any(len(row) != 4 for row in M):
        raise ValueError("det4 expects a 4x4 matrix")
    return det_bareiss(M)


def mat_mul(A: Matrix4, B: Matrix4) -> list[list]:
    n = len(A)
    return [
        [_sum(A[i][k] * B[k][j] for k in range(n)) for j in range(len(B[0]))]
        for i in range(n)
    ]


def _sum(xs):
    it = iter(xs)
    acc = next(it)
    for x in it:
        acc = acc + x
    return acc


def _is_zero(x) -> bool:
    if isinstance(x, (PolyQ, RatFunQ)):
        return x.is_zero()
    return x == 0


def _exact_div(num, den):
    if isinstance(num, PolyQ):
        if not isinstance(den, PolyQ):
            den = PolyQ.const(den)
        return num.exact_div(den)
    if isinstance(num, int):
        num = Fraction(num)
    return num / den
