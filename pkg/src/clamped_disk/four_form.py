"""The recursion space spanned by F_0..F_3 and its normalized 4-form.

All arithmetic is in Q[t] with t = z^-2: the recursion

    F_{n+4} = alpha_n t (F_{n+1} - F_{n+3}) - beta_n F_n - (1 + beta_n) F_{n+2},
    alpha_n = 4(n+2)(n+3),  beta_n = (n+3)/(n+1)

has coefficients that are polynomials in t, so every coordinate of F_m over
(F_0, F_1, F_2, F_3) is a polynomial in t and no denominators appear.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .exact_algebra import DEG_ZERO, PolyQ, det4, render_rat

CoordVec = tuple[PolyQ, PolyQ, PolyQ, PolyQ]

T = PolyQ.monomial(1)


class CertificateViolation(AssertionError):
    """A four-form failed its leading-term certificate."""


@dataclass(frozen=True)
class TupleParams:
    """Sorted indices m0 < m1 < m2 < m3 and their gaps (j, k, l, m)."""

    j: int
    k: int
    l: int
    m: int

    def __post_init__(self):
        if min(self.j, self.k, self.l, self.m) < 0:
            raise ValueError("gap parameters must be nonnegative")

    @classmethod
    def from_indices(cls, m0: int, m1: int, m2: int, m3: int) -> TupleParams:
        if not 0 <= m0 < m1 < m2 < m3:
            raise ValueError(f"indices must satisfy 0 <= m0 < m1 < m2 < m3, got {(m0, m1, m2, m3)}")
        return cls(m0, m1 - m0 - 1, m2 - m1 - 1, m3 - m2 - 1)

    @property
    def indices(self) -> tuple[int, int, int, int]:
        j, k, l, m = self.j, self.k, self.l, self.m
        return (j, 1 + j + k, 2 + j + k + l, 3 + j + k + l + m)

    @property
    def lead_degree(self) -> int:
        return self.k + 2 * (self.l // 2) + self.m

    @property
    def sign(self) -> int:
        return -1 if self.m % 2 else 1


@dataclass(frozen=True)
class RecCoeffs:
    alpha: Fraction  # coefficient of t
    beta: Fraction
    gamma: Fraction


def rec_coeffs(j: int, k: int, l: int, m: int) -> RecCoeffs:
    s = j + k + l + m
    if s < 1:
        raise ValueError("beta and gamma need j+k+l+m >= 1")
    beta = Fraction(2 + s, s)
    return RecCoeffs(Fraction(4 * (1 + s) * (2 + s)), beta, beta + 1)


# ---------------------------------------------------------------------------
# Coordinates

_COORDS: list[CoordVec] = [
    tuple(PolyQ.const(1 if i == r else 0) for i in range(4)) for r in range(4)
]


def _extend(upto: int) -> None:
    while len(_COORDS) <= upto:
        n = len(_COORDS) - 4
        alpha = T * (4 * (n + 2) * (n + 3))
        beta = Fraction(n + 3, n + 1)
        f0, f1, f2, f3 = _COORDS[n], _COORDS[n + 1], _COORDS[n + 2], _COORDS[n + 3]
        _COORDS.append(tuple(
            alpha * (f1[i] - f3[i]) - f0[i] * beta - f2[i] * (1 + beta) for i in range(4)
        ))


def coords_F(m: int) -> CoordVec:
    """Coordinates of F_m over (F_0, F_1, F_2, F_3), memoized."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    _extend(m)
    return _COORDS[m]


def coords_table() -> list[CoordVec]:
    return list(_COORDS)


def load_coords_table(rows: Sequence[CoordVec]) -> None:
    """Seed the memo table (e.g. from a cache); existing entries must agree."""
    for i, row in enumerate(rows):
        if i < len(_COORDS):
            if _COORDS[i] != tuple(row):
                raise ValueError(f"cached coordinates for F_{i} disagree with the recursion")
        else:
            _COORDS.append(tuple(row))


def transfer_matrix(tp: TupleParams) -> list[list[PolyQ]]:
    """Rows are the coordinates of F_{m0}..F_{m3}; already denominator-free in t."""
    return [list(coords_F(i)) for i in tp.indices]


def _perm_sign(seq: Sequence[int]) -> int:
    inv = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return -1 if inv % 2 else 1


def four_form(indices: Iterable[int]) -> PolyQ:
    """(F_{i0}, F_{i1}, F_{i2}, F_{i3}) normalized by (F_0, F_1, F_2, F_3) = 1."""
    idx = tuple(indices)
    if len(idx) != 4:
        raise ValueError("four indices required")
    if any(i < 0 for i in idx):
        raise ValueError("indices must be nonnegative")
    if len(set(idx)) < 4:
        return PolyQ()
    s = sorted(idx)
    d = det4(transfer_matrix(TupleParams.from_indices(*s)))
    return d if _perm_sign(idx) == 1 else -d


def unrolled_four_form(indices: Sequence[int]) -> PolyQ:
    """Right-hand side of one recursion step applied to the last index.

    Equals ``four_form(indices)`` whenever the last index is at least 4.
    """
    a, b, c, top = indices
    if top < 4:
        raise ValueError("last index must be at least 4")
    n = top - 4
    alpha = T * (4 * (n + 2) * (n + 3))
    beta = Fraction(n + 3, n + 1)
    return (
        alpha * four_form((a, b, c, top - 3))
        - alpha * four_form((a, b, c, top - 1))
        - four_form((a, b, c, top - 4)) * beta
        - four_form((a, b, c, top - 2)) * (beta + 1)
    )


# ---------------------------------------------------------------------------
# Leading-term certificates


@dataclass(frozen=True)
class LeadingCertificate:
    tuple: TupleParams
    form: PolyQ
    sign: int
    lead_degree_in_t: int
    B: Fraction
    subleading_degree: float
    weak_bound_ok: bool
    stated_bound_ok: bool

    def as_dict(self) -> dict:
        tp = self.tuple
        return {
            "indices": list(tp.indices),
            "jklm": [tp.j, tp.k, tp.l, tp.m],
            "sign": self.sign,
            "lead_degree": self.lead_degree_in_t,
            "B": render_rat(self.B),
            "subleading_degree": None if self.subleading_degree == DEG_ZERO else int(self.subleading_degree),
            "weak_bound_ok": self.weak_bound_ok,
            "stated_bound_ok": self.stated_bound_ok,
            "pass": True,
        }

    def to_record(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))


def leading_certificate(tp: TupleParams) -> LeadingCertificate:
    """Certify four_form = sign * B * t^d + (lower terms) with B > 0.

    The sign must be (-1)^m and d = k + 2*floor(l/2) + m.  The sub-leading
    part must have degree below d; the sharper bound d - 1 is recorded in
    ``stated_bound_ok`` but not enforced.
    """
    f = four_form(tp.indices)
    if f.is_zero():
        raise CertificateViolation(f"{tp.indices}: four-form vanishes")
    deg = int(f.degree)
    lead = f.lead
    sign = 1 if lead > 0 else -1
    expected_deg = tp.lead_degree
    if deg != expected_deg:
        raise CertificateViolation(f"{tp.indices}: degree {deg}, expected {expected_deg}")
    if sign != tp.sign:
        raise CertificateViolation(f"{tp.indices}: leading sign {sign}, expected {tp.sign}")
    rest = f - PolyQ.monomial(deg, lead)
    sub = rest.degree
    weak = sub < deg
    if not weak:
        raise CertificateViolation(f"{tp.indices}: sub-leading degree {sub} not below {deg}")
    return LeadingCertificate(
        tuple=tp,
        form=f,
        sign=sign,
        lead_degree_in_t=deg,
        B=abs(lead),
        subleading_degree=sub,
        weak_bound_ok=weak,
        stated_bound_ok=sub < deg - 1,
    )


@dataclass(frozen=True)
class ClaimScanReport:
    max_index: int
    certificates: tuple[LeadingCertificate, ...]
    max_coeff_bits: int
    weak_bound_count: int
    stated_bound_count: int
    subleading_gap_histogram: tuple[tuple[str, int], ...]

    @property
    def count(self) -> int:
        return len(self.certificates)

    @property
    def passed(self) -> bool:
        return all(c.weak_bound_ok for c in self.certificates)

    def summary(self) -> dict:
        return {
            "name": "fourform-scan",
            "max_index": self.max_index,
            "tuples": self.count,
            "pass": self.passed,
            "max_coeff_bits": self.max_coeff_bits,
            "weak_bound_ok": self.weak_bound_count,
            "stated_bound_ok": self.stated_bound_count,
            "lead_minus_subleading": dict(self.subleading_gap_histogram),
        }


def _certify_indices(indices: tuple[int, int, int, int]) -> LeadingCertificate:
    return leading_certificate(TupleParams.from_indices(*indices))


def _coeff_bits(p: PolyQ) -> int:
    return max((max(c.numerator.bit_length(), c.denominator.bit_length()) for c in p.coeffs), default=0)


def claim_scan(max_index: int = 12, jobs: int = 1) -> ClaimScanReport:
    """Certify every tuple 0 <= m0 < m1 < m2 < m3 <= max_index."""
    if max_index < 3:
        raise ValueError("max_index must be at least 3")
    coords_F(max_index)
    tuples = list(combinations(range(max_index + 1), 4))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            certs = list(pool.map(_certify_indices, tuples, chunksize=16))
    else:
        certs = [_certify_indices(t) for t in tuples]
    hist: dict[str, int] = {}
    for c in certs:
        gap = "none" if c.subleading_degree == DEG_ZERO else str(int(c.lead_degree_in_t - c.subleading_degree))
        hist[gap] = hist.get(gap, 0) + 1
    return ClaimScanReport(
        max_index=max_index,
        certificates=tuple(certs),
        max_coeff_bits=max(_coeff_bits(c.form) for c in certs),
        weak_bound_count=sum(c.weak_bound_ok for c in certs),
        stated_bound_count=sum(c.stated_bound_ok for c in certs),
        subleading_gap_histogram=tuple(sorted(hist.items(), key=lambda kv: (kv[0] == "none", int(kv[0]) if kv[0] != "none" else 0))),
    )


def evaluate_coords(m: int, t: Fraction) -> tuple[Fraction, ...]:
    return tuple(Fraction(c(t)) for c in coords_F(m))
