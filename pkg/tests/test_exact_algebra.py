import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from clamped_disk.exact_algebra import (
    PolyQ,
    RatFunQ,
    SeriesQ,
    SeriesTruncationError,
    as_rat,
    det4,
    det_bareiss,
    det_cofactor,
    det_leibniz,
    mat_mul,
    poly_arith,
    poly_gcd,
    render_rat,
    series_times_ratfun,
)

rats = st.fractions(min_value=-20, max_value=20, max_denominator=12)
polys = st.lists(rats, max_size=5).map(PolyQ)
nonzero_polys = polys.filter(lambda p: not p.is_zero())
t = PolyQ.monomial(1)


def test_poly_examples():
    p = PolyQ([1, 2, 3])
    assert p.degree == 2 and p.lead == 3
    assert (t * 1152) * t - 3 == PolyQ([-3, 0, 1152])
    assert PolyQ([-3, 0, 1152]).render() == "1152*t^2 - 3"
    assert PolyQ([0, -24]).render() == "-24*t"
    assert PolyQ().degree == float("-inf")
    assert PolyQ([1, 1]) ** 3 == PolyQ([1, 3, 3, 1])
    assert PolyQ([2, 0, 0, 0]) == PolyQ.const(2)


def test_poly_division():
    q, r = divmod(PolyQ([-1, 0, 1]), PolyQ([1, 1]))
    assert q == PolyQ([-1, 1]) and r.is_zero()
    assert PolyQ([-1, 0, 1]).exact_div(PolyQ([-1, 1])) == PolyQ([1, 1])
    with pytest.raises(ArithmeticError):
        PolyQ([1, 0, 1]).exact_div(PolyQ([1, 1]))
    assert poly_gcd(PolyQ([-1, 0, 1]), PolyQ([2, 2])) == PolyQ([1, 1])


def test_as_rat_rejects_floats():
    assert as_rat("7/3") == Fraction(7, 3)
    with pytest.raises(TypeError):
        as_rat(0.5)


def test_render_rat():
    assert render_rat(Fraction(-3, 4)) == "-3/4"
    assert render_rat(Fraction(5)) == "5"


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == PolyQ()


@given(polys, nonzero_polys)
def test_divmod_reconstructs(a, b):
    q, r = divmod(a, b)
    assert q * b + r == a
    assert r.degree < b.degree


@given(polys, polys, st.sampled_from(["add", "sub", "mul"]), rats)
def test_poly_arith_evaluates_pointwise(a, b, op, x):
    f = {"add": lambda u, v: u + v, "sub": lambda u, v: u - v, "mul": lambda u, v: u * v}[op]
    assert poly_arith(a, b, op)(x) == f(a(x), b(x))


def test_ratfun_normalization():
    f = RatFunQ(PolyQ([0, 0, 2]), PolyQ([0, 4]))
    assert f.num == PolyQ([0, Fraction(1, 2)]) and f.den == PolyQ([1])
    assert RatFunQ.z_power(-2, 64).render() == "64/z^2"
    assert (1 + RatFunQ.z_power(-2, 16)).render() == "(z^2 + 16)/z^2"


@given(polys, nonzero_polys)
def test_ratfun_normalize_idempotent(a, b):
    f = RatFunQ(a, b)
    assert f.normalize() == f
    assert RatFunQ(f.num, f.den) == f
    assert f.den.lead == 1


@given(polys, nonzero_polys, polys, nonzero_polys)
def test_ratfun_field_ops(a, b, c, d):
    f, g = RatFunQ(a, b), RatFunQ(c, d)
    assert (f + g) - g == f
    if not g.is_zero():
        assert (f * g) / g == f


def test_series_cauchy_product():
    N = 12
    j0 = SeriesQ.from_dict({0: 1, 2: Fraction(-1, 4), 4: Fraction(1, 64), 6: Fraction(-1, 2304), 8: Fraction(1, 147456), 10: Fraction(-1, 14745600)}, N)
    i0 = SeriesQ.from_dict({0: 1, 2: Fraction(1, 4), 4: Fraction(1, 64), 6: Fraction(1, 2304), 8: Fraction(1, 147456), 10: Fraction(1, 14745600)}, N)
    # explicit convolution as the oracle
    expected = {}
    for (e1, c1), (e2, c2) in itertools.product(i0.terms().items(), j0.terms().items()):
        if e1 + e2 < N:
            expected[e1 + e2] = expected.get(e1 + e2, 0) + c1 * c2
    prod = i0 * j0
    assert prod.terms() == {e: c for e, c in expected.items() if c}
    assert prod.coeff(0) == 1 and prod.coeff(2) == 0 and prod.coeff(4) == Fraction(-1, 32)
    assert prod.order == N


def test_series_order_bookkeeping():
    a = SeriesQ.from_dict({1: 1}, 6)
    b = SeriesQ.from_dict({0: 1, 3: 2}, 5)
    assert (a * b).order == 6  # min(6 + 0, 5 + 1)
    assert (a + b).order == 5
    assert a.deriv().order == 5
    assert a.shift(-1).terms() == {0: 1}
    with pytest.raises(SeriesTruncationError):
        SeriesQ(3, (), 3) + SeriesQ.from_dict({4: 1}, 5)


def test_series_times_ratfun_requires_monomial_denominator():
    s = SeriesQ.from_dict({2: 1, 4: 3}, 8)
    assert series_times_ratfun(s, RatFunQ.z_power(-2, 5)).terms() == {0: 5, 2: 15}
    with pytest.raises(ValueError):
        series_times_ratfun(s, RatFunQ(1, PolyQ([1, 1])))


def test_series_render():
    assert SeriesQ.from_dict({1: 1, 5: Fraction(-1, 96)}, 8).render() == "z - 1/96*z^5 + O(z^8)"


def _z(k, c=1):
    return RatFunQ.z_power(k, c)


def test_det_base_matrix():
    one, zero = RatFunQ(1), RatFunQ(0)
    M = [
        [zero, one, -one, zero],
        [zero, -one, -one, zero],
        [zero, -one, one, _z(-1, -4)],
        [_z(-1, -8), one + _z(-2, 16), one - _z(-2, 16), _z(-3, 32)],
    ]
    assert det_leibniz(M) == _z(-2, 64)
    assert det_bareiss(M) == _z(-2, 64)
    assert det_cofactor(M) == _z(-2, 64)


matrices = st.lists(st.lists(polys, min_size=4, max_size=4), min_size=4, max_size=4)


@given(matrices)
def test_det_algorithms_agree(M):
    assert det_bareiss(M) == det_leibniz(M) == det_cofactor(M)


@given(st.lists(st.lists(rats, min_size=4, max_size=4), min_size=4, max_size=4),
       st.lists(st.lists(rats, min_size=4, max_size=4), min_size=4, max_size=4))
def test_det_multiplicative(A, B):
    assert det4(mat_mul(A, B)) == det4(A) * det4(B)


def test_det_of_identity_and_swap():
    I = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
    assert det4(I) == 1
    I[0], I[1] = I[1], I[0]
    assert det4(I) == -1


def test_pickle_roundtrip():
    import pickle

    p = PolyQ([1, Fraction(2, 3)])
    f = RatFunQ(p, PolyQ([0, 0, 1]))
    assert pickle.loads(pickle.dumps(p)) == p
    assert pickle.loads(pickle.dumps(f)) == f
