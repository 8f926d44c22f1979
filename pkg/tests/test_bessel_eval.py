import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clamped_disk.bessel_eval import (
    ErrFloat,
    EvalConfig,
    PrecisionExhausted,
    bessel_derivs,
    bessel_I,
    bessel_J,
    cross_W,
    cross_W_deriv,
    decimal_str,
    eval_at_prec,
    exp_neg,
    ode_residual,
    recursion_residual,
)

mpmath.mp.dps = 60

CFG = EvalConfig()
SCALED = EvalConfig(scaled=True)


def mp(q):
    return mpmath.mpf(q.numerator) / q.denominator


def assert_encloses(r: ErrFloat, oracle):
    """The enclosure contains the oracle value up to the oracle's own error."""
    v = mp(r.value)
    assert abs(v - oracle) <= mp(r.err) + mpmath.mpf(10) ** -55, (r, oracle)


def test_values_at_zero():
    assert bessel_J(0, 0).value == 1 and bessel_J(0, 0).err == 0
    assert bessel_J(1, 0).value == 0
    assert bessel_I(3, 0).value == 0


def test_I0_at_one_against_partial_sum():
    # 40 terms leave a tail far below 1e-60
    partial = sum(Fraction(1, math.factorial(k) ** 2 * 4**k) for k in range(40))
    r = bessel_I(0, 1, EvalConfig(target_abs_err=Fraction(1, 10**35)))
    assert abs(r.value - partial) <= r.err + Fraction(1, 10**60)
    assert r.err <= Fraction(1, 10**35)


@pytest.mark.parametrize("m", [0, 1, 2, 5, 10, 17])
@pytest.mark.parametrize("x", ["1/1000", "1/2", "3.19622", "7", "25", "40"])
def test_J_and_I_against_mpmath(m, x):
    xq = Fraction(x)
    assert_encloses(bessel_J(m, xq), mpmath.besselj(m, mp(xq)))
    assert_encloses(bessel_I(m, xq, EvalConfig(target_abs_err=Fraction(1, 10**20))), mpmath.besseli(m, mp(xq)))
    assert_encloses(bessel_I(m, xq, SCALED), mpmath.besseli(m, mp(xq)) * mpmath.exp(-mp(xq)))


def test_negative_order_convention():
    x = Fraction(13, 10)
    assert bessel_J(-3, x).value == -bessel_J(3, x).value
    assert bessel_I(-3, x).value == bessel_I(3, x).value


def test_I_is_positive():
    for m in range(8):
        for x in ("1/100", "1", "20", "50"):
            assert bessel_I(m, Fraction(x), SCALED).sign() == 1


def test_exp_neg():
    assert_encloses(exp_neg(Fraction(30)), mpmath.exp(-30))


def test_derivative_rules_against_mpmath():
    x = Fraction(9, 4)
    for m in range(5):
        jp, ip = bessel_derivs(m, x)
        assert_encloses(jp, mpmath.besselj(m, mp(x), derivative=1))
        assert_encloses(ip, mpmath.besseli(m, mp(x), derivative=1))


def mp_W(m, x):
    return mp_W_at(m, mp(x))


def mp_W_at(m, x):
    return (mpmath.besseli(m, x, derivative=1) * mpmath.besselj(m, x)
            - mpmath.besseli(m, x) * mpmath.besselj(m, x, derivative=1))


@pytest.mark.parametrize("m", [0, 1, 4, 9])
@pytest.mark.parametrize("x", ["1/3", "3", "11.5"])
def test_W_two_routes(m, x):
    x = Fraction(x)
    a = cross_W(m, x, via="lemma")
    b = cross_W(m, x, via="definition")
    assert a.overlaps(b)
    assert_encloses(a, mp_W(m, x))
    assert_encloses(b, mp_W(m, x))


@pytest.mark.parametrize("m", [0, 1, 3, 6])
def test_W_small_x_limit(m):
    x = Fraction(1, 1000)
    lead = x ** (2 * m + 1) / ((m + 1) * 4**m * math.factorial(m) ** 2)
    cfg = EvalConfig(target_abs_err=lead / 10**12)
    w = cross_W(m, x, cfg)
    assert abs(w.value / lead - 1) < Fraction(1, 10**5)


def test_W0_at_one():
    # W_0 = I_1 J_0 + I_0 J_1 evaluated by mpmath and by the exact power series
    from clamped_disk.series_verify import series_W

    s = series_W(0, 80)
    partial = sum(s.terms().values())
    w = cross_W(0, 1, EvalConfig(target_abs_err=Fraction(1, 10**40)))
    assert abs(w.value - partial) <= w.err + Fraction(1, 10**45)
    assert_encloses(w, mp_W(0, Fraction(1)))


@pytest.mark.parametrize("m,x", [(0, "3"), (2, "6.25"), (5, "14")])
def test_W_derivative(m, x):
    x = Fraction(x)
    h = Fraction(1, 10**12)
    fd = (cross_W(m, x + h).value - cross_W(m, x - h).value) / (2 * h)
    d = cross_W_deriv(m, x)
    assert abs(d.value - fd) < Fraction(1, 10**18)
    assert_encloses(d, mpmath.diff(lambda t: mp_W_at(m, t), mp(x)))


def test_lemma_c_numerically():
    x = Fraction(17, 3)
    for m in range(1, 8):
        lhs = cross_W(m - 1, x) + cross_W(m + 1, x)
        rhs = bessel_I(m, x) * bessel_J(m, x) * Fraction(4 * m) / x
        assert (lhs - rhs).contains_zero()


@pytest.mark.parametrize("m,x,scaled", [(0, "1", False), (7, "35", True), (3, "1/2", False), (10, "40", True)])
def test_recursion_residual_contains_zero(m, x, scaled):
    r = recursion_residual(m, Fraction(x), EvalConfig(scaled=scaled, target_abs_err=Fraction(1, 10**25)))
    assert r.contains_zero()
    assert r.err <= Fraction(1, 10**25)


def test_recursion_residual_detects_wrong_coefficient():
    # shifting x by a little breaks the identity at a fixed argument: compare W at
    # one point against the recursion at another
    x = Fraction(5)
    good = recursion_residual(2, x)
    assert good.contains_zero()
    W = [cross_W(2 + i, x) for i in range(5)]
    bad = (W[2] + W[4]) - (W[1] - W[3]) * (Fraction(4 * 4 * 5 + 1) / 25) + (W[0] + W[2]) * Fraction(5, 3)
    assert not bad.contains_zero()


@pytest.mark.parametrize("kind", ["J", "I"])
@pytest.mark.parametrize("m", [0, 1, 6])
def test_ode_residual(kind, m):
    r = ode_residual(kind, m, Fraction(37, 7), EvalConfig(target_abs_err=Fraction(1, 10**25)))
    assert r.contains_zero()
    assert abs(r.value) <= r.err <= Fraction(1, 10**25)


def test_tighter_target_nests():
    x = Fraction(123, 10)
    loose = bessel_J(4, x, EvalConfig(target_abs_err=Fraction(1, 10**20)))
    tight = bessel_J(4, x, EvalConfig(prec_bits=512, target_abs_err=Fraction(1, 10**100)))
    assert tight.err < loose.err
    assert loose.contains(tight.value)
    assert loose.overlaps(tight)


def test_scaled_and_unscaled_signs_agree():
    for m in range(6):
        for x in ("2", "5.5", "9", "13.3"):
            a = cross_W(m, Fraction(x))
            b = cross_W(m, Fraction(x), SCALED)
            assert a.sign() == b.sign() != 0


def test_precision_exhausted():
    with pytest.raises(PrecisionExhausted):
        bessel_J(0, 1, EvalConfig(target_abs_err=Fraction(1, 10**2000)))


def test_rejects_floats_and_negative_x():
    with pytest.raises(TypeError):
        bessel_J(0, 0.5)
    with pytest.raises(ValueError):
        bessel_J(0, -1)
    assert bessel_J(0, "0.5").value == bessel_J(0, Fraction(1, 2)).value


def test_eval_at_prec_is_fixed():
    r = eval_at_prec("W", 3, Fraction(7), 64)
    assert r.prec_bits == 64


def test_decimal_str_half_even():
    assert decimal_str(Fraction(1, 8), 2) == "0.12"
    assert decimal_str(Fraction(3, 8), 2) == "0.38"
    assert decimal_str(Fraction(-5, 2), 0) == "-2"
    assert decimal_str(Fraction(-1, 1000), 2) == "0.00"


pos_rats = st.fractions(min_value=Fraction(1, 100), max_value=100, max_denominator=1000)
any_rats = st.fractions(min_value=-100, max_value=100, max_denominator=1000)
errs = st.fractions(min_value=0, max_value=Fraction(1, 10), max_denominator=1000)


@given(any_rats, errs, any_rats, errs, st.integers(-1, 1), st.integers(-1, 1))
def test_errfloat_ops_enclose(a, ea, b, eb, sa, sb):
    x = ErrFloat(a, ea, 64)
    y = ErrFloat(b, eb, 64)
    # any point of each input interval maps into the result interval
    pa, pb = a + sa * ea, b + sb * eb
    assert (x + y).contains(pa + pb)
    assert (x - y).contains(pa - pb)
    assert (x * y).contains(pa * pb)
    if not y.contains_zero():
        assert (x / y).contains(pa / pb)


@given(pos_rats)
def test_exact_errfloat_roundtrip(q):
    e = ErrFloat.exact(q, 80)
    assert e.contains(q)
    assert e.err <= abs(q) / 2**79
