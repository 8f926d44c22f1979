import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import clamped_disk.four_form as ff
from clamped_disk.bessel_eval import eval_at_prec
from clamped_disk.exact_algebra import PolyQ, det_leibniz
from clamped_disk.four_form import (
    CertificateViolation,
    TupleParams,
    claim_scan,
    coords_F,
    four_form,
    leading_certificate,
    load_coords_table,
    rec_coeffs,
    transfer_matrix,
    unrolled_four_form,
)

t = PolyQ.monomial(1)


def test_base_case():
    assert four_form((0, 1, 2, 3)) == PolyQ.const(1)


def test_hand_unrolled_examples():
    # F4 = 24t F1 - 24t F3 - 3F0 - 4F2, F5 = 48t (F2 - F4) - 2F1 - 3F3
    assert four_form((0, 1, 2, 4)) == t * -24
    assert four_form((0, 1, 2, 5)) == t * t * 1152 - 3
    assert coords_F(4) == (PolyQ.const(-3), t * 24, PolyQ.const(-4), t * -24)


@pytest.mark.parametrize("idx", [(0, 1, 2, 4), (0, 1, 2, 5), (1, 3, 6, 9), (2, 5, 7, 12)])
def test_against_leibniz(idx):
    assert four_form(idx) == det_leibniz(transfer_matrix(TupleParams.from_indices(*idx)))


def test_tuple_params():
    tp = TupleParams.from_indices(1, 3, 6, 10)
    assert (tp.j, tp.k, tp.l, tp.m) == (1, 1, 2, 3)
    assert tp.indices == (1, 3, 6, 10)
    assert tp.lead_degree == 1 + 2 + 3
    assert tp.sign == -1
    with pytest.raises(ValueError):
        TupleParams.from_indices(0, 2, 2, 3)


def test_rec_coeffs():
    c = rec_coeffs(0, 0, 0, 1)
    assert c.alpha == 4 * 2 * 3 and c.beta == 3 and c.gamma == 4
    with pytest.raises(ValueError):
        rec_coeffs(0, 0, 0, 0)


idx4 = st.lists(st.integers(0, 10), min_size=4, max_size=4)


@given(idx4, st.permutations(range(4)))
def test_antisymmetry(idx, perm):
    base = four_form(idx)
    swapped = four_form([idx[p] for p in perm])
    inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
    assert swapped == (base if inversions % 2 == 0 else -base)


@given(st.lists(st.integers(0, 10), min_size=3, max_size=3, unique=True), st.integers(4, 12))
def test_unrolling_identity(head, top):
    idx = (*head, top)
    assert unrolled_four_form(idx) == four_form(idx)


@pytest.mark.parametrize("max_index,count", [(3, 1), (6, 35), (12, 715)])
def test_claim_scan_counts(max_index, count):
    rep = claim_scan(max_index)
    assert rep.count == count
    assert rep.passed
    for c in rep.certificates:
        tp = c.tuple
        assert c.sign == (-1) ** tp.m
        assert c.lead_degree_in_t == tp.k + 2 * (tp.l // 2) + tp.m
        assert c.B > 0


def test_certificate_violation_is_raised(monkeypatch):
    monkeypatch.setattr(ff, "four_form", lambda idx: -PolyQ.const(1))
    with pytest.raises(CertificateViolation):
        leading_certificate(TupleParams(0, 0, 0, 0))


def test_load_coords_table_rejects_disagreement():
    coords_F(6)
    bad = [tuple(PolyQ.const(1) for _ in range(4))] * 6
    with pytest.raises(ValueError):
        load_coords_table(bad)
    load_coords_table(ff.coords_table())


def test_coordinates_match_numeric_W():
    # W_m(x) = sum_i c_i(1/x^2) W_i(x)
    rng = random.Random(7)
    for _ in range(12):
        x = Fraction(rng.randint(2000, 10000), 1000)
        m = rng.randint(4, 12)
        W = [eval_at_prec("W", i, x, 256) for i in range(4)]
        tx = 1 / (x * x)
        combo = sum((W[i] * c(tx) for i, c in enumerate(coords_F(m))), start=W[0] * 0)
        assert (combo - eval_at_prec("W", m, x, 256)).contains_zero()


def test_four_form_commutes_with_evaluation():
    from clamped_disk.exact_algebra import det4

    idx = (1, 2, 4, 7)
    for x in (Fraction(9, 4), Fraction(13, 4), Fraction(23, 4)):
        tx = 1 / (x * x)
        rows = [[c(tx) for c in coords_F(i)] for i in idx]
        assert det4(rows) == four_form(idx)(tx)


def test_claim_scan_parallel_matches_serial():
    a = claim_scan(7)
    b = claim_scan(7, jobs=3)
    assert [c.as_dict() for c in a.certificates] == [c.as_dict() for c in b.certificates]
    assert a.summary() == b.summary()
