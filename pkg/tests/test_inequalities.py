from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from firoozbakht_verify.compare import Ordering, Verdict
from firoozbakht_verify.expr import parse
from firoozbakht_verify.inequalities import (
    CATALOG,
    SMALL_PRIMES_BOUND,
    NotFoundWithinCap,
    binomial_term_suite,
    check_binomial_term,
    check_ineq_2_4,
    check_ineq_2_5,
    check_ineq_2_6,
    check_ineq_3_1,
    check_ineq_3_6,
    check_ineq_3_7,
    check_ineq_3_11,
    check_ineq_3_13,
    check_ineq_3_15,
    check_lemma1,
    check_lemma2,
    check_lemma3_injectivity,
    check_point,
    check_range,
    check_z_monotone,
    compute_term_factors,
    find_smallest_m,
    firoozbakht_records,
    geometric_samples,
    ineq_3_6_terms,
    lemma2_summary,
    small_prime_bound,
    verify_firoozbakht_range,
)

from oracles import first_primes_td, rs_form_mp, x_factor_mp

H, F = Verdict.HOLDS, Verdict.FAILS


def test_catalog_round_trips_through_prefix_text():
    for check in CATALOG.values():
        for text in check.prefix_forms().values():
            assert parse(text).to_prefix() == text


def test_lemma1_examples():
    s1, _ = check_lemma1(3)
    assert s1.verdict is H
    s1, s2 = check_lemma1(2)
    assert s1.verdict is F and s2.verdict is F
    assert check_lemma1(21)[1].verdict is H


def test_lemma2_examples():
    r1 = check_lemma2(1)
    assert r1.verdict is H and r1.extras["equality"]
    for nv in (2, 20):
        r = check_lemma2(nv)
        assert r.verdict is H and not r.extras["equality"]


def test_lemma2_summary_small():
    s = lemma2_summary(10_000)
    assert s.holds and s.failures == () and s.equality_at == (1,)
    assert s.bertrand_failures == ()


@pytest.mark.parametrize("n_max,pairs", [(2, 1), (100, 4950)])
def test_lemma3_small(n_max, pairs):
    rep = check_lemma3_injectivity(n_max, cross_check_every=7)
    assert rep.pairs == pairs and rep.injective
    assert rep.ladder_disagreements == []


def test_ineq_2_4_examples():
    assert check_ineq_2_4(89).verdict is H and check_ineq_2_4(89).asserted
    assert check_ineq_2_4(1000).verdict is H
    probe = check_ineq_2_4(3)
    assert not probe.asserted


def test_ineq_2_4_sides_match_oracle():
    rec = check_ineq_2_4(89)
    lhs = rs_form_mp(90, mp.mpf(1) / 2) ** (mp.mpf(1) / 90)
    assert rec.lhs.lo <= lhs <= rec.lhs.hi


def test_ineq_2_5_examples():
    assert check_ineq_2_5(195340).verdict is H
    assert check_ineq_2_5(10**6).verdict is H
    assert not check_ineq_2_5(100).asserted


def test_ineq_2_6_examples():
    n0 = 195340
    for m_value in (3 * n0, 4 * n0):
        rec = check_ineq_2_6(n0, m_value)
        assert rec.verdict is H and rec.extras["links"] == ["Holds"] * 3
    assert not check_ineq_2_6(100, 300).asserted


def test_ineq_2_6_domain():
    with pytest.raises(ValueError):
        check_ineq_2_6(10, 5)


def test_binomial_term_examples():
    assert check_binomial_term(89, 1).verdict is H
    assert check_binomial_term(89, 89).verdict is H
    with pytest.raises(ValueError):
        check_binomial_term(89, 90)


def test_ineq_3_1_integer_step():
    rec = check_ineq_3_1(89)
    assert rec.verdict is H and rec.extras["integer_step"] == str(Ordering.LESS)


def test_term_factors_examples():
    tf = compute_term_factors(89, 2)
    assert tf.x_exceeds(402)
    assert tf.T.lo > 1
    # mpmath oracle: X(89) = 402.85160117129...
    assert tf.X.lo <= x_factor_mp(89) <= tf.X.hi
    assert 402 < tf.X.lo < 403.5
    big = compute_term_factors(10**4, 500)
    assert big.product_below_bound() and big.exponent_below_log_log_n()


@settings(max_examples=40, deadline=None)
@given(st.integers(89, 10**7))
def test_x_exceeds_402_from_89(nv):
    assert compute_term_factors(nv, 2, bits=64).x_exceeds(402)


def test_ineq_3_6_examples():
    assert check_ineq_3_6(89, 2).verdict is H
    assert check_ineq_3_6(89, 89).verdict is H
    probe = check_ineq_3_6(10, 5)
    assert not probe.asserted
    assert all(r.verdict is H for r in ineq_3_6_terms(89))


def test_ineq_3_7_examples():
    assert check_ineq_3_7(89).verdict is H
    assert check_ineq_3_7(1000).verdict is H
    probe = check_ineq_3_7(6)
    assert not probe.asserted and probe.verdict is F


def test_ineq_3_11_examples():
    rec = check_ineq_3_11(89)
    assert rec.verdict is H
    assert rec.extras["stones"]["eighty_nine_below_power"] == "Holds"
    assert check_ineq_3_11(10**4).verdict is H
    probe = check_ineq_3_11(30)
    assert not probe.asserted
    assert probe.extras["stones"]["eighty_nine_below_power"] == "Fails"


def test_ineq_3_13_and_3_15_examples():
    for check in (check_ineq_3_13, check_ineq_3_15):
        assert check(195340).verdict is H
        assert check(10**6).verdict is H
    assert not check_ineq_3_13(1000).asserted
    assert not check_ineq_3_15(10).asserted


def test_z_examples():
    rep = check_z_monotone(195340, 195350)
    assert rep.all_positive and rep.strictly_increasing
    # z'(195340) = 62741538.955... by an mpmath oracle
    assert rep.derivative.verdict is H
    assert rep.derivative.rhs.contains(Fraction("62741538.95519985855093"))
    small = check_z_monotone(2, 10)
    assert not any(r.asserted for r in small.records)


@pytest.mark.parametrize("nv,m_value", [(1, 2), (10, 11), (4, 5)])
def test_find_smallest_m_examples(nv, m_value):
    assert find_smallest_m(nv) == m_value


def test_find_smallest_m_cap():
    with pytest.raises(NotFoundWithinCap):
        find_smallest_m(10, cap=10)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20_000))
def test_smallest_m_is_successor(nv):
    assert find_smallest_m(nv) == nv + 1


@pytest.mark.parametrize("lo,hi,checked", [(1, 10, 9), (4, 5, 1), (1, 10**5, 10**5 - 1)])
def test_firoozbakht_range_examples(lo, hi, checked):
    rep = verify_firoozbakht_range(lo, hi)
    assert rep.ok and rep.checked == checked


def test_firoozbakht_first_primes_against_trial_division():
    primes = first_primes_td(11)
    for rec in firoozbakht_records(range(1, 11)):
        nv = rec.n
        assert (primes[nv] ** nv < primes[nv - 1] ** (nv + 1)) == (rec.verdict is H)


def test_small_prime_bound():
    info = small_prime_bound()
    assert info["p_n"] == 2680897 and info["p_n"] < SMALL_PRIMES_BOUND and info["holds"]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(89, 10**7), min_size=1, max_size=20))
def test_ineq_2_4_holds_from_89(ns):
    assert all(r.verdict is H for r in check_range("ineq_2_4", ns))


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(195340, 10**7), min_size=1, max_size=10))
def test_large_threshold_checks_hold(ns):
    for cid in ("ineq_2_5", "ineq_3_13", "ineq_3_15"):
        assert all(r.verdict is H for r in check_range(cid, ns))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(6, 3000), min_size=1, max_size=10))
def test_range_matches_point(ns):
    for cid in ("ineq_2_4", "ineq_3_7", "lemma1_step2"):
        got = [r.verdict for r in check_range(cid, ns)]
        assert got == [check_point(cid, v).verdict for v in ns]


def test_binomial_suite_small():
    rep = binomial_term_suite(89)
    assert rep.holds and rep.sums_match_closed_forms


def test_geometric_samples():
    pts = geometric_samples(195340, 10**7, 20)
    assert pts[0] == 195340 and pts[-1] == 10**7 and len(pts) <= 20
