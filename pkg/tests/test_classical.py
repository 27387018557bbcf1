from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from firoozbakht_verify.classical import (
    STATED_THRESHOLDS,
    GapSummary,
    b_label,
    check_kourbatov,
    check_pi_bounds,
    check_pn_bounds,
    check_pn_range,
    check_psi_bounds,
    check_theta_bounds,
    enc_hi,
    enc_lo,
    find_validity_threshold,
    gap_statistics,
    kourbatov_batch,
    sample_points,
    threshold_scan,
)
from firoozbakht_verify.compare import Verdict
from firoozbakht_verify.interval import DomainError
from firoozbakht_verify.primes import gap_stream

H = Verdict.HOLDS


def test_pi_examples():
    r = check_pi_bounds(59)
    assert r.verdict is H and r.asserted and r.measured == 17
    # oracle bounds 16.2438... and 19.7924...
    assert enc_lo(r.lower) < 16.2439 < enc_hi(r.lower) + 1e-3
    assert enc_lo(r.upper) - 1e-3 < 19.7924 < enc_hi(r.upper) + 1e-3
    assert check_pi_bounds(100).verdict is H
    probe = check_pi_bounds(10)
    assert not probe.asserted


def test_theta_examples():
    assert check_theta_bounds(41).verdict is H
    assert check_theta_bounds(1000).verdict is H
    assert not check_theta_bounds(2).asserted


def test_psi_examples():
    assert check_psi_bounds(121).verdict is H
    assert check_psi_bounds(10**5).verdict is H
    assert not check_psi_bounds(4).asserted


def test_pn_examples():
    r = check_pn_bounds(21)
    assert r.verdict is H and r.measured == 73
    assert abs(float(enc_lo(r.lower)) - 55.8152) < 1e-3
    assert abs(float(enc_hi(r.upper)) - 76.8152) < 1e-3
    assert check_pn_bounds(10**5).verdict is H
    with pytest.raises((DomainError, ValueError)):
        check_pn_bounds(1)


def test_pn_range_below_threshold_marked_probe():
    recs = check_pn_range(range(2, 30))
    assert all(r.asserted == (r.argument >= STATED_THRESHOLDS["pn"]) for r in recs)


@pytest.mark.parametrize("k,verdict", [(1, Verdict.FAILS), (4, Verdict.FAILS),
                                       (1000, Verdict.HOLDS)])
def test_kourbatov_examples(k, verdict):
    assert check_kourbatov(k).verdict is verdict


def test_kourbatov_margins_frozen():
    # rhs (log p)^2 - log p - 1 from an mpmath oracle: -1.21269... at p = 2, 0.84066... at p = 7
    r1, r4 = check_kourbatov(1), check_kourbatov(4)
    assert enc_lo(r1.rhs) <= -1.21269416664174388 <= enc_hi(r1.rhs)
    assert enc_lo(r4.rhs) <= 0.84065615914115834 <= enc_hi(r4.rhs)
    assert enc_hi(r1.kourbatov_margin) < 0 and enc_hi(r4.kourbatov_margin) < 0


def test_b_is_exact_rational():
    assert b_label(Fraction(117, 100)) == "1.17"
    assert b_label(Fraction(1)) == "1"
    rec = check_kourbatov(1000, Fraction(117, 100))
    assert rec.b == Fraction(117, 100)


def test_cramer_ratio_small_cases():
    # 1/(log 2)^2 = 2.0813... dominates the first gaps; gap 4 at p = 7 gives 1.0563...
    s = gap_statistics(5)
    assert s.count == 4 and s.max_ratio_n == 1
    assert enc_lo(s.max_ratio) <= 2.08136898100560780 <= enc_hi(s.max_ratio)
    assert gap_statistics(2).count == 1


def test_cramer_ratio_below_one_from_five():
    s = gap_statistics(10**5, n_min=5)
    assert enc_hi(s.max_ratio) < 1


def test_kourbatov_onset_small():
    s = gap_statistics(10**4)
    assert s.failing_ks == [1, 2, 3, 4, 6, 9]
    assert s.kourbatov_onset == 10
    assert find_validity_threshold("kourbatov_b1", 10**4) > 4


@settings(max_examples=20, deadline=None)
@given(n_max=st.integers(3, 3000), split=st.integers(1, 2999))
def test_gap_summary_merge_equals_single_pass(n_max, split):
    split = min(split, n_max - 2) if n_max > 2 else 1
    items = list(gap_stream(n_max))
    ns, ps, gs = zip(*items)
    whole, left, right = GapSummary(Fraction(1)), GapSummary(Fraction(1)), GapSummary(Fraction(1))
    for rec in kourbatov_batch(ns, ps, gs):
        whole.add(rec)
        (left if rec.n <= split else right).add(rec)
    merged = left.merge(right)
    for f in ("n_lo", "n_hi", "count", "max_ratio_n", "kourbatov_failures",
              "largest_failing_k", "failing_ks", "histogram"):
        assert getattr(merged, f) == getattr(whole, f)
    assert merged.kourbatov_onset == whole.kourbatov_onset


def test_validity_thresholds():
    assert find_validity_threshold("pn_bounds", 10**4) <= 21
    assert find_validity_threshold("pi_bounds", 100) <= 59
    scan = threshold_scan("pn_bounds", 1000)
    assert scan.unresolved == () and scan.onset == 20


def test_sample_points():
    assert sample_points(5, 9) == [5, 6, 7, 8, 9]
    assert sample_points(9, 5) == []
    geo = sample_points(9_990, 20_000, "geo:1.01")
    assert geo[:11] == list(range(9_990, 10_001)) and geo[-1] == 20_000
    assert all(b > a for a, b in zip(geo, geo[1:]))
    with pytest.raises(ValueError):
        sample_points(1, 10, "geo:0.5")
    with pytest.raises(ValueError):
        sample_points(1, 10, "sparse")


@settings(max_examples=30, deadline=None)
@given(lo=st.integers(1, 10**6), width=st.integers(0, 10**6),
       ratio=st.sampled_from(["1.01", "1.5", "2"]))
def test_geometric_samples_cover_ends(lo, width, ratio):
    pts = sample_points(lo, lo + width, f"geo:{ratio}")
    assert pts[0] == lo and pts[-1] == lo + width
    assert pts == sorted(set(pts))
