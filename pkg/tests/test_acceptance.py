"""Acceptance criteria 1-12, each at its stated range and tolerance."""

import time
from fractions import Fraction

import numpy as np

from firoozbakht_verify.classical import (
    STATED_THRESHOLDS,
    RANGE_CHECKS,
    check_pn_range,
    find_validity_threshold,
    gap_statistics,
    sample_points,
)
from firoozbakht_verify.cli import main
from firoozbakht_verify.compare import Ordering, Verdict, compare_roots
from firoozbakht_verify.inequalities import (
    SMALL_PRIMES_BOUND,
    binomial_term_suite,
    check_lemma3_injectivity,
    check_range,
    check_z_monotone,
    compute_term_factors,
    geometric_samples,
    ineq_2_6_samples,
    lemma2_summary,
    small_prime_bound,
    verify_firoozbakht_range,
)
from firoozbakht_verify.primes import PrimeTable

from acceptance_log import criterion

H = Verdict.HOLDS


def _tally(records):
    out = {"Holds": 0, "Fails": 0, "Unresolved": 0}
    for r in records:
        out[str(r.verdict)] += 1
    return out


def test_criterion_01_firoozbakht_to_a_million():
    with criterion(1, "consecutive prime roots decrease for 1 <= n < 10^6") as d:
        t0 = time.perf_counter()
        rep = verify_firoozbakht_range(1, 10**6)
        elapsed = time.perf_counter() - t0
        d.update(checked=rep.checked, violations=len(rep.violations),
                 levels=dict(rep.levels))
        assert rep.checked == 10**6 - 1
        assert rep.violations == []
        assert set(rep.levels) <= {"float64", "interval", "exact_integer"}
        assert elapsed <= 120


def test_criterion_02_nth_prime_bounds():
    with criterion(2, "n(log n + log log n - 3/2) < p_n < n(log n + log log n - 1/2), "
                      "21 <= n <= 10^6") as d:
        t0 = time.perf_counter()
        tally = _tally(check_pn_range(range(21, 10**6 + 1)))
        onset = find_validity_threshold("pn_bounds", 10**6)
        elapsed = time.perf_counter() - t0
        d.update(**tally, onset=onset)
        assert tally == {"Holds": 10**6 - 20, "Fails": 0, "Unresolved": 0}
        assert onset is not None and onset <= 21
        assert elapsed <= 60


def test_criterion_03_pi_theta_psi_bounds():
    with criterion(3, "pi, theta, psi bounds at 59, 41, 121 and sampled x <= 10^6") as d:
        for subject in ("pi", "theta", "psi"):
            start = STATED_THRESHOLDS[subject]
            xs = sample_points(start, 10**6, "geo:1.01")
            recs = RANGE_CHECKS[subject](xs)
            tally = _tally(recs)
            d[subject] = f"{tally['Holds']}/{len(xs)}"
            assert recs[0].argument == start and recs[0].verdict is H
            assert tally["Holds"] == len(xs)


def test_criterion_04_lemma2_exact():
    with criterion(4, "p_n <= 2^n with equality only at n = 1, p_{n+1} < 2 p_n, "
                      "n <= 10^6") as d:
        s = lemma2_summary(10**6)
        d.update(failures=len(s.failures), equality_at=list(s.equality_at),
                 bertrand_failures=len(s.bertrand_failures))
        assert s.failures == () and s.equality_at == (1,) and s.bertrand_failures == ()


def test_criterion_05_lemma3_injectivity():
    with criterion(5, "no equal roots p_m^(1/m) = p_n^(1/n) for n < m <= 2000") as d:
        t0 = time.perf_counter()
        rep = check_lemma3_injectivity(2000)
        elapsed = time.perf_counter() - t0
        d.update(pairs=rep.pairs, equal=len(rep.equal_pairs),
                 cross_checks=rep.ladder_cross_checks)
        assert rep.pairs == 2000 * 1999 // 2
        assert rep.equal_pairs == [] and rep.ladder_disagreements == []
        assert elapsed <= 120


def test_criterion_06_ineq_2_4_and_x_factor():
    with criterion(6, "root-form lower-constant inequality from n = 89, X(89) > 402") as d:
        dense = _tally(check_range("ineq_2_4", np.arange(89, 10**5 + 1)))
        geo = geometric_samples(10**5, 10**7, 200)
        sampled = _tally(check_range("ineq_2_4", geo))
        x = compute_term_factors(89, 2).X
        d.update(dense=dense["Holds"], sampled=sampled["Holds"], X_lo=float(x.lo))
        assert dense["Holds"] == 10**5 - 88
        assert sampled["Holds"] == len(geo)
        assert 402 < x.lo < 403.5


def test_criterion_07_large_threshold_inequalities():
    with criterion(7, "large-threshold inequalities at 195340 and sampled n <= 10^7, "
                      "z on [195340, 196340]") as d:
        ns = geometric_samples(195340, 10**7, 40)
        for cid in ("ineq_2_5", "ineq_3_13", "ineq_3_15"):
            t = _tally(check_range(cid, ns))
            d[cid] = t["Holds"]
            assert t["Holds"] == len(ns)
        chain = ineq_2_6_samples(ns, factor=3)
        d["ineq_2_6"] = _tally(chain)["Holds"]
        assert all(r.verdict is H and r.aux == 3 * r.n for r in chain)
        z = check_z_monotone(195340, 195340 + 1000)
        d.update(z_points=len(z.records), z_prime=str(z.derivative.verdict))
        assert z.all_positive and z.strictly_increasing and z.derivative.verdict is H


def test_criterion_08_binomial_term_suite():
    with criterion(8, "per-term binomial comparison rebuilds the n-th power inequality") as d:
        for nv in (89, 500, 5000):
            rep = binomial_term_suite(nv)
            d[nv] = f"terms={len(rep.term_records)},sum={rep.sum_verdict}"
            assert len(rep.term_records) == nv and rep.terms_hold
            assert rep.tail.verdict is H and rep.sum_verdict is H
            assert rep.integer_step is Ordering.LESS and rep.ineq_3_1.verdict is H
            assert rep.sums_match_closed_forms


def test_criterion_09_ladder_matches_exact():
    with criterion(9, "interval ladder agrees with exact integer powers, n <= 10^4") as d:
        table = PrimeTable.build(10**4 + 1)
        ps = table.primes.tolist()
        agree = 0
        for nv in range(1, 10**4 + 1):
            a, b = ps[nv], ps[nv - 1]  # p_{n+1}, p_n
            exact = Ordering.LESS if a**nv < b**(nv + 1) else Ordering.GREATER
            ladder = compare_roots(a, nv + 1, b, nv, use_float=False)
            full = compare_roots(a, nv + 1, b, nv)
            agree += ladder.verdict is exact and full.verdict is exact
        d.update(agree=agree)
        assert agree == 10**4


def test_criterion_10_small_prime_bound():
    with criterion(10, "p_195340 below 2770409") as d:
        info = small_prime_bound()
        d.update(p_n=info["p_n"], bound=SMALL_PRIMES_BOUND)
        assert info["p_n"] == 2680897 < SMALL_PRIMES_BOUND


def test_criterion_11_kourbatov_onset():
    with criterion(11, "gap < (log p)^2 - log p - 1 for k in [k0, 10^6]") as d:
        s = gap_statistics(10**6 + 1, Fraction(1))
        d.update(k0=s.kourbatov_onset, failing=s.failing_ks, checked=s.count)
        assert s.n_hi == 10**6 and s.kourbatov_unresolved == 0
        assert s.kourbatov_onset is not None
        assert 1 in s.failing_ks and 4 in s.failing_ks
        assert max(s.failing_ks) < s.kourbatov_onset


def test_criterion_12_resume_is_byte_identical(tmp_path):
    with criterion(12, "10^6-index run halted midway and resumed equals one run") as d:
        whole, part, ck = tmp_path / "whole.csv", tmp_path / "part.csv", tmp_path / "ck.json"
        base = ["firoozbakht", "--to", str(10**6)]
        assert main(base + ["--out", str(whole)]) == 0
        assert main(base + ["--out", str(part), "--checkpoint", str(ck),
                            "--halt-after", str(5 * 10**5)]) == 130
        halted_bytes = part.stat().st_size
        assert main(base + ["--out", str(part), "--checkpoint", str(ck), "--resume"]) == 0
        d.update(rows=whole.read_text().count("\n") - 1, halted_at_bytes=halted_bytes)
        assert 0 < halted_bytes < whole.stat().st_size
        assert part.read_bytes() == whole.read_bytes()
