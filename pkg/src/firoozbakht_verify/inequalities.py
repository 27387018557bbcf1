"""Lemma and inequality checks behind the strict decrease of p_n^(1/n).

Every check is a pair of expression trees decided by the compare ladder.  A
record is *asserted* when its index is at or above the threshold from which
the inequality is claimed; below that it is a probe whose outcome is only
recorded.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .compare import (
    DEFAULT_MAX_BITS,
    EXACT_BITS,
    Decision,
    Ordering,
    Verdict,
    compare_consecutive_roots,
    compare_roots,
    decide,
    decide_batch,
    exact_power_compare,
    precision_ladder,
)
from .expr import Expr, binom, const, eval_enclosure, exp, log, var
from .interval import IntervalScalar
from .primes import PrimeTable, default_cache, nth_primes
from .registry import register

Enclosure = IntervalScalar | tuple[float, float]

_ONE = mpfr(1, 64)

n, m, i = var("n"), var("m"), var("i")
p_n, p_m = var("p_n"), var("p_m")
half, three_halves = Fraction(1, 2), Fraction(3, 2)

L = log(n)
LL = log(log(n))
C0 = LL - half  # log log n - 1/2
C1 = log(log(n + 1)) - half  # log log (n+1) - 1/2
U = log(1 + 1 / n) / L
T = 1 + U
S = 1 + log(T) / C0
X = C0 / log(T)


def rs_form(k: Expr, c: Fraction) -> Expr:
    """k (log k + log log k - c)."""
    return k * (log(k) + log(log(k)) - c)


def rs_form_scaled(k: Expr, c: Fraction) -> Expr:
    """k log k + k log log k - c k, the expanded form with a k-proportional offset."""
    return k * log(k) + k * log(log(k)) - c * k


@dataclass(frozen=True)
class InequalityCheck:
    """lhs < rhs as decided, plus the sides as stated when those differ."""

    inequality_id: str
    lhs: Expr
    rhs: Expr
    threshold: int | None  # asserted from this index on
    min_n: int  # smallest index where both sides are evaluable
    stated_lhs: Expr | None = None
    stated_rhs: Expr | None = None

    def prefix_forms(self) -> dict[str, str]:
        out = {"lhs": self.lhs.to_prefix(), "rhs": self.rhs.to_prefix()}
        if self.stated_lhs is not None:
            out["stated_lhs"] = self.stated_lhs.to_prefix()
            out["stated_rhs"] = self.stated_rhs.to_prefix()
        return out


ASSERT_LEMMA1_STEP1 = 3
ASSERT_LEMMA1_STEP2 = 21
ASSERT_SMALL = 89
ASSERT_LARGE = 195340
MIN_N_2_6 = 4  # n (log n + log log n - 3/2) > 0 from here
SMALL_PRIMES_BOUND = 2770409  # claimed strict bound for p_n, n <= ASSERT_LARGE

_cube_rhs = rs_form_scaled(n, three_halves) ** 3

CATALOG: dict[str, InequalityCheck] = {c.inequality_id: c for c in [
    InequalityCheck("lemma1_step1", n + 1, n ** (1 + 1 / n), ASSERT_LEMMA1_STEP1, 1),
    InequalityCheck("lemma1_step2", log(n + 1), L ** (1 + 1 / n), ASSERT_LEMMA1_STEP2, 2),
    InequalityCheck("ineq_2_4", rs_form(n + 1, half) ** (1 / (n + 1)),
                    rs_form(n, half) ** (1 / n), ASSERT_SMALL, 3),
    InequalityCheck("ineq_2_5", rs_form(n + 1, three_halves) ** (1 / (n + 1)),
                    rs_form(n, three_halves) ** (1 / n), ASSERT_LARGE, 6),
    InequalityCheck("ineq_3_1",
                    (n + 1) ** n * (log(n + 1) + C1) ** n,
                    n ** (n + 1) * (L + C0) ** (n + 1), ASSERT_SMALL, 3),
    InequalityCheck("ineq_3_3_term",
                    binom(n, i - 1) * log(n + 1) ** (n - (i - 1)) * C1 ** (i - 1),
                    binom(n + 1, i - 1) * L ** (n + 1 - (i - 1)) * C0 ** (i - 1),
                    ASSERT_SMALL, 3),
    InequalityCheck("ineq_3_6", T ** (n - (i - 1)) * (C1 / C0) ** (i - 1), L,
                    ASSERT_SMALL, 6),
    InequalityCheck("ineq_3_7", C1 ** n, (n + 1) * L * C0 ** n + C0 ** (n + 1),
                    ASSERT_SMALL, 5),
    InequalityCheck("ineq_3_11", (1 + 1 / X) ** X,
                    (n + 1) ** (X / n) * L ** (X / n) * (1 + C0 / ((n + 1) * L)) ** (X / n),
                    ASSERT_SMALL, 6),
    InequalityCheck("ineq_3_13", rs_form_scaled(3 * n, three_halves), _cube_rhs,
                    ASSERT_LARGE, 6,
                    stated_lhs=rs_form_scaled(3 * n, three_halves) ** (1 / (3 * n)),
                    stated_rhs=rs_form_scaled(n, three_halves) ** (1 / n)),
    InequalityCheck("ineq_3_15", 3 * n * log(3 * n) + 3 * n * log(log(3 * n)),
                    (n * L) ** 3 + 3 * (n * L) ** 2 * (n * LL - three_halves * n),
                    ASSERT_LARGE, 6),
    InequalityCheck("z_monotone", (n * L) ** 2 - log(log(3 * n)),
                    (m * log(m)) ** 2 - log(log(3 * m)), ASSERT_LARGE, 2),
]}

# p_m^(1/m) < p_n^(1/n) through the two explicit bounds, as a three-link chain
CHAIN_2_6 = (
    p_m ** (1 / m),
    rs_form_scaled(m, half) ** (1 / m),
    rs_form_scaled(n, three_halves) ** (1 / n),
    p_n ** (1 / n),
)

# term-factor bound and z derivative
PRODUCT_3_6 = CATALOG["ineq_3_6"].lhs
PRODUCT_BOUND = exp(1 / L) * exp((i - 1) * log(1 + 1 / n) / (L * C0))
EXPONENT_SUM = 1 / L + (i - 1) * log(1 + 1 / n) / (L * C0)
Z = CATALOG["z_monotone"].lhs
Z_PRIME = 2 * n * L ** 2 + 2 * n * L - 1 / (n * log(3 * n))

STONES_3_11 = {
    "one_plus_inv_x_below_e": ((1 + 1 / X) ** X, exp(1)),
    "power_below_x_over_n": ((n + 1) ** C0, (n + 1) ** (X / n)),
    "eighty_nine_below_power": (const(89), (n + 1) ** C0),
}


def check_of(inequality_id: str) -> InequalityCheck:
    try:
        return CATALOG[inequality_id]
    except KeyError:
        raise KeyError(f"unknown inequality {inequality_id!r}; known: {sorted(CATALOG)}") from None


# -- records -------------------------------------------------------------------


@dataclass(frozen=True)
class InequalityRecord:
    inequality_id: str
    n: int
    aux: int | None  # i for per-term checks, m for two-index checks
    lhs: Enclosure
    rhs: Enclosure
    verdict: Verdict
    bits_used: int  # 53 = float64 level, 0 = exact integer level
    asserted: bool
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def violation(self) -> bool:
        return self.asserted and self.verdict is not Verdict.HOLDS


def all_hold(verdicts: Iterable[Verdict]) -> Verdict:
    vs = list(verdicts)
    if Verdict.FAILS in vs:
        return Verdict.FAILS
    return Verdict.HOLDS if all(v is Verdict.HOLDS for v in vs) else Verdict.UNRESOLVED


def _asserted(check: InequalityCheck, idx: int, assert_from: int | None) -> bool:
    start = check.threshold if assert_from is None else assert_from
    return start is not None and idx >= start


def _record(check: InequalityCheck, idx: int, aux: int | None, d: Decision,
            assert_from: int | None, **extras) -> InequalityRecord:
    return InequalityRecord(check.inequality_id, idx, aux, d.lhs, d.rhs, d.verdict, d.bits,
                            _asserted(check, idx, assert_from), extras)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def check_point(inequality_id: str, n_value: int, *, max_bits: int = DEFAULT_MAX_BITS,
                assert_from: int | None = None) -> InequalityRecord:
    """Single-index check for the catalog entries that depend on n alone."""
    check = check_of(inequality_id)
    _require(n_value >= check.min_n, f"{inequality_id} needs n >= {check.min_n}")
    d = decide(check.lhs, check.rhs, {"n": n_value}, max_bits)
    return _record(check, n_value, None, d, assert_from)


def check_range(inequality_id: str, ns, *, max_bits: int = DEFAULT_MAX_BITS,
                assert_from: int | None = None) -> list[InequalityRecord]:
    """Vectorized ``check_point`` over many indices."""
    check = check_of(inequality_id)
    ns = np.asarray(ns, dtype=np.int64)
    if len(ns) == 0:
        return []
    _require(int(ns.min()) >= check.min_n, f"{inequality_id} needs n >= {check.min_n}")
    dec = decide_batch(check.lhs, check.rhs, {"n": ns}, max_bits)
    return [_record(check, v, None, dec.decision(k), assert_from)
            for k, v in enumerate(ns.tolist())]


# -- lemmas --------------------------------------------------------------------


def check_lemma1(n_value: int, max_bits: int = DEFAULT_MAX_BITS
                 ) -> tuple[InequalityRecord, InequalityRecord]:
    """(n+1) < n^(1+1/n) and log(n+1) < (log n)^(1+1/n)."""
    _require(n_value >= 2, "the second step needs n >= 2 (log 1 = 0)")
    return (check_point("lemma1_step1", n_value, max_bits=max_bits),
            check_point("lemma1_step2", n_value, max_bits=max_bits))


def lemma2_range(ns, table: PrimeTable | None = None,
                 assert_from: int | None = None) -> list[InequalityRecord]:
    """Exact p_n <= 2^n; extras flag equality and the step p_{n+1} < 2 p_n."""
    ns = np.asarray(ns, dtype=np.int64)
    if len(ns) == 0:
        return []
    _require(int(ns.min()) >= 1, "lemma2 needs n >= 1")
    table = table or default_cache.ensure_index(int(ns.max()) + 1)
    ps = table.primes[ns - 1]
    nxt = table.primes[ns]
    bertrand = (nxt < 2 * ps).tolist()
    start = 1 if assert_from is None else assert_from
    out = []
    for k, (v, p) in enumerate(zip(ns.tolist(), ps.tolist())):
        # p < 2^64 <= 2^n once n >= 64, so only small n need the integer test
        ok = p > 1 and (v >= 64 or p <= 1 << v)
        verdict = Verdict.HOLDS if ok else Verdict.FAILS
        two_n = gmpy2.mul_2exp(_ONE, v)  # exact at any precision
        out.append(InequalityRecord("lemma2", v, None, IntervalScalar(mpfr(p, 64), mpfr(p, 64), 64),
                                    IntervalScalar(two_n, two_n, 64), verdict, EXACT_BITS,
                                    v >= start,
                                    {"equality": v < 64 and p == 1 << v,
                                     "bertrand": bertrand[k]}))
    return out


@dataclass(frozen=True)
class Lemma2Summary:
    n_max: int
    failures: tuple[int, ...]  # n with p_n > 2^n
    equality_at: tuple[int, ...]  # n with p_n = 2^n
    bertrand_failures: tuple[int, ...]  # n with p_{n+1} >= 2 p_n

    @property
    def holds(self) -> bool:
        return not self.failures and not self.bertrand_failures


def lemma2_summary(n_max: int, table: PrimeTable | None = None) -> Lemma2Summary:
    """Vectorized exact p_n <= 2^n and p_{n+1} < 2 p_n for every n <= n_max."""
    _require(n_max >= 1, "n_max must be >= 1")
    table = table or default_cache.ensure_index(n_max + 1)
    ps = table.slice(1, n_max + 1).tolist()
    small = range(1, min(n_max, 63) + 1)
    fails = tuple(k for k in small if ps[k - 1] > 1 << k)
    eq = tuple(k for k in small if ps[k - 1] == 1 << k)
    arr = table.slice(1, n_max + 1)
    bad = np.flatnonzero(arr[1:] >= 2 * arr[:-1]) + 1
    return Lemma2Summary(n_max, fails, eq, tuple(bad.tolist()))


def check_lemma2(n_value: int, table: PrimeTable | None = None) -> InequalityRecord:
    return lemma2_range([n_value], table)[0]


@dataclass
class InjectivityReport:
    n_max: int
    pairs: int
    equal_pairs: list[tuple[int, int]]
    less: int  # p_m^(1/m) < p_n^(1/n) for n < m
    greater: int
    decided_by_bit_length: int
    decided_by_power: int
    ladder_cross_checks: int
    ladder_disagreements: list[tuple[int, int]]

    @property
    def injective(self) -> bool:
        return not self.equal_pairs


def check_lemma3_injectivity(n_max: int, table: PrimeTable | None = None,
                             cross_check_every: int = 97) -> InjectivityReport:
    """Exact comparison of p_m^n with p_n^m for every 1 <= n < m <= n_max.

    Every ``cross_check_every``-th pair is re-decided through the full
    float/interval ladder and must agree.
    """
    _require(n_max >= 2, "n_max must be >= 2")
    table = table or default_cache.ensure_index(n_max)
    ps = table.slice(1, n_max).tolist()
    rep = InjectivityReport(n_max, 0, [], 0, 0, 0, 0, 0, [])
    bl = [p.bit_length() for p in ps]
    counter = 0
    for mm in range(2, n_max + 1):
        pm, bm = ps[mm - 1], bl[mm - 1]
        for nn in range(1, mm):
            pn_, bn = ps[nn - 1], bl[nn - 1]
            rep.pairs += 1
            # windows of bit lengths of p_m^n and p_n^m
            if nn * bm < mm * (bn - 1) + 1 or nn * (bm - 1) + 1 > mm * bn:
                rep.decided_by_bit_length += 1
            else:
                rep.decided_by_power += 1
            o = exact_power_compare(pm, mm, pn_, nn)
            if o is Ordering.EQUAL:
                rep.equal_pairs.append((nn, mm))
            elif o is Ordering.LESS:
                rep.less += 1
            else:
                rep.greater += 1
            counter += 1
            if counter % cross_check_every == 0:
                rep.ladder_cross_checks += 1
                if compare_roots(pm, mm, pn_, nn).verdict is not o:
                    rep.ladder_disagreements.append((nn, mm))
    return rep


# -- root-form inequalities and the two-index chain ----------------------------


def check_ineq_2_4(n_value: int, **kw) -> InequalityRecord:
    return check_point("ineq_2_4", n_value, **kw)


def check_ineq_2_5(n_value: int, **kw) -> InequalityRecord:
    return check_point("ineq_2_5", n_value, **kw)


def ineq_2_6_batch(ns, ms, pns, pms, *, max_bits: int = DEFAULT_MAX_BITS,
                   assert_from: int | None = None) -> list[InequalityRecord]:
    """Three-link chain p_m^(1/m) < ... < p_n^(1/n); Holds only if every link does."""
    ns = np.asarray(ns, dtype=np.int64)
    ms = np.asarray(ms, dtype=np.int64)
    if len(ns) == 0:
        return []
    _require(bool(np.all(ms > ns)) and int(ns.min()) >= MIN_N_2_6,
             f"ineq_2_6 needs m > n >= {MIN_N_2_6}")
    env = {"n": ns, "m": ms, "p_n": np.asarray(pns, dtype=np.uint64),
           "p_m": np.asarray(pms, dtype=np.uint64)}
    links = [decide_batch(a, b, env, max_bits) for a, b in zip(CHAIN_2_6, CHAIN_2_6[1:])]
    start = ASSERT_LARGE if assert_from is None else assert_from
    out = []
    for k, (nv, mv) in enumerate(zip(ns.tolist(), ms.tolist())):
        ds = [ln.decision(k) for ln in links]
        verdict = all_hold(d.verdict for d in ds)
        out.append(InequalityRecord(
            "ineq_2_6", nv, mv, ds[0].lhs, ds[-1].rhs, verdict, max(d.bits for d in ds),
            nv >= start and mv >= 3 * nv,
            {"links": [str(d.verdict) for d in ds]}))
    return out


def check_ineq_2_6(n_value: int, m_value: int, **kw) -> InequalityRecord:
    ps = nth_primes([n_value, m_value])
    return ineq_2_6_batch([n_value], [m_value], [ps[n_value]], [ps[m_value]], **kw)[0]


def ineq_2_6_samples(ns, factor: int = 3, **kw) -> list[InequalityRecord]:
    """The chain at m = factor * n for sparse n, using one counting pass for the primes."""
    ns = [int(v) for v in ns]
    ms = [factor * v for v in ns]
    ps = nth_primes(ns + ms)
    return ineq_2_6_batch(ns, ms, [ps[v] for v in ns], [ps[v] for v in ms], **kw)


# -- the n-th power inequality and its binomial expansion -----------------------


def check_ineq_3_1(n_value: int, max_bits: int = DEFAULT_MAX_BITS) -> InequalityRecord:
    """(n+1)^n (log(n+1) + C1)^n < n^(n+1) (log n + C0)^(n+1); extras hold the exact
    integer step (n+1)^n < n^(n+1)."""
    rec = check_point("ineq_3_1", n_value, max_bits=max_bits)
    step1 = exact_power_compare(n_value + 1, n_value + 1, n_value, n_value)
    return InequalityRecord(rec.inequality_id, rec.n, None, rec.lhs, rec.rhs, rec.verdict,
                            rec.bits_used, rec.asserted,
                            {"integer_step": str(step1)})


def check_binomial_term(n_value: int, i_value: int, max_bits: int = DEFAULT_MAX_BITS,
                        assert_from: int | None = None) -> InequalityRecord:
    """Term i of the binomial expansions; coefficients are exact integers."""
    _require(n_value >= 3, "binomial terms need n >= 3")
    _require(1 <= i_value <= n_value, f"need 1 <= i <= n, got i={i_value}, n={n_value}")
    check = CATALOG["ineq_3_3_term"]
    d = decide(check.lhs, check.rhs, {"n": n_value, "i": i_value}, max_bits)
    return _record(check, n_value, i_value, d, assert_from)


@dataclass(frozen=True)
class TermFactors:
    """S, T and X at (n, i), with the product T^(n-i+1) S^(i-1) and its exp bound."""

    n: int
    i: int
    S: IntervalScalar
    T: IntervalScalar
    X: IntervalScalar
    product: IntervalScalar
    bound: IntervalScalar
    exponent: IntervalScalar  # 1/log n + (i-1) log(1+1/n) / (log n (log log n - 1/2))
    log_log_n: IntervalScalar

    def product_below_bound(self) -> bool:
        return self.product.below(self.bound)

    def exponent_below_log_log_n(self) -> bool:
        return self.exponent.below(self.log_log_n)

    def x_exceeds(self, value) -> bool:
        return bool(self.X.lo > value)


def compute_term_factors(n_value: int, i_value: int, bits: int = 128) -> TermFactors:
    _require(n_value >= 6, "S and X need log log n > 1/2, i.e. n >= 6")
    _require(1 <= i_value <= n_value, "need 1 <= i <= n")
    env = {"n": n_value, "i": i_value}
    ev = lambda e: eval_enclosure(e, env, bits)  # noqa: E731
    return TermFactors(n_value, i_value, ev(S), ev(T), ev(X), ev(PRODUCT_3_6),
                       ev(PRODUCT_BOUND), ev(EXPONENT_SUM), ev(LL))


def check_ineq_3_6(n_value: int, i_value: int, max_bits: int = DEFAULT_MAX_BITS,
                   assert_from: int | None = None) -> InequalityRecord:
    _require(2 <= i_value <= n_value, "ineq_3_6 needs 2 <= i <= n")
    check = CATALOG["ineq_3_6"]
    _require(n_value >= check.min_n, f"ineq_3_6 needs n >= {check.min_n}")
    d = decide(check.lhs, check.rhs, {"n": n_value, "i": i_value}, max_bits)
    return _record(check, n_value, i_value, d, assert_from)


def ineq_3_6_terms(n_value: int, max_bits: int = DEFAULT_MAX_BITS,
                   assert_from: int | None = None) -> list[InequalityRecord]:
    """check_ineq_3_6 for every i = 2..n in one vectorized pass."""
    check = CATALOG["ineq_3_6"]
    _require(n_value >= check.min_n, f"ineq_3_6 needs n >= {check.min_n}")
    iv = np.arange(2, n_value + 1, dtype=np.int64)
    dec = decide_batch(check.lhs, check.rhs, {"n": np.full(len(iv), n_value), "i": iv},
                       max_bits)
    return [_record(check, n_value, v, dec.decision(k), assert_from)
            for k, v in enumerate(iv.tolist())]


def check_ineq_3_7(n_value: int, **kw) -> InequalityRecord:
    return check_point("ineq_3_7", n_value, **kw)


def check_ineq_3_11(n_value: int, max_bits: int = DEFAULT_MAX_BITS,
                    assert_from: int | None = None) -> InequalityRecord:
    """The tail-term power bound plus its stepping stones, kept in extras as verdicts."""
    rec = check_point("ineq_3_11", n_value, max_bits=max_bits, assert_from=assert_from)
    env = {"n": n_value}
    stones = {name: str(decide(a, b, env, max_bits).verdict)
              for name, (a, b) in STONES_3_11.items()}
    x = eval_enclosure(X, env, 64)
    return InequalityRecord(rec.inequality_id, rec.n, None, rec.lhs, rec.rhs, rec.verdict,
                            rec.bits_used, rec.asserted,
                            {"stones": stones, "X_lo": float(x.lo), "X_hi": float(x.hi)})


def check_ineq_3_13(n_value: int, **kw) -> InequalityRecord:
    """Decided through the cubed form; the stated root form is in the catalog."""
    return check_point("ineq_3_13", n_value, **kw)


def check_ineq_3_15(n_value: int, **kw) -> InequalityRecord:
    return check_point("ineq_3_15", n_value, **kw)


@dataclass
class TermSuiteReport:
    """Per-term and summed comparison of the two binomial expansions at one n."""

    n: int
    term_records: list[InequalityRecord]
    tail: InequalityRecord
    left_sum: IntervalScalar
    right_sum: IntervalScalar
    left_closed: IntervalScalar  # (log(n+1) + log log(n+1) - 1/2)^n
    right_closed: IntervalScalar  # (log n + log log n - 1/2)^(n+1)
    sum_verdict: Verdict
    integer_step: Ordering  # (n+1)^n vs n^(n+1), exactly
    ineq_3_1: InequalityRecord
    bits: int

    @property
    def terms_hold(self) -> bool:
        return all(r.verdict is Verdict.HOLDS for r in self.term_records)

    @property
    def sums_match_closed_forms(self) -> bool:
        def overlap(a, b):
            return a.lo <= b.hi and b.lo <= a.hi

        return overlap(self.left_sum, self.left_closed) and \
            overlap(self.right_sum, self.right_closed)

    @property
    def holds(self) -> bool:
        return (self.terms_hold and self.tail.verdict is Verdict.HOLDS
                and self.sum_verdict is Verdict.HOLDS and self.integer_step is Ordering.LESS
                and self.ineq_3_1.verdict is Verdict.HOLDS)


def binomial_term_suite(n_value: int, max_bits: int = DEFAULT_MAX_BITS) -> TermSuiteReport:
    """Rebuild the n-th power inequality from per-term and tail comparisons.

    The left expansion has terms i = 1..n+1, the right one i = 1..n+2.  Terms
    1..n are compared pairwise; left term n+1 is compared with the sum of the
    right terms n+1 and n+2.  The summed expansions are then compared
    directly and checked against the closed forms.
    """
    terms = [check_binomial_term(n_value, k, max_bits) for k in range(1, n_value + 1)]
    tail = check_ineq_3_7(n_value, max_bits=max_bits)
    check = CATALOG["ineq_3_3_term"]
    env = {"n": n_value}
    for bits in precision_ladder(max_bits, start=128):
        lsum = rsum = IntervalScalar.exact(0, bits)
        for k in range(1, n_value + 3):
            e = dict(env, i=k)
            if k <= n_value + 1:
                lsum = lsum + eval_enclosure(check.lhs, e, bits)
            rsum = rsum + eval_enclosure(check.rhs, e, bits)
        verdict = Verdict.HOLDS if lsum.below(rsum) else \
            Verdict.FAILS if rsum.below(lsum) else Verdict.UNRESOLVED
        if verdict is not Verdict.UNRESOLVED:
            break
    left_closed = eval_enclosure((log(n + 1) + C1) ** n, env, bits)
    right_closed = eval_enclosure((L + C0) ** (n + 1), env, bits)
    step = exact_power_compare(n_value + 1, n_value + 1, n_value, n_value)
    return TermSuiteReport(n_value, terms, tail, lsum, rsum, left_closed, right_closed,
                           verdict, step, check_ineq_3_1(n_value, max_bits), bits)


# -- z(x) = (x log x)^2 - log log 3x -------------------------------------------


@dataclass
class ZReport:
    records: list[InequalityRecord]  # z(x) < z(x + step); extras hold z(x) > 0
    derivative: Decision  # 0 < z'(x_lo)

    @property
    def all_positive(self) -> bool:
        return all(r.extras["positive"] == str(Verdict.HOLDS) for r in self.records)

    @property
    def strictly_increasing(self) -> bool:
        return all(r.verdict is Verdict.HOLDS for r in self.records)


def z_records(xs, step: int = 1, *, max_bits: int = DEFAULT_MAX_BITS,
              assert_from: int | None = None) -> list[InequalityRecord]:
    xs = np.asarray(xs, dtype=np.int64)
    if len(xs) == 0:
        return []
    _require(int(xs.min()) >= 2 and step >= 1, "z needs x >= 2 and step >= 1")
    check = CATALOG["z_monotone"]
    env = {"n": xs, "m": xs + step}
    inc = decide_batch(check.lhs, check.rhs, env, max_bits)
    pos = decide_batch(const(0), Z, {"n": xs}, max_bits)
    return [_record(check, v, v + step, inc.decision(k), assert_from,
                    positive=str(pos.verdict(k)))
            for k, v in enumerate(xs.tolist())]


def check_z_monotone(x_lo: int, x_hi: int, step: int = 1,
                     max_bits: int = DEFAULT_MAX_BITS) -> ZReport:
    """z(x) > 0 and z(x) < z(x + step) for x = x_lo, x_lo + step, ... <= x_hi."""
    _require(x_lo >= 2 and step >= 1 and x_hi >= x_lo, "need 2 <= x_lo <= x_hi and step >= 1")
    xs = np.arange(x_lo, x_hi + 1, step, dtype=np.int64)
    d = decide(const(0), Z_PRIME, {"n": x_lo}, max_bits)
    return ZReport(z_records(xs, step, max_bits=max_bits), d)


# -- prime roots -----------------------------------------------------------------


class NotFoundWithinCap(LookupError):
    pass


def find_smallest_m(n_value: int, cap: int | None = None,
                    table: PrimeTable | None = None) -> int:
    """Smallest m > n with p_m^(1/m) < p_n^(1/n), searching upward from n + 1."""
    _require(n_value >= 1, "n must be >= 1")
    cap = 10 * n_value if cap is None else cap
    table = table or default_cache.ensure_index(max(cap, n_value + 1))
    pn_ = table.p(n_value)
    for mm in range(n_value + 1, cap + 1):
        if compare_roots(table.p(mm), mm, pn_, n_value).verdict is Ordering.LESS:
            return mm
    raise NotFoundWithinCap(f"no m in ({n_value}, {cap}] with p_m^(1/m) < p_n^(1/n)")


_LEVEL_ORDER = {"float64": 0, "interval": 1, "exact_integer": 2}


@dataclass
class FiroozbakhtReport:
    n_lo: int
    n_hi: int
    checked: int = 0
    violations: list[tuple[int, str]] = field(default_factory=list)
    levels: Counter = field(default_factory=Counter)
    max_level: str = "float64"
    max_bits: int = 53

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, batch) -> None:
        self.checked += len(batch.n)
        self.levels["float64"] += len(batch.n) - len(batch.escalated)
        for k, res in batch.escalated.items():
            self.levels[res.resolved_at] += 1
            if _LEVEL_ORDER[res.resolved_at] > _LEVEL_ORDER[self.max_level]:
                self.max_level = res.resolved_at
            if res.resolved_at == "interval":
                self.max_bits = max(self.max_bits, res.bits)
        for k, v in enumerate(batch.verdicts):
            if v is not Ordering.LESS:
                self.violations.append((int(batch.n[k]), str(v)))


def firoozbakht_batch(n_lo: int, n_hi: int, table: PrimeTable | None = None,
                      max_bits: int = DEFAULT_MAX_BITS):
    """Consecutive-root comparisons for n_lo <= n < n_hi."""
    return firoozbakht_batch_at(np.arange(n_lo, n_hi, dtype=np.int64), table, max_bits)


def firoozbakht_batch_at(ns, table: PrimeTable | None = None,
                         max_bits: int = DEFAULT_MAX_BITS):
    ns = np.asarray(ns, dtype=np.int64)
    _require(len(ns) == 0 or int(ns.min()) >= 1, "prime indices start at 1")
    table = table or default_cache.ensure_index(int(ns.max()) + 1 if len(ns) else 2)
    return compare_consecutive_roots(ns, table.primes[ns - 1], table.primes[ns], max_bits)


def verify_firoozbakht_range(n_lo: int, n_hi: int, table: PrimeTable | None = None,
                             chunk: int = 1 << 16,
                             max_bits: int = DEFAULT_MAX_BITS) -> FiroozbakhtReport:
    """p_{n+1}^(1/(n+1)) < p_n^(1/n) for every n in [n_lo, n_hi)."""
    _require(1 <= n_lo < n_hi, "need 1 <= n_lo < n_hi")
    table = table or default_cache.ensure_index(n_hi)
    rep = FiroozbakhtReport(n_lo, n_hi)
    for start in range(n_lo, n_hi, chunk):
        rep.add(firoozbakht_batch(start, min(start + chunk, n_hi), table, max_bits))
    return rep


def firoozbakht_records(ns, table: PrimeTable | None = None,
                        max_bits: int = DEFAULT_MAX_BITS,
                        assert_from: int = 1) -> list[InequalityRecord]:
    """One record per n: lhs = log(p_{n+1})/(n+1), rhs = log(p_n)/n, aux = n + 1."""
    batch = firoozbakht_batch_at(ns, table, max_bits)
    out = []
    for k, nv in enumerate(batch.n.tolist()):
        v = batch.verdicts[k]
        verdict = Verdict.HOLDS if v is Ordering.LESS else Verdict.FAILS
        res = batch.escalated.get(k)
        if res is not None and res.lhs is not None:
            lhs, rhs = res.lhs, res.rhs
        else:
            lhs = (float(batch.lhs_lo[k]), float(batch.lhs_hi[k]))
            rhs = (float(batch.rhs_lo[k]), float(batch.rhs_hi[k]))
        out.append(InequalityRecord("firoozbakht", nv, nv + 1, lhs, rhs, verdict,
                                    int(batch.bits[k]), nv >= assert_from,
                                    {"ordering": str(v)}))
    return out


def small_prime_bound(table: PrimeTable | None = None) -> dict:
    """p at the large-threshold index and the claimed strict bound."""
    table = table or default_cache.ensure_index(ASSERT_LARGE)
    value = table.p(ASSERT_LARGE)
    return {"n": ASSERT_LARGE, "p_n": value, "bound": SMALL_PRIMES_BOUND,
            "holds": value < SMALL_PRIMES_BOUND}


# -- registry --------------------------------------------------------------------

_CODE = {Verdict.HOLDS: 1, Verdict.FAILS: -1, Verdict.UNRESOLVED: 0}


def _codes(records) -> np.ndarray:
    return np.array([_CODE[r.verdict] for r in records], dtype=np.int8)


def _point_scanner(check_id: str):
    def scan(lo: int, hi: int):
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        return ns, _codes(check_range(check_id, ns))

    return scan


for _cid in ("lemma1_step1", "lemma1_step2", "ineq_2_4", "ineq_2_5", "ineq_3_1", "ineq_3_7",
             "ineq_3_11", "ineq_3_13", "ineq_3_15"):
    _c = CATALOG[_cid]
    register(_cid, _c.min_n, _c.threshold)(_point_scanner(_cid))


@register("lemma2", 1, 1)
def _scan_lemma2(lo: int, hi: int):
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    return ns, _codes(lemma2_range(ns))


@register("z_monotone", 2, ASSERT_LARGE)
def _scan_z(lo: int, hi: int):
    xs = np.arange(lo, hi + 1, dtype=np.int64)
    recs = z_records(xs)
    codes = np.array([_CODE[all_hold([r.verdict, Verdict(r.extras["positive"])])]
                      for r in recs], dtype=np.int8)
    return xs, codes


@register("ineq_2_6", MIN_N_2_6, ASSERT_LARGE)
def _scan_2_6(lo: int, hi: int):
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    table = default_cache.ensure_index(3 * hi)
    recs = ineq_2_6_batch(ns, 3 * ns, table.primes[ns - 1], table.primes[3 * ns - 1])
    return ns, _codes(recs)


@register("ineq_3_6", 6, ASSERT_SMALL)
def _scan_3_6(lo: int, hi: int):
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    codes = [_CODE[all_hold(r.verdict for r in ineq_3_6_terms(v))] for v in ns.tolist()]
    return ns, np.array(codes, dtype=np.int8)


@register("ineq_3_3_term", 3, ASSERT_SMALL)
def _scan_terms(lo: int, hi: int):
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    codes = [_CODE[all_hold(check_binomial_term(v, k).verdict for k in range(1, v + 1))]
             for v in ns.tolist()]
    return ns, np.array(codes, dtype=np.int8)


@register("firoozbakht", 1, 1)
def _scan_firoozbakht(lo: int, hi: int):
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    return ns, _codes(firoozbakht_records(ns))


def geometric_samples(lo: int, hi: int, count: int) -> list[int]:
    """About ``count`` integers spread geometrically over [lo, hi], both ends included."""
    _require(1 <= lo <= hi and count >= 2, "need 1 <= lo <= hi and count >= 2")
    pts = {lo, hi}
    ratio = (hi / lo) ** (1 / (count - 1))
    for k in range(1, count - 1):
        pts.add(min(hi, max(lo, round(lo * ratio**k))))
    return sorted(pts)

