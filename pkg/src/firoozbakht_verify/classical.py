"""Two-sided prime bounds for pi, theta, psi and p_n, Kourbatov's gap
inequality, and Cramer-ratio gap statistics.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

import numpy as np
from gmpy2 import mpfr

from .compare import (
    DEFAULT_MAX_BITS,
    FLOAT_BITS,
    BatchDecision,
    Decision,
    Verdict,
    decide_batch,
    precision_ladder,
)
from .expr import Expr, eval_enclosure, eval_float_batch, log, var
from .interval import FloatIntervals, IntervalScalar
from .primes import (
    PrimeTable,
    chebyshev_psi,
    chebyshev_theta,
    default_cache,
    gap_stream,
    psi_scan,
    theta_scan,
)
from .registry import SCANNERS, load_all, register

x = var("x")
n = var("n")
measured = var("m")
half, three_halves = Fraction(1, 2), Fraction(3, 2)

# (lower, upper) bounds as functions of x, or n for p_n
BOUNDS: dict[str, tuple[Expr, Expr]] = {
    "pi": (x / log(x) * (1 + 1 / (2 * log(x))),
           x / log(x) * (1 + 3 / (2 * log(x)))),
    "theta": (x * (1 - 1 / log(x)),
              x * (1 + 1 / (2 * log(x)))),
    "psi": (x * (1 - 1 / log(x) + Fraction(98, 100) / x ** half),
            x * (1 + 1 / (2 * log(x)) + Fraction(102, 100) / x ** half
                 + 3 / x ** Fraction(2, 3))),
    "pn": (n * (log(n) + log(log(n)) - three_halves),
           n * (log(n) + log(log(n)) - half)),
}

STATED_THRESHOLDS = {"pi": 59, "theta": 41, "psi": 121, "pn": 21}

DENSE_LIMIT = 10**4
DEFAULT_GEO_RATIO = 1.01
KOURBATOV_DEFAULT_B = (Fraction(1), Fraction(117, 100))
HIST_STEP = Fraction(1, 20)
HIST_TOP = Fraction(3, 2)

_INV_STEP = float(1 / HIST_STEP)

Enclosure = IntervalScalar | tuple[float, float]


def sample_points(lo: int, hi: int, policy: str = "dense") -> list[int]:
    """Ascending sample of [lo, hi].

    ``dense`` takes every integer; ``geo:R`` is dense up to 10**4 and then
    steps by a factor R, always ending at hi.
    """
    if hi < lo:
        return []
    if policy == "dense":
        return list(range(lo, hi + 1))
    if not policy.startswith("geo:"):
        raise ValueError(f"unknown sample policy {policy!r}")
    ratio = float(policy[4:])
    if ratio <= 1:
        raise ValueError("geometric ratio must exceed 1")
    pts = list(range(lo, min(hi, DENSE_LIMIT) + 1))
    cur = max(lo, DENSE_LIMIT)
    if lo > DENSE_LIMIT:
        pts.append(lo)
    while cur < hi:
        cur = max(cur + 1, math.ceil(cur * ratio))
        pts.append(min(cur, hi))
    return sorted(set(pts))


@dataclass(frozen=True)
class ClassicalBoundRecord:
    """lower < measured < upper at one argument; both links are kept."""

    subject: str
    argument: int
    measured: int | Enclosure
    lower: Enclosure
    upper: Enclosure
    verdict: Verdict
    lower_verdict: Verdict
    upper_verdict: Verdict
    bits: int
    asserted: bool


def _combine(a: Verdict, b: Verdict) -> Verdict:
    if Verdict.FAILS in (a, b):
        return Verdict.FAILS
    if a is Verdict.HOLDS and b is Verdict.HOLDS:
        return Verdict.HOLDS
    return Verdict.UNRESOLVED


def _asserted(subject: str, arg: int) -> bool:
    return arg >= STATED_THRESHOLDS[subject]


def _records_exact(subject: str, args: np.ndarray, values: np.ndarray, argname: str,
                   max_bits: int) -> list[ClassicalBoundRecord]:
    lower, upper = BOUNDS[subject]
    env = {argname: args, "m": values}
    lo_dec = decide_batch(lower, measured, env, max_bits)
    up_dec = decide_batch(measured, upper, env, max_bits)
    out = []
    for k, (a, v) in enumerate(zip(args.tolist(), values.tolist())):
        d1, d2 = lo_dec.decision(k), up_dec.decision(k)
        out.append(ClassicalBoundRecord(subject, a, v, d1.lhs, d2.rhs,
                                        _combine(d1.verdict, d2.verdict), d1.verdict, d2.verdict,
                                        max(d1.bits, d2.bits), _asserted(subject, a)))
    return out


def check_pi_range(xs, table: PrimeTable | None = None,
                   max_bits: int = DEFAULT_MAX_BITS) -> list[ClassicalBoundRecord]:
    xs = np.asarray(list(xs), dtype=np.int64)
    if len(xs) == 0:
        return []
    if xs.min() < 2:
        raise ValueError("pi bounds need x >= 2")
    table = table or default_cache.ensure_limit(int(xs.max()))
    counts = np.searchsorted(table.primes, xs.astype(np.uint64), side="right").astype(np.int64)
    return _records_exact("pi", xs, counts, "x", max_bits)


def check_pn_range(ns, table: PrimeTable | None = None,
                   max_bits: int = DEFAULT_MAX_BITS) -> list[ClassicalBoundRecord]:
    ns = np.asarray(list(ns) if not isinstance(ns, np.ndarray) else ns, dtype=np.int64)
    if len(ns) == 0:
        return []
    if ns.min() < 2:
        raise ValueError("p_n bounds need n >= 2 (log log 1 is undefined)")
    table = table or default_cache.ensure_index(int(ns.max()))
    ps = table.primes[ns - 1]
    return _records_exact("pn", ns, ps, "n", max_bits)


def check_pi_bounds(x: int, **kw) -> ClassicalBoundRecord:
    return check_pi_range([x], **kw)[0]


def check_pn_bounds(n: int, **kw) -> ClassicalBoundRecord:
    return check_pn_range([n], **kw)[0]


def _float_of(enc: IntervalScalar) -> tuple[float, float]:
    return (float(np.nextafter(float(enc.lo), -np.inf)),
            float(np.nextafter(float(enc.hi), np.inf)))


_CHEBYSHEV = {"theta": (theta_scan, chebyshev_theta), "psi": (psi_scan, chebyshev_psi)}


def _check_chebyshev_range(subject: str, xs, table: PrimeTable | None,
                           max_bits: int) -> list[ClassicalBoundRecord]:
    xs = [int(v) for v in xs]
    if not xs:
        return []
    if min(xs) < 2:
        raise ValueError(f"{subject} bounds need x >= 2")
    scan, single = _CHEBYSHEV[subject]
    table = table or default_cache.ensure_limit(max(xs))
    lower, upper = BOUNDS[subject]
    values = [enc for _, enc in scan(xs, 64, table)]
    floats = np.array([_float_of(v) for v in values]).reshape(-1, 2)
    meas = FloatIntervals(floats[:, 0], floats[:, 1])
    arr = {"x": np.asarray(xs, dtype=np.int64)}
    lo_b, up_b = eval_float_batch(lower, arr), eval_float_batch(upper, arr)
    valid = (lo_b.valid() & up_b.valid()).tolist()
    out = []
    for k, arg in enumerate(xs):
        ok = valid[k]
        d1 = d2 = None
        if ok and lo_b.hi[k] < meas.lo[k]:
            d1 = Decision(Verdict.HOLDS, (lo_b.lo[k], lo_b.hi[k]), values[k], FLOAT_BITS)
        if ok and meas.hi[k] < up_b.lo[k]:
            d2 = Decision(Verdict.HOLDS, values[k], (up_b.lo[k], up_b.hi[k]), FLOAT_BITS)
        if d1 is None or d2 is None:
            e1, e2 = _escalate(lower, upper, arg, values[k], single, table, max_bits)
            d1, d2 = d1 or e1, d2 or e2
        out.append(ClassicalBoundRecord(subject, arg, values[k], d1.lhs, d2.rhs,
                                        _combine(d1.verdict, d2.verdict), d1.verdict, d2.verdict,
                                        max(d1.bits, d2.bits), _asserted(subject, arg)))
    return out


def _escalate(lower: Expr, upper: Expr, arg: int, first: IntervalScalar, single, table,
              max_bits: int) -> tuple[Decision, Decision]:
    d1 = d2 = None
    for bits in precision_ladder(max_bits):
        val = first if bits == 64 else single(arg, bits, table)
        lo_e = eval_enclosure(lower, {"x": arg}, bits)
        up_e = eval_enclosure(upper, {"x": arg}, bits)
        v1 = Verdict.HOLDS if lo_e.hi < val.lo else Verdict.FAILS if lo_e.lo > val.hi \
            else Verdict.UNRESOLVED
        v2 = Verdict.HOLDS if val.hi < up_e.lo else Verdict.FAILS if val.lo > up_e.hi \
            else Verdict.UNRESOLVED
        d1, d2 = Decision(v1, lo_e, val, bits), Decision(v2, val, up_e, bits)
        if Verdict.UNRESOLVED not in (v1, v2):
            break
    return d1, d2


def check_theta_range(xs, table: PrimeTable | None = None, max_bits: int = DEFAULT_MAX_BITS):
    return _check_chebyshev_range("theta", xs, table, max_bits)


def check_psi_range(xs, table: PrimeTable | None = None, max_bits: int = DEFAULT_MAX_BITS):
    return _check_chebyshev_range("psi", xs, table, max_bits)


def check_theta_bounds(x: int, **kw) -> ClassicalBoundRecord:
    return check_theta_range([x], **kw)[0]


def check_psi_bounds(x: int, **kw) -> ClassicalBoundRecord:
    return check_psi_range([x], **kw)[0]


RANGE_CHECKS = {
    "pi": check_pi_range,
    "theta": check_theta_range,
    "psi": check_psi_range,
    "pn": check_pn_range,
}


# -- gaps ----------------------------------------------------------------------

gap = var("g")
prime = var("p")
CRAMER_RATIO = gap / log(prime) ** 2


def kourbatov_rhs(b: Fraction) -> Expr:
    """(log p)^2 - log p - b; the inequality is gap < this."""
    return log(prime) ** 2 - log(prime) - b


def b_label(b: Fraction) -> str:
    """1 -> '1', 117/100 -> '1.17'; non-terminating values stay as 'num/den'."""
    if b.denominator == 1:
        return str(b.numerator)
    den = b.denominator
    for f in (2, 5):
        while den % f == 0:
            den //= f
    if den != 1:
        return f"{b.numerator}/{b.denominator}"
    return str(Decimal(b.numerator) / Decimal(b.denominator))


@dataclass(frozen=True)
class GapStatRecord:
    n: int
    gap: int
    prime: int
    cramer_ratio: Enclosure
    kourbatov_margin: Enclosure
    b: Fraction
    verdict: Verdict  # gap < (log p)^2 - log p - b
    rhs: Enclosure
    bits: int


def _margin(rhs: Enclosure, g: int) -> Enclosure:
    if isinstance(rhs, IntervalScalar):
        return rhs - g
    return (math.nextafter(rhs[0] - g, -math.inf), math.nextafter(rhs[1] - g, math.inf))


def kourbatov_batch(ns, ps, gaps, b: Fraction = Fraction(1),
                    max_bits: int = DEFAULT_MAX_BITS) -> list[GapStatRecord]:
    ns = np.asarray(ns, dtype=np.int64)
    ps = np.asarray(ps, dtype=np.uint64)
    gaps = np.asarray(gaps, dtype=np.int64)
    env = {"g": gaps, "p": ps}
    dec: BatchDecision = decide_batch(gap, kourbatov_rhs(b), env, max_bits)
    ratio = eval_float_batch(CRAMER_RATIO, env)
    valid = ratio.valid().tolist()
    r_lo, r_hi = ratio.lo.tolist(), ratio.hi.tolist()
    out = []
    for k in range(len(ns)):
        d = dec.decision(k)
        g, p = int(gaps[k]), int(ps[k])
        if valid[k]:
            r: Enclosure = (r_lo[k], r_hi[k])
        else:
            r = eval_enclosure(CRAMER_RATIO, {"g": g, "p": p}, 64)
        out.append(GapStatRecord(int(ns[k]), g, p, r, _margin(d.rhs, g), b, d.verdict, d.rhs,
                                 d.bits))
    return out


def check_kourbatov(k: int, b: Fraction = Fraction(1),
                    table: PrimeTable | None = None) -> GapStatRecord:
    if k < 1:
        raise ValueError("k must be >= 1")
    table = table or default_cache.ensure_index(k + 1)
    p, q = table.p(k), table.p(k + 1)
    return kourbatov_batch([k], [p], [q - p], Fraction(b))[0]


def enc_lo(e: Enclosure) -> float | mpfr:
    return e.lo if isinstance(e, IntervalScalar) else e[0]


def enc_hi(e: Enclosure) -> float | mpfr:
    return e.hi if isinstance(e, IntervalScalar) else e[1]


@dataclass
class GapSummary:
    """Mergeable single-pass summary of gaps n = n_lo .. n_hi."""

    b: Fraction
    n_lo: int = 0
    n_hi: int = 0
    count: int = 0
    max_ratio: Enclosure | None = None
    max_ratio_n: int | None = None
    kourbatov_failures: int = 0
    kourbatov_unresolved: int = 0
    largest_failing_k: int | None = None
    failing_ks: list[int] = field(default_factory=list)
    histogram: list[int] = field(default_factory=lambda: [0] * (int(HIST_TOP / HIST_STEP) + 1))

    FAIL_LIST_CAP = 1000

    @staticmethod
    def bucket_edges() -> list[Fraction]:
        return [HIST_STEP * i for i in range(int(HIST_TOP / HIST_STEP) + 1)]

    def add(self, rec: GapStatRecord) -> None:
        if self.count == 0:
            self.n_lo = rec.n
        self.n_hi = rec.n
        self.count += 1
        lo = float(enc_lo(rec.cramer_ratio))
        if self.max_ratio is None or lo > float(enc_lo(self.max_ratio)):
            self.max_ratio, self.max_ratio_n = rec.cramer_ratio, rec.n
        bucket = min(int(lo * _INV_STEP), len(self.histogram) - 1)
        self.histogram[bucket] += 1
        if rec.verdict is Verdict.FAILS:
            self.kourbatov_failures += 1
            self.largest_failing_k = rec.n
            if len(self.failing_ks) < self.FAIL_LIST_CAP:
                self.failing_ks.append(rec.n)
        elif rec.verdict is Verdict.UNRESOLVED:
            self.kourbatov_unresolved += 1

    def merge(self, other: GapSummary) -> GapSummary:
        """Combine with a summary of the following (later-n) block."""
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        out = GapSummary(self.b, self.n_lo, other.n_hi, self.count + other.count)
        if float(enc_lo(other.max_ratio)) > float(enc_lo(self.max_ratio)):
            out.max_ratio, out.max_ratio_n = other.max_ratio, other.max_ratio_n
        else:
            out.max_ratio, out.max_ratio_n = self.max_ratio, self.max_ratio_n
        out.kourbatov_failures = self.kourbatov_failures + other.kourbatov_failures
        out.kourbatov_unresolved = self.kourbatov_unresolved + other.kourbatov_unresolved
        out.largest_failing_k = other.largest_failing_k or self.largest_failing_k
        out.failing_ks = (self.failing_ks + other.failing_ks)[: self.FAIL_LIST_CAP]
        out.histogram = [a + c for a, c in zip(self.histogram, other.histogram)]
        return out

    @property
    def kourbatov_onset(self) -> int | None:
        """Smallest k0 with the inequality holding on [k0, n_hi]."""
        if self.kourbatov_unresolved:
            return None
        if self.largest_failing_k is None:
            return self.n_lo
        return self.largest_failing_k + 1 if self.largest_failing_k < self.n_hi else None


def gap_statistics(n_max: int, b: Fraction = Fraction(1), n_min: int = 1,
                   chunk: int = 1 << 16) -> GapSummary:
    """One streaming pass over gaps n = 1 .. n_max - 1 (summarizing n >= n_min)."""
    summary = GapSummary(Fraction(b))
    stream = (t for t in gap_stream(n_max) if t[0] >= n_min)
    while True:
        block = list(itertools.islice(stream, chunk))
        if not block:
            break
        ns, ps, gs = zip(*block)
        for rec in kourbatov_batch(ns, ps, gs, Fraction(b)):
            summary.add(rec)
    return summary


# -- thresholds ------------------------------------------------------------------


def _codes(records) -> np.ndarray:
    return np.array([{Verdict.HOLDS: 1, Verdict.FAILS: -1}.get(r.verdict, 0) for r in records],
                    dtype=np.int8)


def _range_scanner(subject: str):
    def scan(lo: int, hi: int):
        pts = np.arange(lo, hi + 1, dtype=np.int64)
        return pts, _codes(RANGE_CHECKS[subject](pts))

    return scan


for _subject, _min in (("pi", 2), ("theta", 2), ("psi", 2), ("pn", 2)):
    register(f"{_subject}_bounds", _min, STATED_THRESHOLDS[_subject])(_range_scanner(_subject))


def _kourbatov_scanner(b: Fraction):
    def scan(lo: int, hi: int):
        table = default_cache.ensure_index(hi + 1)
        ks = np.arange(lo, hi + 1, dtype=np.int64)
        ps = table.primes[ks - 1]
        gs = (table.primes[ks] - ps).astype(np.int64)
        return ks, _codes(kourbatov_batch(ks, ps, gs, b))

    return scan


for _b in KOURBATOV_DEFAULT_B:
    register(f"kourbatov_b{b_label(_b)}", 1, None)(_kourbatov_scanner(_b))


@dataclass(frozen=True)
class ThresholdScan:
    check_id: str
    n_min: int
    n_max: int
    onset: int | None
    failures: int
    unresolved: tuple[int, ...]
    last_failure: int | None


def threshold_scan(check_id: str, n_max: int, n_min: int | None = None,
                   chunk: int = 1 << 16) -> ThresholdScan:
    entry = load_all().get(check_id)
    if entry is None:
        raise KeyError(f"unknown check id {check_id!r}; known: {sorted(SCANNERS)}")
    lo = entry.min_n if n_min is None else max(n_min, entry.min_n)
    last_bad = None
    last_fail = None
    failures = 0
    unresolved: list[int] = []
    for start in range(lo, n_max + 1, chunk):
        idx, codes = entry.scan(start, min(start + chunk - 1, n_max))
        bad = np.flatnonzero(codes != 1)
        if len(bad):
            last_bad = int(idx[bad[-1]])
        fails = np.flatnonzero(codes == -1)
        failures += len(fails)
        if len(fails):
            last_fail = int(idx[fails[-1]])
        unresolved.extend(int(v) for v in idx[codes == 0])
    if last_bad is None:
        onset = lo
    elif last_bad >= n_max:
        onset = None
    else:
        onset = last_bad + 1
    return ThresholdScan(check_id, lo, n_max, onset, failures, tuple(unresolved), last_fail)


def find_validity_threshold(check_id: str, n_max: int) -> int | None:
    """Smallest n0 such that the check Holds for every n in [n0, n_max]."""
    return threshold_scan(check_id, n_max).onset
