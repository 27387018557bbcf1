"""Uniform report rows, CSV / JSON Lines writers and the run summary."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import IO

import gmpy2
from gmpy2 import mpfr

from .classical import ClassicalBoundRecord, GapStatRecord, GapSummary, b_label, enc_hi, enc_lo
from .compare import Verdict
from .inequalities import InequalityRecord
from .interval import IntervalScalar

CSV_HEADER = "inequality_id,n,aux,verdict,lhs_lo,lhs_hi,rhs_lo,rhs_hi,bits_used"
FORMATS = ("csv", "json")
VIOLATION_CAP = 1000


def format_endpoint(x) -> str:
    """Shortest decimal that reads back to the same value at its own precision."""
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    if not isinstance(x, type(mpfr(0))):
        raise TypeError(f"cannot format {type(x).__name__}")
    if not gmpy2.is_finite(x):
        return str(x)
    if x == 0:
        return "0.0"
    prec = x.precision
    # smallest digit count that round-trips; round-tripping is monotone in digits
    lo, hi = 2, math.ceil(prec * math.log10(2)) + 1
    while lo < hi:
        mid = (lo + hi) // 2
        if mpfr(_digits(x, mid), prec) == x:
            hi = mid
        else:
            lo = mid + 1
    return _digits(x, lo)


def _digits(x, k: int) -> str:
    mant, exp10, _ = x.digits(10, k)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    mant = mant.rstrip("0") or "0"
    point = exp10 - 1
    if -5 <= point < 17:
        if point >= len(mant) - 1:
            return f"{sign}{mant}{'0' * (point - len(mant) + 1)}.0"
        if point >= 0:
            return f"{sign}{mant[:point + 1]}.{mant[point + 1:]}"
        return f"{sign}0.{'0' * (-point - 1)}{mant}"
    frac = mant[1:] or "0"
    return f"{sign}{mant[0]}.{frac}e{point}"


@dataclass(frozen=True)
class Row:
    """One report line; endpoints are already formatted."""

    inequality_id: str
    n: int | None
    aux: int | None
    verdict: str
    lhs_lo: str
    lhs_hi: str
    rhs_lo: str
    rhs_hi: str
    bits_used: int
    asserted: bool

    def csv(self) -> str:
        cells = [self.inequality_id, "" if self.n is None else str(self.n),
                 "" if self.aux is None else str(self.aux), self.verdict, self.lhs_lo,
                 self.lhs_hi, self.rhs_lo, self.rhs_hi, str(self.bits_used)]
        return ",".join(cells)

    def json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


def _ends(e) -> tuple[str, str]:
    if isinstance(e, int):
        return str(e), str(e)
    return format_endpoint(enc_lo(e)), format_endpoint(enc_hi(e))


def row_from(rec: InequalityRecord, asserted: bool | None = None) -> Row:
    a, b = _ends(rec.lhs)
    c, d = _ends(rec.rhs)
    return Row(rec.inequality_id, rec.n, rec.aux, str(rec.verdict), a, b, c, d, rec.bits_used,
               rec.asserted if asserted is None else asserted)


def rows_from_bound(rec: ClassicalBoundRecord, asserted: bool | None = None) -> list[Row]:
    """lower < measured and measured < upper as two rows."""
    flag = rec.asserted if asserted is None else asserted
    m = _ends(rec.measured)
    lo = _ends(rec.lower)
    up = _ends(rec.upper)
    return [Row(f"{rec.subject}_lower", rec.argument, None, str(rec.lower_verdict), *lo, *m,
                rec.bits, flag),
            Row(f"{rec.subject}_upper", rec.argument, None, str(rec.upper_verdict), *m, *up,
                rec.bits, flag)]


def row_from_gap(rec: GapStatRecord, asserted: bool) -> Row:
    rl, rh = _ends(rec.rhs)
    return Row(f"kourbatov_b{b_label(rec.b)}", rec.n, None, str(rec.verdict), str(rec.gap),
               str(rec.gap), rl, rh, rec.bits, asserted)


class ReportWriter:
    """Writes rows in one format to an already opened text stream."""

    def __init__(self, stream: IO[str], fmt: str):
        if fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        self.stream, self.fmt = stream, fmt

    def header(self) -> None:
        if self.fmt == "csv":
            self.stream.write(CSV_HEADER + "\n")

    def write(self, rows: list[Row]) -> None:
        if self.fmt == "csv":
            self.stream.write("".join(r.csv() + "\n" for r in rows))
        else:
            self.stream.write("".join(r.json() + "\n" for r in rows))


# -- summary -----------------------------------------------------------------------


def _tally() -> dict:
    return {"total": 0, "Holds": 0, "Fails": 0, "Unresolved": 0}


@dataclass
class Summary:
    """Running totals; a plain-JSON state so it can ride in the checkpoint."""

    command: str
    totals: dict = field(default_factory=_tally)
    asserted: dict = field(default_factory=_tally)
    probes: dict = field(default_factory=_tally)
    violations: list = field(default_factory=list)  # [id, n, aux, verdict]
    violation_count: int = 0
    unresolved: list = field(default_factory=list)  # [id, n, aux]
    onsets: dict = field(default_factory=dict)  # id -> {"last_bad", "max_n", "min_n"}
    thresholds: dict = field(default_factory=dict)
    max_cramer_ratio: dict | None = None
    gaps: dict | None = None
    notes: dict = field(default_factory=dict)
    wall_time_s: float = 0.0
    first_failure: dict | None = None

    def add(self, rows: list[Row]) -> None:
        for r in rows:
            for t in (self.totals, self.asserted if r.asserted else self.probes):
                t["total"] += 1
                t[r.verdict] += 1
            o = self.onsets.setdefault(r.inequality_id,
                                       {"min_n": r.n, "max_n": r.n, "last_bad": None})
            if r.n is not None:
                o["max_n"] = r.n if o["max_n"] is None else max(o["max_n"], r.n)
                o["min_n"] = r.n if o["min_n"] is None else min(o["min_n"], r.n)
                if r.verdict != str(Verdict.HOLDS):
                    o["last_bad"] = r.n if o["last_bad"] is None else max(o["last_bad"], r.n)
            if r.asserted and r.verdict != str(Verdict.HOLDS):
                self.violation_count += 1
                if len(self.violations) < VIOLATION_CAP:
                    self.violations.append([r.inequality_id, r.n, r.aux, r.verdict])
                if r.verdict == str(Verdict.FAILS) and self.first_failure is None:
                    self.first_failure = asdict(r)
            if r.verdict == str(Verdict.UNRESOLVED) and len(self.unresolved) < VIOLATION_CAP:
                self.unresolved.append([r.inequality_id, r.n, r.aux])

    def add_gaps(self, gs: GapSummary) -> None:
        if gs.count == 0:
            return
        g = self.gaps or {"b": str(gs.b), "count": 0, "failures": 0, "unresolved": 0,
                          "largest_failing_k": None, "failing_ks": [], "n_lo": gs.n_lo,
                          "n_hi": gs.n_hi,
                          "histogram_edges": [str(e) for e in GapSummary.bucket_edges()],
                          "histogram": [0] * len(gs.histogram)}
        g["count"] += gs.count
        g["n_hi"] = gs.n_hi
        g["failures"] += gs.kourbatov_failures
        g["unresolved"] += gs.kourbatov_unresolved
        if gs.largest_failing_k is not None:
            g["largest_failing_k"] = gs.largest_failing_k
        g["failing_ks"] = (g["failing_ks"] + gs.failing_ks)[:GapSummary.FAIL_LIST_CAP]
        g["histogram"] = [a + b for a, b in zip(g["histogram"], gs.histogram)]
        self.gaps = g
        lo, hi = _outward_floats(gs.max_ratio)
        if self.max_cramer_ratio is None or lo > self.max_cramer_ratio["lo"]:
            self.max_cramer_ratio = {"n": gs.max_ratio_n, "lo": lo, "hi": hi}

    def finish(self) -> dict:
        out = asdict(self)
        out["onsets"] = {k: _onset(v) for k, v in self.onsets.items()}
        if self.gaps is not None:
            g = self.gaps
            if g["unresolved"]:
                onset = None
            elif g["largest_failing_k"] is None:
                onset = g["n_lo"]
            else:
                onset = g["largest_failing_k"] + 1 if g["largest_failing_k"] < g["n_hi"] else None
            out["gaps"] = dict(g, kourbatov_onset=onset)
        return out

    @classmethod
    def from_state(cls, state: dict) -> Summary:
        return cls(**state)


def _onset(o: dict) -> int | None:
    if o["last_bad"] is None:
        return o["min_n"]
    return o["last_bad"] + 1 if o["last_bad"] < o["max_n"] else None


def _outward_floats(e) -> tuple[float, float]:
    if isinstance(e, IntervalScalar):
        return (math.nextafter(float(e.lo), -math.inf), math.nextafter(float(e.hi), math.inf))
    return float(e[0]), float(e[1])
