"""Decision kernel: float64 filter -> MPFR intervals at doubling precision -> exact integers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import gmpy2
import numpy as np

from .expr import Env, Expr, eval_enclosure, eval_float_batch
from .interval import FLOAT_REL, DomainError, IntervalScalar, log_of_integer

START_BITS = 64
DEFAULT_MAX_BITS = 4096
FLOAT_BITS = 53  # reported as bits_used when the float64 level decided
EXACT_BITS = 0  # reported as bits_used when the exact integer level decided


class Verdict(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNRESOLVED = "Unresolved"

    def __str__(self) -> str:
        return self.value


class Ordering(str, Enum):
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"

    def __str__(self) -> str:
        return self.value

    def flipped(self) -> Ordering:
        return {Ordering.LESS: Ordering.GREATER, Ordering.GREATER: Ordering.LESS}.get(self, self)


@dataclass(frozen=True)
class Decision:
    """Outcome of ``lhs < rhs`` with the enclosures that decided it."""

    verdict: Verdict
    lhs: IntervalScalar | tuple[float, float]
    rhs: IntervalScalar | tuple[float, float]
    bits: int


def precision_ladder(max_bits: int, start: int = START_BITS):
    bits = start
    while bits <= max_bits:
        yield bits
        bits *= 2


def _verdict(lhs: IntervalScalar, rhs: IntervalScalar) -> Verdict:
    if lhs.hi < rhs.lo:
        return Verdict.HOLDS
    if lhs.lo > rhs.hi:
        return Verdict.FAILS
    return Verdict.UNRESOLVED


def decide(lhs: Expr, rhs: Expr, env: Env | int, max_bits: int = DEFAULT_MAX_BITS) -> Decision:
    """Decide lhs < rhs at one point, doubling precision from 64 bits.

    Equal values can never be separated and end Unresolved at ``max_bits``.
    """
    last = None
    domain = None
    for bits in precision_ladder(max_bits):
        try:
            a = eval_enclosure(lhs, env, bits)
            b = eval_enclosure(rhs, env, bits)
        except DomainError as e:
            # a wide enclosure may touch a domain boundary; retry tighter
            domain = e
            continue
        last = Decision(_verdict(a, b), a, b, bits)
        if last.verdict is not Verdict.UNRESOLVED:
            return last
    if last is None:
        if domain is not None:
            raise domain
        raise ValueError(f"max_bits={max_bits} below the starting precision {START_BITS}")
    return last


def decide_inequality(lhs: Expr, rhs: Expr, n: int, max_bits: int = DEFAULT_MAX_BITS) -> Verdict:
    return decide(lhs, rhs, {"n": n}, max_bits).verdict


def decide_chain(exprs: list[Expr], env: Env | int, max_bits: int = DEFAULT_MAX_BITS
                 ) -> list[Decision]:
    return [decide(a, b, env, max_bits) for a, b in zip(exprs, exprs[1:])]


@dataclass
class BatchDecision:
    """Verdicts for many rows; float-level rows keep plain float enclosures."""

    verdicts: np.ndarray  # int8: 1 Holds, -1 Fails, 0 Unresolved
    bits: np.ndarray
    lhs_lo: np.ndarray
    lhs_hi: np.ndarray
    rhs_lo: np.ndarray
    rhs_hi: np.ndarray
    escalated: dict[int, Decision] = field(default_factory=dict)

    _CODES = {1: Verdict.HOLDS, -1: Verdict.FAILS, 0: Verdict.UNRESOLVED}

    def __len__(self) -> int:
        return len(self.verdicts)

    def decision(self, k: int) -> Decision:
        if k in self.escalated:
            return self.escalated[k]
        return Decision(self._CODES[int(self.verdicts[k])],
                        (float(self.lhs_lo[k]), float(self.lhs_hi[k])),
                        (float(self.rhs_lo[k]), float(self.rhs_hi[k])),
                        int(self.bits[k]))

    def verdict(self, k: int) -> Verdict:
        return self._CODES[int(self.verdicts[k])]


_CODE = {Verdict.HOLDS: 1, Verdict.FAILS: -1, Verdict.UNRESOLVED: 0}


def decide_batch(lhs: Expr, rhs: Expr, env: Mapping[str, np.ndarray],
                 max_bits: int = DEFAULT_MAX_BITS) -> BatchDecision:
    """``decide`` over arrays of variable values with a vectorized float64 pre-pass."""
    env = {k: np.asarray(v) for k, v in env.items()}
    a = eval_float_batch(lhs, env)
    b = eval_float_batch(rhs, env)
    ok = a.valid() & b.valid()
    holds = ok & (a.hi < b.lo)
    fails = ok & (a.lo > b.hi)
    verdicts = np.where(holds, 1, np.where(fails, -1, 0)).astype(np.int8)
    bits = np.full(len(verdicts), FLOAT_BITS, dtype=np.int64)
    out = BatchDecision(verdicts, bits, a.lo, a.hi, b.lo, b.hi)
    for k in np.flatnonzero(verdicts == 0).tolist():
        point = {name: int(v[k]) for name, v in env.items()}
        d = decide(lhs, rhs, point, max_bits)
        out.escalated[k] = d
        out.verdicts[k] = _CODE[d.verdict]
        out.bits[k] = d.bits
    return out


# -- prime roots -------------------------------------------------------------


@dataclass(frozen=True)
class ExactOrdering:
    """Ordering of p_a^(1/a) against p_b^(1/b) and the level that settled it.

    ``lhs``/``rhs`` enclose log(p_a)/a and log(p_b)/b at the last level tried.
    """

    verdict: Ordering
    resolved_at: str  # "float64", "interval", "exact_integer"
    bits: int
    lhs: tuple[float, float] | IntervalScalar | None = None
    rhs: tuple[float, float] | IntervalScalar | None = None


def _float_root_log(p: int, a: int) -> tuple[float, float]:
    u = math.log(p) / a
    return u * (1 - FLOAT_REL), u * (1 + FLOAT_REL)


def exact_power_compare(p_a: int, a: int, p_b: int, b: int) -> Ordering:
    """Compare p_a^b with p_b^a exactly (same ordering as p_a^(1/a) vs p_b^(1/b))."""
    x, y = gmpy2.mpz(p_a), gmpy2.mpz(p_b)
    # bit-length windows of x^b and y^a; disjoint windows decide without powering
    lx, ly = x.bit_length(), y.bit_length()
    x_lo, x_hi = b * (lx - 1) + 1, b * lx
    y_lo, y_hi = a * (ly - 1) + 1, a * ly
    if x_hi < y_lo:
        return Ordering.LESS
    if x_lo > y_hi:
        return Ordering.GREATER
    u, v = x**b, y**a
    if u < v:
        return Ordering.LESS
    return Ordering.GREATER if u > v else Ordering.EQUAL


def compare_roots(p_a: int, a: int, p_b: int, b: int, *, max_bits: int = DEFAULT_MAX_BITS,
                  use_float: bool = True, exact_only: bool = False) -> ExactOrdering:
    """True ordering of p_a^(1/a) vs p_b^(1/b).

    Ladder: float64 with a 2^-40 relative budget, MPFR intervals at 128, 256, ...
    ``max_bits``, then exact comparison of p_a^b and p_b^a.  Equal only ever
    comes from the exact level.
    """
    if p_a < 2 or p_b < 2 or a < 1 or b < 1:
        raise ValueError("need p_a, p_b >= 2 and a, b >= 1")
    lhs = rhs = None
    if not exact_only:
        if use_float:
            lhs, rhs = _float_root_log(p_a, a), _float_root_log(p_b, b)
            if lhs[1] < rhs[0]:
                return ExactOrdering(Ordering.LESS, "float64", FLOAT_BITS, lhs, rhs)
            if lhs[0] > rhs[1]:
                return ExactOrdering(Ordering.GREATER, "float64", FLOAT_BITS, lhs, rhs)
        for bits in precision_ladder(max_bits, start=128):
            lhs = log_of_integer(p_a, bits) / a
            rhs = log_of_integer(p_b, bits) / b
            if lhs.hi < rhs.lo:
                return ExactOrdering(Ordering.LESS, "interval", bits, lhs, rhs)
            if lhs.lo > rhs.hi:
                return ExactOrdering(Ordering.GREATER, "interval", bits, lhs, rhs)
    return ExactOrdering(exact_power_compare(p_a, a, p_b, b), "exact_integer", EXACT_BITS,
                         lhs, rhs)


@dataclass
class ConsecutiveRootBatch:
    """compare_roots(p_{n+1}, n+1, p_n, n) for a contiguous block of n."""

    n: np.ndarray
    verdicts: list[Ordering]
    bits: np.ndarray
    lhs_lo: np.ndarray
    lhs_hi: np.ndarray
    rhs_lo: np.ndarray
    rhs_hi: np.ndarray
    escalated: dict[int, ExactOrdering]


def compare_consecutive_roots(n: np.ndarray, p_n: np.ndarray, p_next: np.ndarray,
                              max_bits: int = DEFAULT_MAX_BITS) -> ConsecutiveRootBatch:
    """Vectorized float64 level of ``compare_roots`` for consecutive pairs."""
    n = np.asarray(n, dtype=np.int64)
    u = np.log(np.asarray(p_next, dtype=np.float64)) / (n + 1)
    v = np.log(np.asarray(p_n, dtype=np.float64)) / n
    lhs_lo, lhs_hi = u * (1 - FLOAT_REL), u * (1 + FLOAT_REL)
    rhs_lo, rhs_hi = v * (1 - FLOAT_REL), v * (1 + FLOAT_REL)
    less = lhs_hi < rhs_lo
    greater = lhs_lo > rhs_hi
    verdicts = [Ordering.LESS if x else Ordering.GREATER if g else None
                for x, g in zip(less.tolist(), greater.tolist())]
    bits = np.full(len(n), FLOAT_BITS, dtype=np.int64)
    escalated = {}
    for k in np.flatnonzero(~(less | greater)).tolist():
        res = compare_roots(int(p_next[k]), int(n[k]) + 1, int(p_n[k]), int(n[k]),
                            max_bits=max_bits, use_float=False)
        escalated[k] = res
        verdicts[k] = res.verdict
        bits[k] = res.bits
    return ConsecutiveRootBatch(n, verdicts, bits, lhs_lo, lhs_hi, rhs_lo, rhs_hi, escalated)
