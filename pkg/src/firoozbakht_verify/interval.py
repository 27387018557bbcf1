"""Outward-rounded interval arithmetic.

``IntervalScalar`` keeps MPFR endpoints (via gmpy2) rounded toward -inf / +inf
at a fixed working precision.  ``FloatIntervals`` is the cheap vectorized
float64 pre-filter: every libm result is widened by a relative ``FLOAT_REL``
guard, arithmetic results by one ulp.  Entries that become NaN or infinite are
"unresolved" and must be re-evaluated with ``IntervalScalar``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq, mpz

FLOAT_REL = 2.0**-40

Rational = Union[int, Fraction]


class DomainError(ValueError):
    """An enclosure touches the boundary of a function's domain."""


@lru_cache(maxsize=None)
def contexts(bits: int) -> tuple[gmpy2.context, gmpy2.context]:
    """(round-down, round-up) MPFR contexts at ``bits`` of precision."""
    if bits < 2:
        raise ValueError("precision must be >= 2 bits")
    common = dict(precision=bits, emax=gmpy2.get_emax_max(), emin=gmpy2.get_emin_min())
    return (gmpy2.context(round=gmpy2.RoundDown, **common),
            gmpy2.context(round=gmpy2.RoundUp, **common))


def _neg(x: mpfr, bits: int) -> mpfr:
    # unary minus rounds to the default context; at the operand's precision it is exact
    return contexts(max(bits, x.precision))[0].minus(x)


def _to_mpq(value) -> mpq:
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def _round(ctx: gmpy2.context, value) -> mpfr:
    with ctx:
        return mpfr(value)


@dataclass(frozen=True)
class IntervalScalar:
    """A real number known to lie in [lo, hi]."""

    lo: mpfr
    hi: mpfr
    bits: int

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise ValueError(f"empty or NaN interval [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, value, bits: int) -> IntervalScalar:
        """Tightest enclosure of an int / Fraction / mpz / mpq at ``bits``."""
        q = value if isinstance(value, (int, type(mpz(0)))) else _to_mpq(value)
        down, up = contexts(bits)
        return cls(_round(down, q), _round(up, q), bits)

    @property
    def width(self) -> mpfr:
        return contexts(self.bits)[1].sub(self.hi, self.lo)

    def mid(self) -> mpfr:
        return (self.lo + self.hi) / 2

    def contains(self, value) -> bool:
        """Exact membership test for rationals and mpfr values."""
        if isinstance(value, float):
            value = mpfr(value)
        elif not isinstance(value, type(mpfr(0))):
            value = _to_mpq(value)
        return bool(self.lo <= value <= self.hi)

    def is_point(self) -> bool:
        return self.lo == self.hi

    def below(self, other: IntervalScalar) -> bool:
        """Every point of self is strictly less than every point of other."""
        return bool(self.hi < other.lo)

    def positive(self) -> bool:
        return bool(self.lo > 0)

    def with_bits(self, bits: int) -> IntervalScalar:
        """Outward re-rounding to another precision."""
        down, up = contexts(bits)
        return IntervalScalar(down.plus(self.lo), up.plus(self.hi), bits)

    def _lift(self, other) -> IntervalScalar:
        if isinstance(other, IntervalScalar):
            return other
        return IntervalScalar.exact(other, self.bits)

    def __add__(self, other) -> IntervalScalar:
        o = self._lift(other)
        down, up = contexts(self.bits)
        return IntervalScalar(down.add(self.lo, o.lo), up.add(self.hi, o.hi), self.bits)

    __radd__ = __add__

    def __sub__(self, other) -> IntervalScalar:
        o = self._lift(other)
        down, up = contexts(self.bits)
        return IntervalScalar(down.sub(self.lo, o.hi), up.sub(self.hi, o.lo), self.bits)

    def __rsub__(self, other) -> IntervalScalar:
        return self._lift(other) - self

    def __neg__(self) -> IntervalScalar:
        return IntervalScalar(_neg(self.hi, self.bits), _neg(self.lo, self.bits), self.bits)

    def __mul__(self, other) -> IntervalScalar:
        o = self._lift(other)
        down, up = contexts(self.bits)
        if self.lo >= 0 and o.lo >= 0:
            return IntervalScalar(down.mul(self.lo, o.lo), up.mul(self.hi, o.hi), self.bits)
        pairs = [(a, b) for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        return IntervalScalar(min(down.mul(a, b) for a, b in pairs),
                              max(up.mul(a, b) for a, b in pairs), self.bits)

    __rmul__ = __mul__

    def __truediv__(self, other) -> IntervalScalar:
        o = self._lift(other)
        if o.lo <= 0 <= o.hi:
            raise DomainError(f"division by an enclosure containing zero: {o}")
        down, up = contexts(self.bits)
        pairs = [(a, b) for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        return IntervalScalar(min(down.div(a, b) for a, b in pairs),
                              max(up.div(a, b) for a, b in pairs), self.bits)

    def __rtruediv__(self, other) -> IntervalScalar:
        return self._lift(other) / self

    def log(self) -> IntervalScalar:
        if self.lo <= 0:
            raise DomainError(f"log of an enclosure touching <= 0: {self}")
        down, up = contexts(self.bits)
        return IntervalScalar(down.log(self.lo), up.log(self.hi), self.bits)

    def exp(self) -> IntervalScalar:
        down, up = contexts(self.bits)
        return IntervalScalar(down.exp(self.lo), up.exp(self.hi), self.bits)

    def pow_int(self, k: int) -> IntervalScalar:
        """self ** k for an exact integer k, sign-aware."""
        k = int(k)
        if k == 0:
            return IntervalScalar.exact(1, self.bits)
        if k < 0:
            return IntervalScalar.exact(1, self.bits) / self.pow_int(-k)
        down, up = contexts(self.bits)
        lo, hi, b = self.lo, self.hi, self.bits
        if lo >= 0:
            return IntervalScalar(down.pow(lo, k), up.pow(hi, k), b)
        even = k % 2 == 0
        if hi <= 0:
            if even:
                return IntervalScalar(down.pow(_neg(hi, b), k), up.pow(_neg(lo, b), k), b)
            return IntervalScalar(_neg(up.pow(_neg(lo, b), k), b),
                                  _neg(down.pow(_neg(hi, b), k), b), b)
        if even:
            return IntervalScalar(mpfr(0), up.pow(max(_neg(lo, b), hi), k), b)
        return IntervalScalar(_neg(up.pow(_neg(lo, b), k), b), up.pow(hi, k), b)

    def pow(self, exponent: IntervalScalar) -> IntervalScalar:
        """self ** exponent for a positive base, as exp(exponent * log self)."""
        if self.lo <= 0:
            raise DomainError(f"real power of an enclosure touching <= 0: {self}")
        return (exponent * self.log()).exp()

    def __repr__(self) -> str:
        return f"IntervalScalar([{self.lo}, {self.hi}], bits={self.bits})"


def log_of_integer(z, bits: int) -> IntervalScalar:
    """Enclosure of log z for an exact positive integer of any size."""
    z = mpz(z)
    if z < 1:
        raise DomainError(f"log of {z}")
    if z == 1:
        return IntervalScalar.exact(0, bits)
    down, up = contexts(bits)
    return IntervalScalar(down.log(_round(down, z)), up.log(_round(up, z)), bits)


def log_interval(x, bits: int) -> IntervalScalar:
    """Enclosure of the natural log of a positive int, Fraction or float."""
    if isinstance(x, float):
        x = Fraction(x)
    if x <= 0:
        raise DomainError(f"log of non-positive value {x}")
    return IntervalScalar.exact(x, bits).log()


# -- vectorized float64 pre-filter -------------------------------------------

_TINY = 2.0**-1000


def _down(a: np.ndarray) -> np.ndarray:
    return np.nextafter(a, -np.inf)


def _up(a: np.ndarray) -> np.ndarray:
    return np.nextafter(a, np.inf)


@dataclass
class FloatIntervals:
    """Arrays of float64 enclosures; NaN endpoints mean "unresolved here"."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def from_ints(cls, values) -> FloatIntervals:
        arr = np.asarray(values)
        f = arr.astype(np.float64)
        big = np.abs(f) >= 2.0**53
        return cls(np.where(big, _down(f), f), np.where(big, _up(f), f))

    @classmethod
    def const(cls, q: Rational, shape) -> FloatIntervals:
        f = float(q)
        if Fraction(f) == Fraction(q):
            lo = hi = f
        else:
            lo, hi = float(np.nextafter(f, -np.inf)), float(np.nextafter(f, np.inf))
        return cls(np.full(shape, lo), np.full(shape, hi))

    def valid(self) -> np.ndarray:
        return np.isfinite(self.lo) & np.isfinite(self.hi)

    def __add__(self, o: FloatIntervals) -> FloatIntervals:
        with np.errstate(over="ignore", invalid="ignore"):
            return FloatIntervals(_down(self.lo + o.lo), _up(self.hi + o.hi))

    def __sub__(self, o: FloatIntervals) -> FloatIntervals:
        with np.errstate(over="ignore", invalid="ignore"):
            return FloatIntervals(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __neg__(self) -> FloatIntervals:
        return FloatIntervals(-self.hi, -self.lo)

    def __mul__(self, o: FloatIntervals) -> FloatIntervals:
        with np.errstate(invalid="ignore", over="ignore"):
            c = np.stack([self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi])
            lo, hi = c.min(axis=0), c.max(axis=0)
            bad = np.isnan(c).any(axis=0)
        return FloatIntervals(np.where(bad, np.nan, _down(lo)), np.where(bad, np.nan, _up(hi)))

    def __truediv__(self, o: FloatIntervals) -> FloatIntervals:
        straddle = (o.lo <= 0) & (o.hi >= 0)
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            c = np.stack([self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi])
            lo, hi = c.min(axis=0), c.max(axis=0)
            bad = straddle | np.isnan(c).any(axis=0)
        return FloatIntervals(np.where(bad, np.nan, _down(lo)), np.where(bad, np.nan, _up(hi)))

    def log(self) -> FloatIntervals:
        with np.errstate(invalid="ignore", divide="ignore"):
            rl = np.log(np.where(self.lo > 0, self.lo, np.nan))
            rh = np.log(np.where(self.lo > 0, self.hi, np.nan))
        return FloatIntervals(rl - np.abs(rl) * FLOAT_REL - _TINY,
                              rh + np.abs(rh) * FLOAT_REL + _TINY)

    def exp(self) -> FloatIntervals:
        with np.errstate(over="ignore", invalid="ignore"):
            rl = np.exp(self.lo) * (1 - FLOAT_REL)
            rh = np.maximum(np.exp(self.hi) * (1 + FLOAT_REL), 5e-324)
        return FloatIntervals(rl, rh)

    def pow(self, e: FloatIntervals) -> FloatIntervals:
        """Positive-base power; other bases are left unresolved."""
        base = FloatIntervals(np.where(self.lo > 0, self.lo, np.nan), self.hi)
        return (e * base.log()).exp()
