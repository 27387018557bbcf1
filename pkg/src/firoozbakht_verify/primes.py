"""Segmented sieve, indexed prime tables and the Chebyshev functions.

All sieving is odd-only over fixed windows so memory stays bounded by the
segment size plus the base primes up to sqrt(hi).
"""

from __future__ import annotations

import math
import os
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import gmpy2
import numpy as np

from .interval import IntervalScalar, log_of_integer

DEFAULT_SEGMENT_BYTES = 1 << 20
# base primes are sieved in one piece; 2**27 keeps that below ~130 MB
DEFAULT_MAX_BASE_LIMIT = 1 << 27
DEFAULT_INDEX_CAP = 1 << 25
U64_MAX = (1 << 64) - 1

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class RangeTooLarge(ValueError):
    """The request needs more base primes than the configured budget."""


class IndexOutOfRange(IndexError):
    """A prime index lies beyond what the table may be extended to."""


def segment_bytes() -> int:
    raw = os.environ.get("PRV_SEGMENT_BYTES")
    if not raw:
        return DEFAULT_SEGMENT_BYTES
    value = int(raw)
    if value < 64:
        raise ValueError(f"PRV_SEGMENT_BYTES too small: {value}")
    return value


def is_prime_u64(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def small_primes(limit: int) -> np.ndarray:
    """All primes <= limit from a plain (unsegmented) sieve."""
    if limit < 2:
        return np.zeros(0, dtype=np.uint64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.uint64)


@dataclass
class SieveSegment:
    """Odd integers lo, lo+2, ..., < hi; ``composite_mask[j]`` covers lo + 2j."""

    lo: int
    hi: int
    composite_mask: np.ndarray

    def primes(self) -> np.ndarray:
        idx = np.flatnonzero(~self.composite_mask)
        return (np.uint64(self.lo) + 2 * idx.astype(np.uint64)).astype(np.uint64)


def _base_primes(hi: int, max_base_limit: int) -> list[int]:
    root = math.isqrt(hi)
    if root > max_base_limit:
        raise RangeTooLarge(
            f"sieving up to {hi} needs base primes to {root}, budget is {max_base_limit}"
        )
    return [int(p) for p in small_primes(root)[1:]]  # odd base primes


def iter_segments(
    lo: int,
    hi: int,
    seg_bytes: int | None = None,
    max_base_limit: int = DEFAULT_MAX_BASE_LIMIT,
) -> Iterator[SieveSegment]:
    """Yield odd-only sieve segments covering [lo, hi] (inclusive)."""
    if hi > U64_MAX:
        raise RangeTooLarge("hi exceeds the 64-bit range")
    seg_len = seg_bytes or segment_bytes()
    base = _base_primes(hi, max_base_limit)
    start = max(lo, 3) | 1
    while start <= hi:
        # mask entry j <-> start + 2j; segment ends before ``stop`` (exclusive)
        stop = min(start + 2 * seg_len, hi + 1)
        count = (stop - start + 1) // 2
        mask = np.zeros(count, dtype=bool)
        for p in base:
            pp = p * p
            if pp >= stop:
                break
            first = max(pp, -(-start // p) * p)
            if not first & 1:
                first += p
            if first < stop:
                mask[(first - start) // 2 :: p] = True
        yield SieveSegment(start, start + 2 * count, mask)
        start += 2 * count


def sieve_range(lo: int, hi: int, **kwargs) -> np.ndarray:
    """Exactly the primes in [lo, hi], ascending, as a uint64 array."""
    if not 2 <= lo <= hi:
        raise ValueError(f"need 2 <= lo <= hi, got lo={lo}, hi={hi}")
    parts = [np.array([2], dtype=np.uint64)] if lo <= 2 else []
    for seg in iter_segments(lo, hi, **kwargs):
        parts.append(seg.primes())
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint64)


def nth_prime_upper_bound(n: int) -> int:
    """An integer strictly above p_n (n(log n + log log n) for n >= 6)."""
    if n < 6:
        return 13
    return int(n * (math.log(n) + math.log(math.log(n)))) + 3


def iter_primes(limit: int | None = None, **kwargs) -> Iterator[int]:
    """Stream primes in order, up to ``limit`` or indefinitely."""
    yield 2
    lo = 3
    span = 1 << 22
    while limit is None or lo <= limit:
        hi = lo + span if limit is None else min(lo + span, limit)
        for seg in iter_segments(lo, hi, **kwargs):
            yield from seg.primes().tolist()
        lo = hi + 1
        span = min(span * 2, 1 << 27)


def gap_stream(n_max: int) -> Iterator[tuple[int, int, int]]:
    """Yield (n, p_n, p_{n+1} - p_n) for n = 1 .. n_max - 1."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    limit = nth_prime_upper_bound(n_max)
    n = 0
    prev = None
    for p in iter_primes(limit):
        if prev is not None:
            yield n, prev, p - prev
        n += 1
        if n >= n_max:
            return
        prev = p


def nth_primes(indices: Iterable[int]) -> dict[int, int]:
    """p_n for an arbitrary set of indices, by one counting pass.

    Only the requested primes are kept, so sparse large indices (e.g. 3 * 10**7)
    cost sieve time but not table memory.
    """
    wanted = sorted(set(int(i) for i in indices))
    if not wanted:
        return {}
    if wanted[0] < 1:
        raise ValueError("prime indices start at 1")
    out: dict[int, int] = {}
    if wanted[0] == 1:
        out[1] = 2
    pending = [i for i in wanted if i > 1]
    if not pending:
        return out
    limit = nth_prime_upper_bound(pending[-1])
    counted = 1  # the prime 2
    k = 0
    for seg in iter_segments(3, limit):
        ps = seg.primes()
        c = len(ps)
        while k < len(pending) and pending[k] <= counted + c:
            out[pending[k]] = int(ps[pending[k] - counted - 1])
            k += 1
        counted += c
        if k == len(pending):
            break
    return out


@dataclass(frozen=True)
class PrimeTable:
    """Primes p_1 .. p_max_index held in a read-only uint64 array."""

    primes: np.ndarray = field(repr=False)
    sieved_to: int = 0  # every prime <= sieved_to is present

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.primes, dtype=np.uint64)
        arr.setflags(write=False)
        object.__setattr__(self, "primes", arr)

    @property
    def max_index(self) -> int:
        return len(self.primes)

    @property
    def limit(self) -> int:
        """Largest x for which pi(x) is known from this table."""
        top = int(self.primes[-1]) if len(self.primes) else 1
        return max(top, self.sieved_to)

    @classmethod
    def build(cls, max_index: int) -> PrimeTable:
        if max_index < 1:
            raise ValueError("max_index must be >= 1")
        ps = sieve_range(2, nth_prime_upper_bound(max_index))[:max_index]
        return cls(ps, int(ps[-1]))

    @classmethod
    def upto(cls, limit: int) -> PrimeTable:
        limit = max(limit, 2)
        return cls(sieve_range(2, limit), limit)

    def p(self, n: int) -> int:
        if not 1 <= n <= self.max_index:
            raise IndexOutOfRange(f"p_{n} not in table of {self.max_index} primes")
        return int(self.primes[n - 1])

    def slice(self, n_lo: int, n_hi: int) -> np.ndarray:
        """p_n for n_lo <= n <= n_hi."""
        if n_lo < 1 or n_hi > self.max_index:
            raise IndexOutOfRange(f"[{n_lo}, {n_hi}] outside table of {self.max_index}")
        return self.primes[n_lo - 1 : n_hi]

    def count(self, x: int) -> int:
        """pi(x) for x <= self.limit."""
        if x > self.limit:
            raise IndexOutOfRange(f"pi({x}) needs primes beyond {self.limit}")
        return int(np.searchsorted(self.primes, np.uint64(max(x, 0)), side="right"))

    def validate(self, spot_checks: int = 64, seed: int = 0) -> None:
        """Raise ValueError unless the table invariants hold."""
        ps = self.primes
        if len(ps) == 0:
            return
        if ps[0] != 2:
            raise ValueError("p_1 must be 2")
        if len(ps) > 1:
            if not np.all(ps[1:] > ps[:-1]):
                raise ValueError("primes not strictly increasing")
            # Bertrand: p_{n+1} < 2 p_n
            if not np.all(ps[1:] < 2 * ps[:-1]):
                bad = int(np.flatnonzero(ps[1:] >= 2 * ps[:-1])[0]) + 1
                raise ValueError(f"Bertrand check failed at n={bad}")
        rng = np.random.default_rng(seed)
        picks = rng.integers(0, len(ps), size=min(spot_checks, len(ps)))
        for k in sorted(set(picks.tolist()) | {len(ps) - 1}):
            if not is_prime_u64(int(ps[k])):
                raise ValueError(f"p_{k + 1} = {int(ps[k])} is not prime")


class PrimeCache:
    """Auto-extending (x2) holder of a PrimeTable, capped at ``index_cap``."""

    def __init__(self, index_cap: int = DEFAULT_INDEX_CAP, initial: int = 1 << 12):
        self.index_cap = index_cap
        self._initial = initial
        self._table: PrimeTable | None = None
        self._lock = threading.Lock()

    @property
    def table(self) -> PrimeTable:
        if self._table is None:
            self.ensure_index(self._initial)
        return self._table

    def ensure_index(self, n: int) -> PrimeTable:
        if n > self.index_cap:
            raise IndexOutOfRange(f"p_{n} beyond index cap {self.index_cap}")
        with self._lock:
            t = self._table
            if t is None or t.max_index < n:
                size = t.max_index if t is not None else self._initial
                while size < n:
                    size *= 2
                self._table = PrimeTable.build(min(max(size, n), self.index_cap))
            return self._table

    def ensure_limit(self, x: int) -> PrimeTable:
        t = self.table
        while t.limit < x:
            if t.max_index >= self.index_cap:
                raise IndexOutOfRange(f"pi({x}) beyond index cap {self.index_cap}")
            t = self.ensure_index(min(2 * t.max_index, self.index_cap))
        return t


default_cache = PrimeCache()


def nth_prime(n: int, cache: PrimeCache | None = None) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return (cache or default_cache).ensure_index(n).p(n)


def prime_count(x: int, cache: PrimeCache | None = None) -> int:
    if x < 2:
        return 0
    return (cache or default_cache).ensure_limit(x).count(x)


# -- Chebyshev functions ---------------------------------------------------

_GUARD_BITS = 32


def _product(values: Iterable[int]) -> gmpy2.mpz:
    acc = gmpy2.mpz(1)
    for v in values:
        acc *= v
    return acc


def theta_scan(xs: Iterable[int], bits: int, table: PrimeTable | None = None,
               chunk: int = 64) -> Iterator[tuple[int, IntervalScalar]]:
    """Enclosures of theta(x) for ascending ``xs`` in a single pass.

    Primes are multiplied exactly in groups of ``chunk`` and each group's log is
    enclosed, so the rounding count grows with pi(x)/chunk, not pi(x).
    """
    xs = list(xs)
    if not xs:
        return
    if any(b < a for a, b in zip(xs, xs[1:])):
        raise ValueError("xs must be ascending")
    if table is None:
        table = default_cache.ensure_limit(xs[-1])
    work = bits + _GUARD_BITS
    acc = IntervalScalar.exact(0, work)
    pos = 0
    ps = table.primes
    for x in xs:
        end = int(np.searchsorted(ps, np.uint64(max(x, 0)), side="right"))
        while pos < end:
            stop = min(pos + chunk, end)
            acc = acc + log_of_integer(_product(ps[pos:stop].tolist()), work)
            pos = stop
        yield x, acc


def chebyshev_theta(x: int, bits: int = 64, table: PrimeTable | None = None) -> IntervalScalar:
    """Rigorous enclosure of theta(x) = sum of log p over primes p <= x."""
    if x < 2 or bits < 53:
        raise ValueError("need x >= 2 and bits >= 53")
    return next(theta_scan([x], bits, table))[1]


def prime_power_excess(x: int, table: PrimeTable | None = None) -> gmpy2.mpz:
    """prod over p <= sqrt(x) of p^(k_p - 1), k_p = max k with p^k <= x.

    psi(x) - theta(x) is the log of this integer.
    """
    root = math.isqrt(x)
    acc = gmpy2.mpz(1)
    if root < 2:
        return acc
    if table is None:
        table = default_cache.ensure_limit(root)
    for p in table.primes[: table.count(root)].tolist():
        pk = p * p
        while pk <= x:
            acc *= p
            pk *= p
    return acc


def psi_scan(xs: Iterable[int], bits: int, table: PrimeTable | None = None
             ) -> Iterator[tuple[int, IntervalScalar]]:
    work = bits + _GUARD_BITS
    for x, theta in theta_scan(xs, bits, table):
        yield x, theta + log_of_integer(prime_power_excess(x, table), work)


def chebyshev_psi(x: int, bits: int = 64, table: PrimeTable | None = None) -> IntervalScalar:
    """Rigorous enclosure of psi(x) = sum of log p over prime powers p^k <= x."""
    if x < 2 or bits < 53:
        raise ValueError("need x >= 2 and bits >= 53")
    return next(psi_scan([x], bits, table))[1]


# -- binary cache ----------------------------------------------------------

MAGIC = b"PRV1"


def _encode_varints(values: np.ndarray) -> bytes:
    values = values.astype(np.uint64)
    rest = values.copy()
    nbytes = np.ones(len(values), dtype=np.int64)
    tmp = rest >> np.uint64(7)
    while np.any(tmp):
        nbytes += tmp > 0
        tmp >>= np.uint64(7)
    width = int(nbytes.max()) if len(values) else 0
    grid = np.zeros((len(values), width), dtype=np.uint8)
    for k in range(width):
        chunk = (rest & np.uint64(0x7F)).astype(np.uint8)
        more = (k + 1) < nbytes
        grid[:, k] = chunk | (more.astype(np.uint8) << 7)
        rest >>= np.uint64(7)
    keep = np.arange(width)[None, :] < nbytes[:, None]
    out = grid[keep]
    return out.tobytes()


def _decode_varints(data: bytes, count: int) -> np.ndarray:
    raw = np.frombuffer(data, dtype=np.uint8)
    ends = np.flatnonzero((raw & 0x80) == 0)
    if len(ends) != count or (count and ends[-1] != len(raw) - 1):
        raise ValueError("corrupt varint stream")
    if count == 0:
        return np.zeros(0, dtype=np.uint64)
    starts = np.concatenate(([0], ends[:-1] + 1))
    group = np.repeat(np.arange(count), ends - starts + 1)
    shift = (np.arange(len(raw)) - starts[group]).astype(np.uint64) * np.uint64(7)
    if shift.max() > 63:
        raise ValueError("varint exceeds 64 bits")
    parts = (raw & 0x7F).astype(np.uint64) << shift
    return np.add.reduceat(parts, starts).astype(np.uint64)


def save_table(table: PrimeTable, path: str | Path) -> None:
    """Write ``PRV1``, a little-endian u64 count, then varint prime deltas."""
    ps = table.primes
    deltas = np.diff(ps, prepend=np.uint64(0))
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(ps)))
        fh.write(_encode_varints(deltas))


def load_table(path: str | Path) -> PrimeTable:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: bad magic {data[:4]!r}")
    (count,) = struct.unpack("<Q", data[4:12])
    deltas = _decode_varints(data[12:], count)
    table = PrimeTable(np.cumsum(deltas, dtype=np.uint64))
    table.validate(spot_checks=16)
    return table
