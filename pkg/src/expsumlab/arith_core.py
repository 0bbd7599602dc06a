"""Arithmetic substrate shared by every evaluator.

Provides Mangoldt and Moebius sieves (full-range and segmented), pointwise
prime-power detection good to 2^64, the centered fractional part, and a
deterministic chunked summation scheme whose result is bit-identical for any
worker count.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError

DEFAULT_SEGMENT_CAPACITY = 1 << 24

# Deterministic Miller-Rabin witness sets.  Each tuple is a proven-complete
# witness set below the stated limit; the last covers all of 2^64.
_MR_SMALL = (2, 3, 5, 7)                                   # n < 3_215_031_751
_MR_MID = (2, 3, 5, 7, 11, 13, 17)                         # n < 341_550_071_728_321
_MR_FULL = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)    # n < 3.3e24 > 2^64

_TRIAL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61)


# ---------------------------------------------------------------------------
# deterministic summation


def _tree_reduce(parts):
    """Fixed fan-in-2 reduction: pairs combined in index order, level by
    level.  The tree shape depends only on len(parts)."""
    parts = list(parts)
    if not parts:
        return 0.0
    while len(parts) > 1:
        nxt = []
        for i in range(0, len(parts) - 1, 2):
            nxt.append(parts[i] + parts[i + 1])
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


@dataclass(frozen=True)
class CompensatedAccumulator:
    """Deterministic chunked summation.

    The index range is cut into fixed chunks; each chunk partial is computed
    independently (possibly on worker threads) and the partials are combined
    by a fixed fan-in-2 tree in chunk order.  Workers only change who
    computes a chunk, never the reduction shape, so the result is
    bit-identical for worker counts 1, 2, 8, ... with a fixed chunk size.
    """

    chunk_size: int = 1 << 16

    def _chunks(self, n: int):
        return [(lo, min(lo + self.chunk_size, n)) for lo in range(0, n, self.chunk_size)]

    def map_reduce(self, n: int, chunk_fn, workers: int = 1):
        """Sum chunk_fn(lo, hi) over the fixed chunking of range(n)."""
        if n <= 0:
            return 0.0
        chunks = self._chunks(n)
        if workers <= 1 or len(chunks) == 1:
            parts = [chunk_fn(lo, hi) for lo, hi in chunks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda c: chunk_fn(*c), chunks))
        return _tree_reduce(parts)

    def sum_array(self, values, workers: int = 1):
        values = np.asarray(values)
        return self.map_reduce(values.shape[0], lambda lo, hi: values[lo:hi].sum(), workers)


def pairwise_sum(values) -> float:
    """One-shot deterministic sum of a 1-d array."""
    return float(CompensatedAccumulator().sum_array(values))


# ---------------------------------------------------------------------------
# fractional parts


def frac(t: float) -> float:
    """Fractional part in [0, 1), also for negative t."""
    return t - math.floor(t)


def psi_frac(t: float) -> float:
    """Centered sawtooth {t} - 1/2."""
    return t - math.floor(t) - 0.5


def psi_frac_many(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return t - np.floor(t) - 0.5


# ---------------------------------------------------------------------------
# sieves


def sieve_primes(limit: int) -> np.ndarray:
    """Boolean prime indicator on [0, limit]."""
    if limit < 0:
        raise ValueError("limit must be nonnegative")
    flags = np.zeros(limit + 1, dtype=bool)
    if limit >= 2:
        flags[2:] = True
        for p in range(2, math.isqrt(limit) + 1):
            if flags[p]:
                flags[p * p:: p] = False
    return flags


def sieve_mobius(limit: int) -> np.ndarray:
    """Moebius function on [0, limit] (index 0 set to 0)."""
    mu = np.ones(limit + 1, dtype=np.int64)
    mu[0] = 0
    for p in np.flatnonzero(sieve_primes(limit)):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p:: p * p] = 0
    return mu


@dataclass(frozen=True)
class MangoldtTable:
    """Mangoldt values on an inclusive integer range [lo, hi].

    values[i] holds the weight of lo + i: log p at prime powers p^k, else 0.
    """

    lo: int
    hi: int
    values: np.ndarray

    def __post_init__(self):
        if self.lo < 1 or self.hi < self.lo:
            raise ValueError(f"bad table range [{self.lo}, {self.hi}]")
        if len(self.values) != self.hi - self.lo + 1:
            raise ValueError("values length does not match [lo, hi]")

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def value_at(self, d: int) -> float:
        if not self.lo <= d <= self.hi:
            raise IndexError(f"{d} outside table range [{self.lo}, {self.hi}]")
        return float(self.values[d - self.lo])

    def sum(self, workers: int = 1) -> float:
        return float(CompensatedAccumulator().sum_array(self.values, workers))

    # flat binary segment format: little-endian int64 lo, hi, then float64 values
    def to_bytes(self) -> bytes:
        return struct.pack("<qq", self.lo, self.hi) + np.ascontiguousarray(
            self.values, dtype="<f8"
        ).tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "MangoldtTable":
        lo, hi = struct.unpack_from("<qq", blob)
        values = np.frombuffer(blob, dtype="<f8", offset=16).astype(np.float64)
        return cls(lo=lo, hi=hi, values=values)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "MangoldtTable":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def sieve_mangoldt(limit: int, capacity: int | None = None) -> MangoldtTable:
    """Mangoldt table on [1, limit]."""
    capacity = DEFAULT_SEGMENT_CAPACITY if capacity is None else capacity
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if limit > capacity:
        raise CapacityError(
            f"range length {limit} exceeds segment capacity {capacity}; "
            "use segment_sieve over sub-ranges"
        )
    values = np.zeros(limit + 1)
    primes = np.flatnonzero(sieve_primes(limit))
    if len(primes):
        values[primes] = np.log(primes.astype(np.float64))
    for p in primes[primes <= math.isqrt(limit)]:
        p = int(p)
        lp = float(np.log(float(p)))
        pk = p * p
        while pk <= limit:
            values[pk] = lp
            pk *= p
    return MangoldtTable(lo=1, hi=limit, values=values[1:])


def segment_sieve(lo: int, hi: int, capacity: int | None = None) -> MangoldtTable:
    """Mangoldt table on the half-open block (lo, hi], i.e. integers
    lo+1 .. hi.  Needs base primes up to sqrt(hi) only."""
    capacity = DEFAULT_SEGMENT_CAPACITY if capacity is None else capacity
    if lo < 1 or hi <= lo:
        raise ValueError(f"need 1 <= lo < hi, got ({lo}, {hi}]")
    n = hi - lo
    if n > capacity:
        raise CapacityError(
            f"segment length {n} exceeds segment capacity {capacity}"
        )
    start = lo + 1
    values = np.zeros(n)
    base = np.flatnonzero(sieve_primes(math.isqrt(hi)))
    composite = np.zeros(n, dtype=bool)
    for p in base:
        p = int(p)
        first = max(p * p, ((start + p - 1) // p) * p)
        if first <= hi:
            composite[first - start:: p] = True
    # unmarked entries are primes (start >= 2, so no special case for 1)
    prime_idx = np.flatnonzero(~composite)
    if len(prime_idx):
        values[prime_idx] = np.log((prime_idx + start).astype(np.float64))
    # proper prime powers of the base primes fall inside the composite mask
    for p in base:
        p = int(p)
        lp = float(np.log(float(p)))
        pk = p * p
        while pk <= hi:
            if pk > lo:
                values[pk - start] = lp
            pk *= p
    return MangoldtTable(lo=start, hi=hi, values=values)


# ---------------------------------------------------------------------------
# pointwise arithmetic


def integer_kth_root(n: int, k: int) -> int:
    """Largest r with r**k <= n, by binary search on exact integers."""
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    if k == 1 or n < 2:
        return n
    hi = 1 << ((n.bit_length() + k - 1) // k)
    lo = hi >> 1
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if mid ** k <= n:
            lo = mid
        else:
            hi = mid
    return lo


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid through 2^64."""
    if n < 2:
        return False
    for p in _TRIAL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    if n < 3_215_031_751:
        bases = _MR_SMALL
    elif n < 341_550_071_728_321:
        bases = _MR_MID
    else:
        bases = _MR_FULL
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in bases:
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


def mangoldt_point(d: int) -> float:
    """Mangoldt value at a single integer, without a sieve.

    Fast path: if d has a prime factor below 64 it is a prime power iff that
    factor exhausts it.  Otherwise every prime factor is >= 64, so d = p^k
    forces k <= bit_length/6 and the remaining perfect-power scan is short.
    """
    if d < 2:
        return 0.0
    for p in _TRIAL_PRIMES:
        if p * p > d:
            return math.log(d)      # no factor below sqrt(d): d is prime
        if d % p == 0:
            q = d
            while q % p == 0:
                q //= p
            return math.log(p) if q == 1 else 0.0
    kmax = d.bit_length() // 6      # factors >= 64 = 2^6
    for k in range(2, kmax + 1):
        r = integer_kth_root(d, k)
        if r ** k == d and is_prime(r):
            return math.log(r)
    return math.log(d) if is_prime(d) else 0.0
