"""Segmented sieves for mu(n), prime powers (Lambda as exact (p, k) records)
and the divisor events that drive the windowed R4 scan.

Everything here is integer-exact. Lambda values are never materialised as
floats: a prime power is reported as the triple ``(n, p, k)`` with
``n == p**k`` and downstream code chooses how to turn ``k * log(p)`` into a
number.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np
from numba import njit

MAX_INT = 2**63 - 1
DEFAULT_SEGMENT_SIZE = 2**22
# hard ceiling on a single segment (bytes of working memory ~ 10 per entry)
MAX_SEGMENT_SIZE = 2**27


class SieveResourceError(MemoryError):
    """A segment would exceed the configured memory budget."""


@dataclass(frozen=True)
class SegmentSpec:
    """Inclusive integer range ``[lo, hi]`` with ``lo >= 1``."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 1:
            raise ValueError(f"segment lo must be >= 1, got {self.lo}")
        if self.hi < self.lo:
            raise ValueError(f"segment hi < lo: [{self.lo}, {self.hi}]")
        if self.hi > MAX_INT:
            raise ValueError("segment hi exceeds 2**63 - 1")

    def __len__(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class MuSegment:
    spec: SegmentSpec
    mu: np.ndarray  # int8, mu[i] = mu(spec.lo + i)

    def __getitem__(self, n: int) -> int:
        return int(self.mu[n - self.spec.lo])


class MangoldtEntry(NamedTuple):
    n: int
    p: int
    k: int

    @property
    def value(self) -> float:
        return math.log(self.p)


class DivisorEvent(NamedTuple):
    X: int
    a: int


@dataclass(frozen=True)
class PrimePowers:
    """Column form of a sorted list of MangoldtEntry records."""

    n: np.ndarray
    p: np.ndarray
    k: np.ndarray

    def __len__(self) -> int:
        return len(self.n)

    def entries(self) -> list[MangoldtEntry]:
        return [MangoldtEntry(int(a), int(b), int(c)) for a, b, c in zip(self.n, self.p, self.k)]

    def log_p(self) -> np.ndarray:
        return np.log(self.p.astype(np.float64))


def _check_size(spec: SegmentSpec, max_size: int) -> None:
    if len(spec) > max_size:
        raise SieveResourceError(
            f"segment [{spec.lo}, {spec.hi}] has {len(spec)} entries, budget is {max_size}"
        )


# -- base primes -----------------------------------------------------------

def primes_upto(limit: int) -> np.ndarray:
    """All primes <= limit (monolithic sieve, int64)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


class BasePrimes:
    """Primes up to sqrt(max hi), computed once and grown on demand."""

    def __init__(self, max_hi: int = 10**6):
        self._limit = 0
        self._primes = np.zeros(0, dtype=np.int64)
        self.ensure(max_hi)

    def ensure(self, hi: int) -> np.ndarray:
        need = math.isqrt(max(hi, 1)) + 1
        if need > self._limit:
            self._limit = max(need, 2 * self._limit)
            self._primes = primes_upto(self._limit)
        return self._primes

    def for_segment(self, spec: SegmentSpec) -> np.ndarray:
        return self.ensure(spec.hi)


_BASE = BasePrimes()


# -- kernels ---------------------------------------------------------------

@njit(cache=True, nogil=True)
def _mu_kernel(lo, hi, primes):
    size = hi - lo + 1
    mu = np.ones(size, dtype=np.int8)
    rad = np.ones(size, dtype=np.int64)
    for p in primes:
        if p * p > hi:
            break
        start = ((lo + p - 1) // p) * p
        for j in range(start - lo, size, p):
            mu[j] = -mu[j]
            rad[j] *= p
        pp = p * p
        start = ((lo + pp - 1) // pp) * pp
        for j in range(start - lo, size, pp):
            mu[j] = 0
    for i in range(size):
        # one prime factor > sqrt(hi) left over
        if mu[i] != 0 and rad[i] != lo + i:
            mu[i] = -mu[i]
    return mu


@njit(cache=True, nogil=True)
def _prime_power_kernel(lo, hi, primes):
    size = hi - lo + 1
    composite = np.zeros(size, dtype=np.bool_)
    if lo == 1:
        composite[0] = True
    for p in primes:
        if p * p > hi:
            break
        start = ((lo + p - 1) // p) * p
        if start < p * p:
            start = p * p
        for j in range(start - lo, size, p):
            composite[j] = True
    count = 0
    for i in range(size):
        if not composite[i]:
            count += 1
    # powers p^k, k >= 2, of base primes
    extra = 0
    for p in primes:
        if p * p > hi:
            break
        q = p * p
        while q <= hi:
            if q >= lo:
                extra += 1
            if q > hi // p:
                break
            q *= p
    total = count + extra
    ns = np.empty(total, dtype=np.int64)
    ps = np.empty(total, dtype=np.int64)
    ks = np.empty(total, dtype=np.int64)
    pos = 0
    for i in range(size):
        if not composite[i]:
            ns[pos] = lo + i
            ps[pos] = lo + i
            ks[pos] = 1
            pos += 1
    for p in primes:
        if p * p > hi:
            break
        q = p * p
        k = 2
        while q <= hi:
            if q >= lo:
                ns[pos] = q
                ps[pos] = p
                ks[pos] = k
                pos += 1
            if q > hi // p:
                break
            q *= p
            k += 1
    order = np.argsort(ns, kind="mergesort")
    return ns[order], ps[order], ks[order]


@njit(cache=True, nogil=True)
def _divisor_event_kernel(lo, hi, a_values):
    size = hi - lo + 1
    counts = np.zeros(size + 1, dtype=np.int64)
    for a in a_values:
        start = ((lo + a - 1) // a) * a
        for x in range(start, hi + 1, a):
            counts[x - lo + 1] += 1
    for i in range(size):
        counts[i + 1] += counts[i]
    fill = counts[:-1].copy()
    out_a = np.empty(counts[size], dtype=np.int64)
    # a_values ascending -> events ordered by a within each X
    for a in a_values:
        start = ((lo + a - 1) // a) * a
        for x in range(start, hi + 1, a):
            out_a[fill[x - lo]] = a
            fill[x - lo] += 1
    return counts, out_a


# -- public operations -----------------------------------------------------

def sieve_mu(spec: SegmentSpec, max_size: int = MAX_SEGMENT_SIZE,
             base: BasePrimes | None = None) -> MuSegment:
    _check_size(spec, max_size)
    primes = (base or _BASE).for_segment(spec)
    return MuSegment(spec, _mu_kernel(spec.lo, spec.hi, primes))


def sieve_prime_powers(spec: SegmentSpec, max_size: int = MAX_SEGMENT_SIZE,
                       base: BasePrimes | None = None) -> PrimePowers:
    _check_size(spec, max_size)
    primes = (base or _BASE).for_segment(spec)
    n, p, k = _prime_power_kernel(spec.lo, spec.hi, primes)
    return PrimePowers(n, p, k)


def sieve_mangoldt(spec: SegmentSpec, max_size: int = MAX_SEGMENT_SIZE) -> list[MangoldtEntry]:
    """Every prime power in ``[lo, hi]`` once, sorted, as ``(n, p, k)``."""
    return sieve_prime_powers(spec, max_size).entries()


def prime_powers_upto(limit: int) -> PrimePowers:
    if limit < 2:
        empty = np.zeros(0, dtype=np.int64)
        return PrimePowers(empty, empty.copy(), empty.copy())
    return sieve_prime_powers(SegmentSpec(1, limit), max_size=max(limit, MAX_SEGMENT_SIZE))


def divisor_event_arrays(window: SegmentSpec, a_lo: int, a_hi: int,
                         prime_powers_only: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """CSR form of the divisor events: ``a[offsets[i]:offsets[i+1]]`` are the
    qualifying divisors of ``window.lo + i``, ascending.

    Bucket-marks the multiples of each ``a`` in ``(a_lo, a_hi]``; cost is
    ``len(window) * sum(1/a)``, no factoring.
    """
    if a_hi <= a_lo:
        raise ValueError(f"empty a_range ({a_lo}, {a_hi}]")
    a_lo = max(a_lo, 0)
    if prime_powers_only:
        pp = prime_powers_upto(a_hi).n
        a_values = pp[pp > a_lo]
    else:
        a_values = np.arange(a_lo + 1, a_hi + 1, dtype=np.int64)
    return _divisor_event_kernel(window.lo, window.hi, a_values)


def divisor_events(window: SegmentSpec, a_range: tuple[int, int],
                   prime_powers_only: bool = False) -> Iterator[DivisorEvent]:
    a_lo, a_hi = a_range
    offsets, a = divisor_event_arrays(window, a_lo, a_hi, prime_powers_only)
    for i in range(len(window)):
        x = window.lo + i
        for j in range(offsets[i], offsets[i + 1]):
            yield DivisorEvent(x, int(a[j]))


def segments(lo: int, hi: int, size: int = DEFAULT_SEGMENT_SIZE) -> Iterator[SegmentSpec]:
    start = lo
    while start <= hi:
        stop = min(hi, start + size - 1)
        yield SegmentSpec(start, stop)
        start = stop + 1


# -- debug dumps -----------------------------------------------------------

def dump_mu_csv(seg: MuSegment, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "mu"])
        for i, v in enumerate(seg.mu):
            w.writerow([seg.spec.lo + i, int(v)])


def dump_mangoldt_csv(entries: list[MangoldtEntry], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "p", "k"])
        w.writerows(entries)
