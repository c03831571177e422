import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moebius import sieve
from moebius.sieve import SegmentSpec

from conftest import factor, mu_oracle, prime_power_oracle


def mu_at(n):
    return sieve.sieve_mu(SegmentSpec(n, n))[n]


def test_mu_small_examples():
    assert mu_at(1) == 1
    assert mu_at(12) == 0
    assert mu_at(30) == -1


def test_mu_matches_trial_division_below_5000():
    seg = sieve.sieve_mu(SegmentSpec(1, 5000))
    assert [int(v) for v in seg.mu] == [mu_oracle(n) for n in range(1, 5001)]


@given(st.integers(1, 10**12), st.integers(1, 300))
def test_mu_far_segments(lo, length):
    seg = sieve.sieve_mu(SegmentSpec(lo, lo + length - 1))
    for n in range(lo, lo + length, max(1, length // 7)):
        assert seg[n] == mu_oracle(n)


def test_mu_is_minus_one_on_primes_and_counts_squarefree():
    N = 10**5
    mu = sieve.sieve_mu(SegmentSpec(1, N)).mu
    primes = sieve.primes_upto(N)
    assert np.all(mu[primes - 1] == -1)
    # squarefree count by inclusion-exclusion over d^2 <= N
    count = sum(mu_oracle(d) * (N // (d * d)) for d in range(1, math.isqrt(N) + 1))
    assert int(np.sum(mu.astype(np.int64) ** 2)) == count


def test_moebius_floor_identity_for_every_N_up_to_1e5():
    N = 10**5
    mu = sieve.sieve_mu(SegmentSpec(1, N)).mu.astype(np.int64)
    # f(N) - f(N-1) = sum_{d | N} mu(d); the identity says f == 1 everywhere
    g = np.zeros(N + 1, dtype=np.int64)
    for d in range(1, N + 1):
        if mu[d - 1]:
            g[d::d] += mu[d - 1]
    f = np.cumsum(g[1:])
    assert np.all(f == 1)
    for n in (1, 2, 97, 1000, 99991, N):
        assert sum(int(mu[d - 1]) * (n // d) for d in range(1, n + 1)) == 1


def test_mangoldt_examples():
    got = sieve.sieve_mangoldt(SegmentSpec(2, 10))
    assert [e.n for e in got] == [2, 3, 4, 5, 7, 8, 9]
    assert next(e for e in got if e.n == 8)[1:] == (2, 3)
    assert sieve.sieve_mangoldt(SegmentSpec(1, 1)) == []
    assert got[2].value == pytest.approx(math.log(2))


def test_mangoldt_entries_are_exact_prime_powers():
    lo, hi = 999_000, 1_001_000
    entries = sieve.sieve_mangoldt(SegmentSpec(lo, hi))
    ns = [e.n for e in entries]
    assert ns == sorted(set(ns))
    for e in entries:
        assert e.p ** e.k == e.n
        assert factor(e.p) == {e.p: 1}
    expected = [n for n in range(lo, hi + 1) if prime_power_oracle(n)]
    assert ns == expected


def test_lambda_sum_equals_log_lcm_for_every_N_up_to_1e5():
    N = 10**5
    pps = sieve.prime_powers_upto(N)
    lam = np.zeros(N + 1)
    lam[pps.n] = pps.log_p()
    got = np.cumsum(lam)
    # log lcm(1..N) from the lcm's prime exponents; it grows exactly at prime powers
    increments = np.zeros(N + 1)
    for n in range(2, N + 1):
        pk = prime_power_oracle(n)
        if pk:
            increments[n] = math.log(pk[0])
    running = 0.0
    worst = 0.0
    for n in range(1, N + 1):
        running += increments[n]
        worst = max(worst, abs(running - got[n]))
    assert worst <= 1e-9
    lcm_exponents = {p: int(math.log(N) / math.log(p) + 1e-12) for p in sieve.primes_upto(N).tolist()}
    for p, e in lcm_exponents.items():
        assert p ** e <= N < p ** (e + 1)
    log_lcm = math.fsum(e * math.log(p) for p, e in lcm_exponents.items())
    assert abs(log_lcm - got[N]) <= 1e-9


def brute_events(lo, hi, a_lo, a_hi, pp_only):
    out = []
    for x in range(lo, hi + 1):
        for a in range(a_lo + 1, a_hi + 1):
            if x % a == 0 and (not pp_only or prime_power_oracle(a)):
                out.append((x, a))
    return out


def test_divisor_event_examples():
    ev = list(sieve.divisor_events(SegmentSpec(10, 12), (2, 6)))
    assert ev == [(10, 5), (12, 3), (12, 4), (12, 6)]
    assert list(sieve.divisor_events(SegmentSpec(11, 11), (2, 6))) == []
    assert list(sieve.divisor_events(SegmentSpec(16, 16), (2, 8), prime_powers_only=True)) == [(16, 4), (16, 8)]


def test_divisor_events_empty_range_is_rejected():
    with pytest.raises(ValueError):
        list(sieve.divisor_events(SegmentSpec(10, 20), (5, 5)))


@given(st.integers(1, 10**6), st.integers(1, 400), st.integers(0, 40), st.integers(1, 60), st.booleans())
def test_divisor_events_match_brute_force(lo, length, a_lo, width, pp_only):
    hi = lo + length - 1
    got = list(sieve.divisor_events(SegmentSpec(lo, hi), (a_lo, a_lo + width), pp_only))
    assert got == brute_events(lo, hi, a_lo, a_lo + width, pp_only)


def test_divisor_events_full_window_of_ten_thousand():
    lo, hi = 5_000_000, 5_009_999
    got = list(sieve.divisor_events(SegmentSpec(lo, hi), (3, 30)))
    assert got == brute_events(lo, hi, 3, 30, False)


@given(st.integers(2, 30_000), st.lists(st.integers(1, 29_999), max_size=6))
def test_segmentation_does_not_change_output(N, cuts):
    whole_mu = sieve.sieve_mu(SegmentSpec(1, N)).mu
    whole_pp = sieve.sieve_mangoldt(SegmentSpec(1, N))
    bounds = sorted({c for c in cuts if c < N})
    starts = [1] + [c + 1 for c in bounds]
    ends = bounds + [N]
    mu_parts, pp_parts = [], []
    for lo, hi in zip(starts, ends):
        mu_parts.append(sieve.sieve_mu(SegmentSpec(lo, hi)).mu)
        pp_parts += sieve.sieve_mangoldt(SegmentSpec(lo, hi))
    assert np.array_equal(np.concatenate(mu_parts), whole_mu)
    assert pp_parts == whole_pp


def test_segment_spec_validation():
    with pytest.raises(ValueError):
        SegmentSpec(0, 5)
    with pytest.raises(ValueError):
        SegmentSpec(5, 4)
    with pytest.raises(ValueError):
        SegmentSpec(1, 2**63)
    assert len(SegmentSpec(3, 7)) == 5


def test_oversized_segment_raises_resource_error():
    with pytest.raises(sieve.SieveResourceError):
        sieve.sieve_mu(SegmentSpec(1, 10**6), max_size=10**5)
    with pytest.raises(MemoryError):
        sieve.sieve_prime_powers(SegmentSpec(1, 10**6), max_size=10)


def test_segments_cover_range_exactly():
    segs = list(sieve.segments(5, 100, 17))
    assert segs[0].lo == 5 and segs[-1].hi == 100
    assert all(b.lo == a.hi + 1 for a, b in zip(segs, segs[1:]))


def test_csv_dumps(tmp_path):
    seg = sieve.sieve_mu(SegmentSpec(1, 6))
    sieve.dump_mu_csv(seg, tmp_path / "mu.csv")
    assert (tmp_path / "mu.csv").read_text().splitlines()[:3] == ["n,mu", "1,1", "2,-1"]
    sieve.dump_mangoldt_csv(sieve.sieve_mangoldt(SegmentSpec(1, 9)), tmp_path / "pp.csv")
    assert (tmp_path / "pp.csv").read_text().splitlines()[-1] == "9,3,2"
