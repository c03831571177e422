"""Independent oracles (trial division, exact fractions, mpmath) shared by
the test modules, and the acceptance summary printed after the run."""
from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mu_oracle(n: int) -> int:
    f = factor(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def prime_power_oracle(n: int):
    """``(p, k)`` if n = p^k with k >= 1, else None."""
    if n < 2:
        return None
    f = factor(n)
    if len(f) != 1:
        return None
    (p, k), = f.items()
    return p, k


def von_mangoldt_mp(n: int):
    pk = prime_power_oracle(n)
    return mpmath.log(pk[0]) if pk else mpmath.mpf(0)


def psi_mp(N: int):
    return mpmath.fsum(von_mangoldt_mp(n) for n in range(2, N + 1))


def m_fraction(N: int) -> Fraction:
    return sum((Fraction(mu_oracle(n), n) for n in range(1, N + 1)), Fraction(0))


def lambda_conv_mp(k: int):
    """(Lambda * Lambda)(k) by the double loop over divisors."""
    total = mpmath.mpf(0)
    for d in range(1, k + 1):
        if k % d == 0:
            total += von_mangoldt_mp(d) * von_mangoldt_mp(k // d)
    return total


EULER_GAMMA = mpmath.euler


@pytest.fixture(scope="session")
def mp40():
    with mpmath.workdps(40):
        yield


def isqrt_floor(x: float) -> int:
    return math.isqrt(int(math.floor(x)))
