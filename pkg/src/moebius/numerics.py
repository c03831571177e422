"""Floating-point plumbing with explicit error bounds.

``CompensatedSum`` is a Neumaier running sum that also tracks ``sum |term|``
so that ``error`` is a rigorous upper bound on ``|value - exact|``, given
that every term handed to it is within ``TERM_ULPS * EPS`` relative error of
its exact value.

``Ball`` is midpoint-radius arithmetic: a float together with a bound on its
distance from the exact quantity it stands for.  Each operation inflates the
radius by the rounding of the operation itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable

EPS = 2.0**-53
# relative error allowed on each incoming term (log from libm < 1 ulp, plus a
# handful of products); summation itself adds at most 2 EPS + n EPS^2
TERM_ULPS = 14
ERR_C = 16.0
_UP = 1.0 + 4 * EPS
MAX_TERMS = 2**33

# full-precision literals; parsed by float() to the nearest double
EULER_GAMMA_STR = "0.57721566490153286060651209008240243104215933593992"
SIX_OVER_PI2_STR = "0.60792710185402662866327677925836583342615264803348"
PI2_OVER_6_STR = "1.6449340668482264364724151666460251892189499012068"
EULER_GAMMA = float(EULER_GAMMA_STR)
SIX_OVER_PI2 = float(SIX_OVER_PI2_STR)
PI2_OVER_6 = float(PI2_OVER_6_STR)
# |float(literal) - literal| <= EPS * |literal|
LITERAL_ERR = EPS


def up(x: float) -> float:
    """Round a nonnegative error estimate upwards."""
    return x * _UP


@dataclass
class CompensatedSum:
    principal: float = 0.0
    compensation: float = 0.0
    abs_accum: float = 0.0
    nterms: int = 0
    base_err: float = 0.0

    def add(self, x: float) -> None:
        s = self.principal
        t = s + x
        if abs(s) >= abs(x):
            self.compensation += (s - t) + x
        else:
            self.compensation += (x - t) + s
        self.principal = t
        self.abs_accum += abs(x)
        self.nterms += 1
        assert self.nterms < MAX_TERMS

    def extend(self, xs: Iterable[float]) -> "CompensatedSum":
        for x in xs:
            self.add(float(x))
        return self

    @property
    def value(self) -> float:
        return self.principal + self.compensation

    @property
    def error(self) -> float:
        return sum_error(self.base_err, self.abs_accum)

    def renormalize(self) -> None:
        """Fold the compensation into the principal; the folding rounding is
        charged to ``base_err``."""
        if self.compensation == 0.0 and self.abs_accum == 0.0:
            return
        v = self.value
        self.base_err = up(self.error + EPS * abs(v))
        self.principal = v
        self.compensation = 0.0
        self.abs_accum = 0.0

    def ball(self) -> "Ball":
        return Ball(self.value, self.error)

    @classmethod
    def of(cls, xs: Iterable[float]) -> "CompensatedSum":
        return cls().extend(xs)

    @classmethod
    def exact(cls, value: float) -> "CompensatedSum":
        return cls(principal=float(value))


def sum_error(base_err: float, abs_accum: float) -> float:
    if abs_accum == 0.0:
        return base_err
    return up(base_err + ERR_C * EPS * abs_accum)


@dataclass(frozen=True)
class Ball:
    """``value`` is within ``err`` of the exact quantity."""

    value: float
    err: float = field(default=0.0)

    @staticmethod
    def of(x) -> "Ball":
        if isinstance(x, Ball):
            return x
        if isinstance(x, int):
            f = float(x)
            return Ball(f, 0.0 if abs(x) <= 2**53 else EPS * abs(f))
        return Ball(float(x), 0.0)

    @staticmethod
    def literal(s: str) -> "Ball":
        f = float(Decimal(s))
        return Ball(f, EPS * abs(f))

    def _round(self, v: float, err: float) -> "Ball":
        return Ball(v, up(err + EPS * abs(v)))

    def __add__(self, other) -> "Ball":
        o = Ball.of(other)
        return self._round(self.value + o.value, self.err + o.err)

    __radd__ = __add__

    def __sub__(self, other) -> "Ball":
        o = Ball.of(other)
        return self._round(self.value - o.value, self.err + o.err)

    def __rsub__(self, other) -> "Ball":
        return Ball.of(other) - self

    def __neg__(self) -> "Ball":
        return Ball(-self.value, self.err)

    def __mul__(self, other) -> "Ball":
        o = Ball.of(other)
        err = abs(self.value) * o.err + abs(o.value) * self.err + self.err * o.err
        return self._round(self.value * o.value, err)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Ball":
        o = Ball.of(other)
        if o.err >= abs(o.value):
            raise ZeroDivisionError("divisor ball contains zero")
        q = self.value / o.value
        err = (self.err + abs(q) * o.err) / (abs(o.value) - o.err)
        return self._round(q, err)

    def __rtruediv__(self, other) -> "Ball":
        return Ball.of(other) / self

    def __abs__(self) -> "Ball":
        return Ball(abs(self.value), self.err)

    def sqr(self) -> "Ball":
        return self * self

    @property
    def lo(self) -> float:
        return self.value - self.err

    @property
    def hi(self) -> float:
        return self.value + self.err

    def log(self) -> "Ball":
        if self.lo <= 0:
            raise ValueError("log of a ball touching zero")
        v = math.log(self.value)
        # |d log| <= err / lo; libm log within one ulp
        return Ball(v, up(self.err / self.lo + 2 * EPS * abs(v)))

    def sqrt(self) -> "Ball":
        if self.lo < 0:
            raise ValueError("sqrt of a ball touching negatives")
        v = math.sqrt(self.value)
        lo = math.sqrt(self.lo)
        return Ball(v, up(self.err / (v + lo) + EPS * v) if v > 0 else math.sqrt(self.err))

    @staticmethod
    def fsum(balls: Iterable["Ball"]) -> "Ball":
        vals, err = [], 0.0
        for b in balls:
            vals.append(b.value)
            err += b.err
        v = math.fsum(vals)
        return Ball(v, up(err + EPS * abs(v)))

    def __repr__(self) -> str:
        return f"Ball({self.value!r} ± {self.err:.3g})"


def log_ball(x) -> Ball:
    return Ball.of(x).log()


def sqrt_ball(x) -> Ball:
    return Ball.of(x).sqrt()


GAMMA_BALL = Ball.literal(EULER_GAMMA_STR)
SIX_OVER_PI2_BALL = Ball.literal(SIX_OVER_PI2_STR)
