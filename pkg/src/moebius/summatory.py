"""Streaming, checkpointed summatory functions of mu and Lambda.

One sequential pass over ``n = 1, 2, ...`` maintains

* exact integers ``M(X)``, ``Q(X) = #squarefree <= X`` and
  ``int_1^X |M(t)| dt`` (at integer X this is ``sum_{n<X} |M(n)|``);
* compensated sums (with error bounds) for ``m``, ``psi``, ``psi~``,
  ``sum Lambda(n) log^k n``, ``sum mu(n) log^k n``, ``sum mu^2(n)/n`` and a
  few auxiliary weights.

Segments are sieved independently (optionally on a thread pool) and reduced
strictly in order, so every value is bit-for-bit independent of segment size,
checkpoint stride and worker count.  Compensated sums are renormalised at the
fixed positions ``n % RENORM_BLOCK == 0``; that is also what makes a
checkpoint row at such an ``X`` a complete description of the state.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from numba import njit

from . import sieve
from .numerics import (
    EPS,
    ERR_C,
    Ball,
    CompensatedSum,
    SIX_OVER_PI2_BALL,
    sum_error,
)

RENORM_BLOCK = 10**6

SUM_FIELDS = (
    "m",            # mu(n)/n
    "psi",          # Lambda(n)
    "psi_tilde",    # Lambda(n)/n
    "lambda_log",   # Lambda(n) log n
    "lambda_log2",  # Lambda(n) log^2 n
    "q_log",        # mu^2(n)/n
    "mu_log",       # mu(n) log n
    "mu_log2",      # mu(n) log^2 n
    "lambda_sqrt",  # Lambda(n)/sqrt(n)
    "q_sqrt",       # mu^2(n)/sqrt(n)
)
INT_FIELDS = ("M", "absM_integral", "Q")
_SUM = {name: i for i, name in enumerate(SUM_FIELDS)}
_INT = {name: i for i, name in enumerate(INT_FIELDS)}
LAMBDA_FIELDS = ("psi", "psi_tilde", "lambda_log", "lambda_log2", "lambda_sqrt")
CHECKPOINT_SUMS = ("m", "psi", "psi_tilde", "lambda_log", "q_log")

# -- kernels ---------------------------------------------------------------
# sums[j] = (principal, compensation, abs_accum, base_err)


@njit(cache=True, inline="always")
def _add(sums, j, x):
    s = sums[j, 0]
    t = s + x
    if abs(s) >= abs(x):
        sums[j, 1] += (s - t) + x
    else:
        sums[j, 1] += (x - t) + s
    sums[j, 0] = t
    sums[j, 2] += abs(x)


@njit(cache=True, inline="always")
def _err(sums, j):
    if sums[j, 2] == 0.0:
        return sums[j, 3]
    return (sums[j, 3] + 16.0 * 1.1102230246251565e-16 * sums[j, 2]) * (1.0 + 4.440892098500626e-16)


@njit(cache=True)
def _renorm(sums):
    for j in range(sums.shape[0]):
        if sums[j, 1] == 0.0 and sums[j, 2] == 0.0:
            continue
        v = sums[j, 0] + sums[j, 1]
        e = _err(sums, j)
        sums[j, 3] = (e + 1.1102230246251565e-16 * abs(v)) * (1.0 + 4.440892098500626e-16)
        sums[j, 0] = v
        sums[j, 1] = 0.0
        sums[j, 2] = 0.0


@njit(cache=True, inline="always")
def _add_lambda(sums, n, p, k):
    # identical arithmetic in the full stream and in the query kernel
    lp = math.log(float(p))
    ln = k * lp
    _add(sums, 1, lp)
    _add(sums, 2, lp / n)
    _add(sums, 3, lp * ln)
    _add(sums, 4, lp * ln * ln)
    _add(sums, 8, lp / math.sqrt(float(n)))


@njit(cache=True, nogil=True)
def _stream_kernel(lo, hi, mu, pp_n, pp_p, pp_k, ints, sums, nterms,
                   rows_i, out_i, rows_f, out_f, out_e, block):
    ptr = 0
    want_e = out_e.shape[1] > 0
    npp = pp_n.shape[0]
    nsum = sums.shape[0]
    for n in range(lo, hi + 1):
        i = n - lo
        ints[1] += abs(ints[0])
        u = mu[i]
        ints[0] += u
        if u != 0:
            ints[2] += 1
            fn = float(n)
            inv = 1.0 / fn
            _add(sums, 0, u * inv)
            _add(sums, 5, inv)
            ln = math.log(fn)
            _add(sums, 6, u * ln)
            _add(sums, 7, u * (ln * ln))
            _add(sums, 9, 1.0 / math.sqrt(fn))
            nterms[0] += 1
        if ptr < npp and pp_n[ptr] == n:
            _add_lambda(sums, float(n), pp_p[ptr], pp_k[ptr])
            nterms[1] += 1
            ptr += 1
        if n % block == 0:
            _renorm(sums)
        for r in range(3):
            if rows_i[r] >= 0:
                out_i[rows_i[r], i] = ints[r]
        for j in range(nsum):
            if rows_f[j] >= 0:
                out_f[rows_f[j], i] = sums[j, 0] + sums[j, 1]
                if want_e:
                    out_e[rows_f[j], i] = _err(sums, j)


@njit(cache=True)
def _flush(upto, state_pos, sums, block, queries, qptr, cols, q_val, q_err):
    # advance through renorm boundaries and queries <= upto (boundary first)
    pos = state_pos
    nq = queries.shape[0]
    nb = (pos // block + 1) * block
    while True:
        nextq = queries[qptr] if qptr < nq else upto + 1
        if nb <= upto and nb <= nextq:
            _renorm(sums)
            nb += block
            continue
        if nextq <= upto:
            for r in range(cols.shape[0]):
                j = cols[r]
                q_val[qptr, r] = sums[j, 0] + sums[j, 1]
                q_err[qptr, r] = _err(sums, j)
            qptr += 1
            continue
        break
    return qptr


@njit(cache=True, nogil=True)
def _lambda_query_kernel(lo, hi, pp_n, pp_p, pp_k, sums, block,
                         queries, qptr, cols, q_val, q_err):
    pos = lo - 1
    for t in range(pp_n.shape[0]):
        n = pp_n[t]
        qptr = _flush(n - 1, pos, sums, block, queries, qptr, cols, q_val, q_err)
        pos = n - 1
        _add_lambda(sums, float(n), pp_p[t], pp_k[t])
    qptr = _flush(hi, pos, sums, block, queries, qptr, cols, q_val, q_err)
    return qptr


# -- state -----------------------------------------------------------------


@dataclass(frozen=True)
class SummatoryCheckpoint:
    X: int
    M: int
    m: CompensatedSum
    psi: CompensatedSum
    psi_tilde: CompensatedSum
    lambda_log: CompensatedSum
    absM_integral: int
    Q: int
    q_log: CompensatedSum

    CSV_HEADER = ("X,M,m_hi,m_err,psi_hi,psi_err,psitilde_hi,psitilde_err,"
                  "lambdalog_hi,lambdalog_err,absMint,Q,qlog_hi,qlog_err")

    def csv_row(self) -> str:
        f = "{:.17g}".format
        cols = [str(self.X), str(self.M)]
        for cs in (self.m, self.psi, self.psi_tilde, self.lambda_log):
            cols += [f(cs.value), f(cs.error)]
        cols += [str(self.absM_integral), str(self.Q), f(self.q_log.value), f(self.q_log.error)]
        return ",".join(cols)

    @classmethod
    def from_csv_row(cls, row: str) -> "SummatoryCheckpoint":
        c = row.strip().split(",")
        if len(c) != 14:
            raise ValueError(f"malformed checkpoint row: {row!r}")

        def cs(v, e):
            return CompensatedSum(principal=float(v), base_err=float(e))

        return cls(X=int(c[0]), M=int(c[1]), m=cs(c[2], c[3]), psi=cs(c[4], c[5]),
                   psi_tilde=cs(c[6], c[7]), lambda_log=cs(c[8], c[9]),
                   absM_integral=int(c[10]), Q=int(c[11]), q_log=cs(c[12], c[13]))


class StreamState:
    """Complete running state after processing ``n = 1 .. X``."""

    def __init__(self):
        self.X = 0
        self.ints = np.zeros(len(INT_FIELDS), dtype=np.int64)
        self.sums = np.zeros((len(SUM_FIELDS), 4), dtype=np.float64)
        self.nterms = np.zeros(2, dtype=np.int64)

    def copy(self) -> "StreamState":
        st = StreamState()
        st.X = self.X
        st.ints = self.ints.copy()
        st.sums = self.sums.copy()
        st.nterms = self.nterms.copy()
        return st

    def compensated(self, name: str) -> CompensatedSum:
        j = _SUM[name]
        s, c, a, b = (float(v) for v in self.sums[j])
        n = int(self.nterms[0 if name in ("m", "q_log", "mu_log", "mu_log2", "q_sqrt") else 1])
        return CompensatedSum(s, c, a, n, b)

    def value(self, name: str) -> float:
        j = _SUM[name]
        return float(self.sums[j, 0] + self.sums[j, 1])

    def error(self, name: str) -> float:
        j = _SUM[name]
        return sum_error(float(self.sums[j, 3]), float(self.sums[j, 2]))

    def ball(self, name: str) -> Ball:
        return Ball(self.value(name), self.error(name))

    def integer(self, name: str) -> int:
        return int(self.ints[_INT[name]])

    def checkpoint(self) -> SummatoryCheckpoint:
        c = self.compensated
        return SummatoryCheckpoint(
            X=self.X, M=self.integer("M"), m=c("m"), psi=c("psi"), psi_tilde=c("psi_tilde"),
            lambda_log=c("lambda_log"), absM_integral=self.integer("absM_integral"),
            Q=self.integer("Q"), q_log=c("q_log"))

    @classmethod
    def from_checkpoint(cls, cp: SummatoryCheckpoint) -> "StreamState":
        """Only valid at renormalisation points; sums not persisted become NaN."""
        if cp.X % RENORM_BLOCK != 0:
            raise ValueError(f"cannot resume from X={cp.X}: not a multiple of {RENORM_BLOCK}")
        st = cls()
        st.X = cp.X
        st.ints[:] = (cp.M, cp.absM_integral, cp.Q)
        st.sums[:] = np.nan
        for name, cs in (("m", cp.m), ("psi", cp.psi), ("psi_tilde", cp.psi_tilde),
                         ("lambda_log", cp.lambda_log), ("q_log", cp.q_log)):
            st.sums[_SUM[name]] = (cs.principal, 0.0, 0.0, cs.base_err)
        st.nterms[:] = cp.X
        return st


@dataclass
class Chunk:
    """Per-n outputs for ``n in [lo, hi]`` plus the error bounds at ``hi``
    (error bounds are nondecreasing, so they cover the whole chunk).
    ``point_errors`` holds the bound at every n when it was requested."""

    lo: int
    hi: int
    ints: dict = field(default_factory=dict)
    sums: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    point_errors: dict = field(default_factory=dict)

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)


# -- the stream ------------------------------------------------------------


def _sieve_pair(spec: sieve.SegmentSpec):
    return sieve.sieve_mu(spec), sieve.sieve_prime_powers(spec)


def _ordered_map(fn, items: Iterable, workers: int) -> Iterator:
    if workers <= 1:
        for it in items:
            yield fn(it)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending = []
        for it in items:
            pending.append(pool.submit(fn, it))
            if len(pending) > workers:
                yield pending.pop(0).result()
        for fut in pending:
            yield fut.result()


def _cut_segments(lo: int, hi: int, size: int, cuts: Sequence[int] = ()) -> Iterator[sieve.SegmentSpec]:
    cuts = sorted(c for c in set(cuts) if lo <= c < hi)
    start = lo
    for c in cuts + [hi]:
        if c < start:
            continue
        yield from sieve.segments(start, c, size)
        start = c + 1


class SummatoryStream:
    def __init__(self, segment_size: int = sieve.DEFAULT_SEGMENT_SIZE, workers: int = 1,
                 state: StreamState | None = None):
        self.segment_size = int(segment_size)
        self.workers = int(workers)
        self.state = state.copy() if state is not None else StreamState()

    def chunks(self, upto: int, ints: Sequence[str] = (), sums: Sequence[str] = (),
               cuts: Sequence[int] = (), point_errors: bool = False) -> Iterator[Chunk]:
        """Advance the state to ``upto``, yielding one chunk per segment.

        ``cuts`` forces segment boundaries (the state after a chunk ending at
        a cut is the exact state at that X).  With ``point_errors`` every
        chunk also carries the error bound of each sum at each n, which,
        unlike the bound at the chunk end, does not depend on where the
        chunks happen to end.
        """
        st = self.state
        if upto <= st.X:
            return
        sieve._BASE.ensure(upto)
        rows_i = np.full(len(INT_FIELDS), -1, dtype=np.int64)
        for r, name in enumerate(ints):
            rows_i[_INT[name]] = r
        rows_f = np.full(len(SUM_FIELDS), -1, dtype=np.int64)
        for r, name in enumerate(sums):
            rows_f[_SUM[name]] = r
        specs = list(_cut_segments(st.X + 1, upto, self.segment_size, cuts))
        for spec, (mus, pps) in zip(specs, _ordered_map(_sieve_pair, specs, self.workers)):
            size = len(spec)
            out_i = np.empty((len(ints), size if ints else 0), dtype=np.int64)
            out_f = np.empty((len(sums), size if sums else 0), dtype=np.float64)
            out_e = np.empty((len(sums), size if sums and point_errors else 0), dtype=np.float64)
            _stream_kernel(spec.lo, spec.hi, mus.mu, pps.n, pps.p, pps.k, st.ints, st.sums,
                           st.nterms, rows_i, out_i, rows_f, out_f, out_e, RENORM_BLOCK)
            st.X = spec.hi
            yield Chunk(
                spec.lo, spec.hi,
                ints={name: out_i[r] for r, name in enumerate(ints)},
                sums={name: out_f[r] for r, name in enumerate(sums)},
                errors={name: st.error(name) for name in sums},
                point_errors={name: out_e[r] for r, name in enumerate(sums)} if point_errors else {},
            )

    def advance(self, upto: int, cuts: Sequence[int] = ()) -> StreamState:
        for _ in self.chunks(upto, cuts=cuts):
            pass
        return self.state


def state_at(X: int, segment_size: int = sieve.DEFAULT_SEGMENT_SIZE, workers: int = 1) -> StreamState:
    return SummatoryStream(segment_size, workers).advance(X)


def summatory_arrays(N: int, ints: Sequence[str] = INT_FIELDS, sums: Sequence[str] = SUM_FIELDS,
                     segment_size: int = sieve.DEFAULT_SEGMENT_SIZE) -> tuple[dict, dict, dict]:
    """Whole arrays indexed by n (index 0 is n = 0, all zero) for n <= N,
    together with the error bounds at N."""
    out_i = {k: np.zeros(N + 1, dtype=np.int64) for k in ints}
    out_f = {k: np.zeros(N + 1, dtype=np.float64) for k in sums}
    stream = SummatoryStream(segment_size)
    for ch in stream.chunks(N, ints=ints, sums=sums):
        for k in ints:
            out_i[k][ch.lo:ch.hi + 1] = ch.ints[k]
        for k in sums:
            out_f[k][ch.lo:ch.hi + 1] = ch.sums[k]
    errs = {k: stream.state.error(k) for k in sums}
    return out_i, out_f, errs


# -- prime-power queries ---------------------------------------------------


@dataclass(frozen=True)
class LambdaQueryResult:
    points: np.ndarray
    fields: tuple
    values: np.ndarray  # (npoints, len(fields))
    errors: np.ndarray

    def _col(self, name: str) -> int:
        try:
            return self.fields.index(name)
        except ValueError:
            raise KeyError(f"field {name!r} was not queried") from None

    def ball(self, x: int, name: str) -> Ball:
        i = int(np.searchsorted(self.points, x))
        if i >= len(self.points) or self.points[i] != x:
            raise KeyError(x)
        j = self._col(name)
        return Ball(float(self.values[i, j]), float(self.errors[i, j]))

    def column(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        j = self._col(name)
        return self.values[:, j], self.errors[:, j]


def lambda_query(points, fields: Sequence[str] = LAMBDA_FIELDS,
                 segment_size: int = sieve.DEFAULT_SEGMENT_SIZE,
                 workers: int = 1) -> LambdaQueryResult:
    """psi, psi~, sum Lambda log n, ... at every point, from a single pass over
    the prime powers up to ``max(points)``.  Values coincide bit-for-bit with
    the full stream."""
    if isinstance(points, np.ndarray):
        pts = np.unique(points.astype(np.int64))
    else:
        pts = np.unique(np.fromiter(points, dtype=np.int64))
    fields = tuple(fields)
    if any(f not in LAMBDA_FIELDS for f in fields):
        raise ValueError(f"only Lambda-weighted fields can be queried: {LAMBDA_FIELDS}")
    cols = np.array([_SUM[f] for f in fields], dtype=np.int64)
    nf = len(SUM_FIELDS)
    q_val = np.zeros((len(pts), len(cols)))
    q_err = np.zeros((len(pts), len(cols)))
    if len(pts) == 0:
        return LambdaQueryResult(pts, fields, q_val, q_err)
    if pts[0] < 0:
        raise ValueError("negative query point")
    sums = np.zeros((nf, 4))
    qptr = int(np.searchsorted(pts, 1))  # psi(0) = 0
    hi = int(pts[-1])
    if hi >= 1:
        sieve._BASE.ensure(hi)
        specs = list(sieve.segments(1, hi, segment_size))
        for spec, pps in zip(specs, _ordered_map(sieve.sieve_prime_powers, specs, workers)):
            qptr = _lambda_query_kernel(spec.lo, spec.hi, pps.n, pps.p, pps.k, sums,
                                        RENORM_BLOCK, pts, qptr, cols, q_val, q_err)
    return LambdaQueryResult(pts, fields, q_val, q_err)


def psi_at_points(queries: Sequence[int], **kw) -> dict[int, Ball]:
    q = list(queries)
    if any(b < a for a, b in zip(q, q[1:])):
        raise ValueError("queries must be sorted ascending")
    res = lambda_query(q, fields=("psi",), **kw)
    return {int(x): res.ball(int(x), "psi") for x in q}


# -- operations ------------------------------------------------------------


def stream_checkpoints(upto: int, stride: int, segment_size: int = sieve.DEFAULT_SEGMENT_SIZE,
                       workers: int = 1, state: StreamState | None = None) -> Iterator[SummatoryCheckpoint]:
    if upto < 1 or stride < 1:
        raise ValueError("upto and stride must be >= 1")
    stream = SummatoryStream(segment_size, workers, state)
    start = stream.state.X
    marks = list(range((start // stride + 1) * stride, upto + 1, stride))
    if not marks or marks[-1] != upto:
        marks.append(upto)
    targets = set(marks)
    for ch in stream.chunks(upto, cuts=marks):
        if ch.hi in targets:
            yield stream.state.checkpoint()


@dataclass(frozen=True)
class MomentValue:
    k: int
    f_id: str
    X: int
    value: CompensatedSum


_MOMENT_FIELD = {("mu", 1): "mu_log", ("mu", 2): "mu_log2",
                 ("lambda", 0): "psi", ("lambda", 1): "lambda_log", ("lambda", 2): "lambda_log2"}


def moment(f_id: str, k: int, X: int, state: StreamState | None = None) -> MomentValue:
    """``M_k(f, X) = sum_{n <= X} f(n) log^k n`` for f in {mu, lambda}."""
    if k not in (0, 1, 2):
        raise ValueError(f"unsupported moment order k={k}")
    if f_id not in ("mu", "lambda"):
        raise ValueError(f"unknown f_id {f_id!r}")
    if X < 1:
        raise ValueError("X must be >= 1")
    st = state if state is not None and state.X == X else state_at(X)
    if f_id == "mu" and k == 0:
        cs = CompensatedSum.exact(st.integer("M"))
    else:
        cs = st.compensated(_MOMENT_FIELD[(f_id, k)])
    return MomentValue(k, f_id, X, cs)


def abs_M_integral(T: int) -> int:
    """``int_1^T |M(t)| dt`` exactly, for integer T >= 1."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return state_at(T).integer("absM_integral")


def abs_M_integral_real(x: float, absM_at_floor: int, M_at_floor: int) -> float:
    n = math.floor(x)
    return absM_at_floor + (x - n) * abs(M_at_floor)


def integral_R_over_t(X: int, values: LambdaQueryResult | None = None) -> Ball:
    """``int_1^X R(t) dt/t = psi(X) log X - sum_{n<=X} Lambda(n) log n - (X - 1)``."""
    if X < 1:
        raise ValueError("X must be >= 1")
    if X == 1:
        return Ball(0.0, 0.0)
    res = values if values is not None else lambda_query([X], fields=("psi", "lambda_log"))
    psi = res.ball(X, "psi")
    lam_log = res.ball(X, "lambda_log")
    logx = Ball.of(X).log()
    return Ball.fsum([psi * logx, -lam_log, Ball.of(-(X - 1))])


def squarefree_stats(X: int) -> tuple[int, Ball]:
    if X < 1:
        raise ValueError("X must be >= 1")
    st = state_at(X)
    return st.integer("Q"), st.ball("q_log")


def _inv_log_pow_diff(n: int, k: int) -> float:
    """``log(n)^-k - log(n+1)^-k`` without cancellation."""
    a = math.log(n)
    d = math.log1p(1.0 / n)
    b = a + d
    if k == 1:
        return d / (a * b)
    return d * (a + b) / (a * a * b * b)


def partial_summation_check(f_id: str, k: int, X0: int, X: int,
                            quadrature_steps: int | None = None,
                            arrays: dict | None = None) -> tuple[float, float]:
    """Residual of the summation-by-parts identity between ``M_0`` and
    ``M_k``; returns ``(|LHS - RHS|, error bound)``.

    The integral of ``k M_k(f, t) / (t log^{k+1} t)`` is done exactly per unit
    interval (``M_k`` is constant there).  With ``quadrature_steps`` it is
    instead done by Gauss-Legendre with that many nodes per unit interval.
    """
    if X0 <= 1:
        raise ValueError("X0 must be > 1")
    if X < X0:
        raise ValueError("X must be >= X0")
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    if arrays is None:
        fields = ("mu_log", "mu_log2") if f_id == "mu" else ("psi", "lambda_log", "lambda_log2")
        ints, sums, errs = summatory_arrays(X, ints=("M",), sums=fields)
        arrays = {**ints, **sums, "errors": errs}
    errs = arrays.get("errors", {})
    m0_name = "M" if f_id == "mu" else "psi"
    mk_name = _MOMENT_FIELD[(f_id, k)]
    m0, mk = arrays[m0_name], arrays[mk_name]
    e0, ek = errs.get(m0_name, 0.0), errs.get(mk_name, 0.0)

    lhs = Ball(float(m0[X]), e0) - Ball(float(m0[X0]), e0)
    boundary = (Ball(float(mk[X]), ek) / _pow(Ball.of(X).log(), k)
                - Ball(float(mk[X0]), ek) / _pow(Ball.of(X0).log(), k))

    ns = np.arange(X0, X, dtype=np.int64)
    vals = mk[X0:X]
    if quadrature_steps is None:
        w = np.array([_inv_log_pow_diff(int(n), k) for n in ns])
        # ~ a dozen roundings per weight
        w_rel = 16 * EPS
    else:
        nodes, weights = np.polynomial.legendre.leggauss(quadrature_steps)
        w = np.zeros(len(ns))
        for ti, wi in zip((nodes + 1.0) / 2.0, weights):
            x = ns + ti
            w += wi / 2.0 * k / (x * np.log(x) ** (k + 1))
        # plus the quadrature truncation, which is tiny for smooth integrands
        w_rel = 64 * EPS
    terms = vals * w
    t_err = float(np.sum(np.abs(terms))) * (w_rel + EPS) + ek * float(np.sum(w)) * (1 + w_rel)
    integral = Ball(math.fsum(terms.tolist()), t_err)
    diff = lhs - (boundary + integral)
    return abs(diff.value), diff.err


def _pow(b: Ball, k: int) -> Ball:
    out = b
    for _ in range(k - 1):
        out = out * b
    return out


def shadow_sums(N: int, dps: int = 40) -> dict:
    """High-precision reference values at N by direct mpmath summation (slow;
    intended for N up to ~1e6)."""
    import mpmath

    with mpmath.workdps(dps):
        pps = sieve.prime_powers_upto(N)
        mu = sieve.sieve_mu(sieve.SegmentSpec(1, N), max_size=max(N, 1)).mu if N >= 1 else np.zeros(0)
        out = {k: mpmath.mpf(0) for k in SUM_FIELDS}
        for n, p, kk in zip(pps.n.tolist(), pps.p.tolist(), pps.k.tolist()):
            lp = mpmath.log(p)
            ln = kk * lp
            out["psi"] += lp
            out["psi_tilde"] += lp / n
            out["lambda_log"] += lp * ln
            out["lambda_log2"] += lp * ln * ln
            out["lambda_sqrt"] += lp / mpmath.sqrt(n)
        nz = np.flatnonzero(mu) + 1
        for n in nz.tolist():
            u = int(mu[n - 1])
            ln = mpmath.log(n)
            out["m"] += mpmath.mpf(u) / n
            out["q_log"] += mpmath.mpf(1) / n
            out["mu_log"] += u * ln
            out["mu_log2"] += u * ln * ln
            out["q_sqrt"] += 1 / mpmath.sqrt(n)
        return out


def sqf_envelope_ball(X) -> Ball:
    return SIX_OVER_PI2_BALL * Ball.of(X)
