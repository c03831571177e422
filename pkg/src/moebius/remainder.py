"""Remainder terms R, r, R2*, R3, R4 and the windowed R4 scan.

Step functions (psi, psi~) are evaluated at the floor of their argument;
analytic factors (sqrt X, log X, X/n) use the real value.  All results are
``Ball`` objects carrying a rigorous rounding-error radius.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from . import sieve
from .numerics import EPS, EULER_GAMMA, GAMMA_BALL, Ball, up
from .summatory import LambdaQueryResult, SummatoryStream, lambda_query

GAMMA2 = 2 * EULER_GAMMA


@dataclass(frozen=True)
class RemainderEval:
    X: int
    R: Ball
    r: Ball
    R2star: Ball
    R3: Ball
    R4: Ball
    lambda2: Ball
    integral_R: Ball


@dataclass(frozen=True)
class PsiTable:
    """psi(n) for every integer n in [lo, hi] with one shared error bound,
    plus Lambda(n) (0 off prime powers) over the same range."""

    lo: int
    hi: int
    psi: np.ndarray
    err: float
    lam: np.ndarray

    def __call__(self, n: int) -> float:
        return float(self.psi[n - self.lo])

    @classmethod
    def build(cls, lo: int, hi: int, segment_size: int = sieve.DEFAULT_SEGMENT_SIZE) -> "PsiTable":
        lo = max(lo, 1)
        psi = np.empty(hi - lo + 1)
        stream = SummatoryStream(segment_size)
        for ch in stream.chunks(hi, sums=("psi",)):
            if ch.hi < lo:
                continue
            a = max(lo, ch.lo)
            psi[a - lo:ch.hi - lo + 1] = ch.sums["psi"][a - ch.lo:]
        lam = np.zeros(hi - lo + 1)
        pps = sieve.sieve_prime_powers(sieve.SegmentSpec(lo, hi), max_size=max(hi - lo + 1, 1))
        lam[pps.n - lo] = pps.log_p()
        return cls(lo, hi, psi, stream.state.error("psi"), lam)


def _pp_upto(n: int) -> tuple[np.ndarray, np.ndarray]:
    pps = sieve.prime_powers_upto(n)
    return pps.n, pps.log_p()


def _weighted_sum(w: np.ndarray, v: np.ndarray, v_err: np.ndarray, w_ulps: float = 2.0) -> Ball:
    """``sum w_i v_i`` where each ``w_i`` has relative error ``w_ulps * EPS``
    and ``v_i`` has absolute error ``v_err_i``."""
    if len(w) == 0:
        return Ball(0.0, 0.0)
    prod = w * v
    s = math.fsum(prod.tolist())
    err = float(np.sum(np.abs(w) * v_err)) * (1 + 4 * EPS) + float(np.sum(np.abs(prod))) * (w_ulps + 2) * EPS
    return Ball(s, up(err + EPS * abs(s)))




def _lookup(res: LambdaQueryResult, points: np.ndarray, name: str) -> tuple[np.ndarray, np.ndarray]:
    vals, errs = res.column(name)
    idx = np.searchsorted(res.points, points)
    return vals[idx], errs[idx]


def _evaluate_one(X: int, res: LambdaQueryResult, d: np.ndarray, lp: np.ndarray) -> RemainderEval:
    s = math.isqrt(X)
    q = X // d
    psi_q, psi_q_err = _lookup(res, q, "psi")

    psi_X = res.ball(X, "psi")
    psi_s = res.ball(s, "psi")
    psit_s = res.ball(s, "psi_tilde")
    lam_log = res.ball(X, "lambda_log")
    sx = Ball.of(X).sqrt()
    logx = Ball.of(X).log()

    R = psi_X - X
    R_s = psi_s - sx
    r_s = psit_s - sx.log() + GAMMA_BALL

    # hyperbola: 2 sum_{d <= sqrt X} Lambda(d) psi(X/d) - psi(sqrt X)^2
    lambda2 = 2 * _weighted_sum(lp, psi_q, psi_q_err) - psi_s.sqr()

    # R4 = sum_{d <= sqrt X} Lambda(d) (psi(X/d) - X/d)
    x_over_d = X / d.astype(np.float64)
    diff = psi_q - x_over_d
    diff_err = psi_q_err + EPS * x_over_d + EPS * np.abs(diff)
    R4 = _weighted_sum(lp, diff, diff_err)

    integral = Ball.fsum([psi_X * logx, -lam_log, Ball.of(-(X - 1))])
    R3 = (2 * sx * abs(sx * r_s - R_s) + R_s.sqr() + abs(R) * logx + abs(integral))
    R2 = Ball.fsum([lambda2, -lam_log, Ball.of(2 * X) * GAMMA_BALL])
    r = res.ball(X, "psi_tilde") - logx + GAMMA_BALL
    return RemainderEval(X, R, r, R2, R3, R4, lambda2, integral)


def evaluate(Xs: Sequence[int], **kw) -> list[RemainderEval]:
    """R, r, R2*, R3, R4 at every X, from a single pass over the prime powers."""
    Xs = [int(x) for x in Xs]
    if not Xs:
        return []
    if any(x < 1 for x in Xs):
        raise ValueError("X must be >= 1")
    d_all, lp_all = _pp_upto(math.isqrt(max(Xs)))
    cut = {x: int(np.searchsorted(d_all, math.isqrt(x), side="right")) for x in Xs}
    parts = [np.array(Xs, dtype=np.int64), np.array([math.isqrt(x) for x in Xs], dtype=np.int64)]
    parts += [x // d_all[:cut[x]] for x in set(Xs)]
    res = lambda_query(np.concatenate(parts), fields=("psi", "psi_tilde", "lambda_log"), **kw)
    return [_evaluate_one(x, res, d_all[:cut[x]], lp_all[:cut[x]]) for x in Xs]


def R(X: int) -> Ball:
    return evaluate([X])[0].R


def r(X: int) -> Ball:
    return evaluate([X])[0].r


def lambda2_sum(X: int) -> Ball:
    """``sum_{n <= X} (Lambda * Lambda)(n)`` by the hyperbola method."""
    if X < 1:
        raise ValueError("X must be >= 1")
    return evaluate([X])[0].lambda2


def R2_star(X: int) -> Ball:
    if X < 1:
        raise ValueError("X must be >= 1")
    return evaluate([X])[0].R2star


def R3(X: int) -> Ball:
    if X < 1:
        raise ValueError("X must be >= 1")
    return evaluate([X])[0].R3


def R4(X: int) -> Ball:
    if X < 4:
        raise ValueError("R4 needs X >= 4")
    return evaluate([X])[0].R4


# -- per-k Lambda*Lambda ---------------------------------------------------


@njit(cache=True)
def _spf_table(n):
    spf = np.zeros(n + 1, dtype=np.int32)
    for i in range(2, n + 1):
        if spf[i] == 0:
            for j in range(i, n + 1, i):
                if spf[j] == 0:
                    spf[j] = i
    return spf


@njit(cache=True)
def _r2star_kernel(N, spf, gamma2, values, abs_sum, errs):
    # R2*(k) cumulative and sum |t(k)|/k, t(k) = (L*L)(k) - L(k) log k + 2 gamma;
    # abs weights use |parts| so that cancellation inside t(k) is covered.
    s = 0.0
    c = 0.0
    a = 0.0
    s2 = 0.0
    c2 = 0.0
    a2 = 0.0
    for k in range(1, N + 1):
        conv = 0.0
        lamlog = 0.0
        if k > 1:
            p = spf[k]
            e = 0
            rest = k
            while rest % p == 0:
                rest //= p
                e += 1
            lp = math.log(float(p))
            if rest == 1:
                # divisor pairs (p^j, p^(e-j)), 1 <= j < e
                conv = (e - 1) * (lp * lp)
                lamlog = lp * (e * lp)
            else:
                q = spf[rest]
                rest2 = rest
                while rest2 % q == 0:
                    rest2 //= q
                if rest2 == 1:
                    # pairs (p^e, q^f) and (q^f, p^e)
                    conv = 2.0 * (lp * math.log(float(q)))
        t = conv - lamlog + gamma2
        w = conv + lamlog + gamma2
        # R2* cumulative (Neumaier)
        tt = s + t
        if abs(s) >= abs(t):
            c += (s - tt) + t
        else:
            c += (t - tt) + s
        s = tt
        a += w
        values[k] = s + c
        errs[k] = (16.0 * 1.1102230246251565e-16 * a
                   + 2.0 * 1.1102230246251565e-16 * gamma2 * k) * (1.0 + 4.440892098500626e-16)
        x = abs(t) / k
        tt = s2 + x
        if abs(s2) >= abs(x):
            c2 += (s2 - tt) + x
        else:
            c2 += (x - tt) + s2
        s2 = tt
        a2 += w / k
        abs_sum[k] = s2 + c2
    return a, a2


@dataclass(frozen=True)
class R2StarTable:
    """R2*(k) for 1 <= k <= N (index 0 unused) and the running
    ``sum_{k <= K} |t(k)|/k``, each with an error bound at N.  ``errs[k]``
    is the (smaller) bound for R2*(k) alone."""

    N: int
    values: np.ndarray
    err: float
    abs_over_k: np.ndarray
    abs_over_k_err: float
    errs: np.ndarray

    def ball(self, k: int) -> Ball:
        return Ball(float(self.values[k]), max(float(self.errs[k]), 0.0))


def r2star_table(N: int) -> R2StarTable:
    if N < 1:
        raise ValueError("N must be >= 1")
    spf = _spf_table(N)
    values = np.zeros(N + 1)
    abs_sum = np.zeros(N + 1)
    errs = np.zeros(N + 1)
    total_w, total_w_over_k = _r2star_kernel(N, spf, GAMMA2, values, abs_sum, errs)
    # each part <= 5 roundings; gamma literal contributes EPS * 2 gamma per term
    err = up(16 * EPS * total_w + 2 * EPS * GAMMA2 * N)
    err2 = up(16 * EPS * total_w_over_k + 2 * EPS * GAMMA2 * (math.log(N) + 1))
    return R2StarTable(N, values, err, abs_sum, err2, np.maximum(errs, 0.0))


def lambda_conv(k: int) -> float:
    """``(Lambda * Lambda)(k)`` by enumerating prime-power divisor pairs."""
    if k < 4:
        return 0.0
    f = _factor(k)
    if len(f) == 1:
        (p, e), = f.items()
        return (e - 1) * math.log(p) ** 2
    if len(f) == 2:
        p, q = f
        return 2 * math.log(p) * math.log(q)
    return 0.0


def _factor(n: int) -> dict[int, int]:
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


def aux1_constant(K: int, table: R2StarTable | None = None) -> Ball:
    """``sum_{k <= K} |t(k)|/k + |R2*(K)|/K`` with t(k) the summand of R2*."""
    if K < 1:
        raise ValueError("K must be >= 1")
    tab = table if table is not None and table.N >= K else r2star_table(K)
    head = Ball(float(tab.abs_over_k[K]), tab.abs_over_k_err)
    return head + abs(tab.ball(K)) / K


# -- small sums ------------------------------------------------------------


def lambda_sqrt_sum(T: int) -> Ball:
    """``sum_{n <= T} Lambda(n)/sqrt(n)``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return lambda_query([T], fields=("lambda_sqrt",)).ball(T, "lambda_sqrt")


def auxb_check(X: float, T: float) -> tuple[Ball, float]:
    """Both sides of ``sum_{n<=T} Lambda(n)/(n log(X/n)) <= 1.04 log(log X/log(X/T)) + 1.04/log X``.

    The right-hand side is returned as a float rounded upwards conservatively
    (callers compare ``lhs.hi <= rhs``); it is ``inf`` at X = 1.
    """
    if X < 1 or T < 1:
        raise ValueError("need X >= 1 and T >= 1")
    if T * T > X:
        raise ValueError("need T <= sqrt(X)")
    n, lp = _pp_upto(int(math.floor(T)))
    if len(n):
        logs = np.log(X / n.astype(np.float64))
        terms = lp / (n * logs)
        s = math.fsum(terms.tolist())
        # log(X/n) >= log sqrt X; relative error of each term a few ulps / log(X/n)
        rel = (8 + 2 / float(np.min(logs))) * EPS
        lhs = Ball(s, up(float(np.sum(terms)) * rel + EPS * abs(s)))
    else:
        lhs = Ball(0.0, 0.0)
    if X == 1:
        return lhs, math.inf
    lx = math.log(X)
    rhs = 1.04 * math.log(lx / math.log(X / T)) + 1.04 / lx
    return lhs, rhs * (1 - 16 * EPS) - 16 * EPS


# -- windowed R4 scan ------------------------------------------------------


@dataclass(frozen=True)
class R4ScanResult:
    a_range: tuple[int, int]
    x_range: tuple[int, int]
    max_ratio: float
    witness_x: int
    witness_side: str  # "at" or "left_limit"
    err_bound: float
    recompute_checks: int
    recompute_max_diff: float
    recompute_ok: bool
    probes: tuple = ()

    def csv_row(self) -> str:
        return (f"{self.x_range[0]},{self.x_range[1]},{self.max_ratio:.17g},{self.witness_x},"
                f"{self.err_bound:.17g},{self.recompute_checks}")

    CSV_HEADER = "X_lo,X_hi,max_ratio,witness_X,err_bound,recompute_checks"


@njit(cache=True)
def _direct_S(X, a_vals, lp, psi, t_lo):
    s = 0.0
    c = 0.0
    ab = 0.0
    for i in range(a_vals.shape[0]):
        x = lp[i] * psi[X // a_vals[i] - t_lo]
        tt = s + x
        if abs(s) >= abs(x):
            c += (s - tt) + x
        else:
            c += (x - tt) + s
        s = tt
        ab += abs(x)
    return s, c, ab


@njit(cache=True, nogil=True)
def _r4_window_kernel(x0, x1, x_end, a_vals, lp, lp_dense, L, psi, lam, t_lo, offsets, ev_a,
                      state, best, recompute_every, x_start, checks, probes_x, probes_out):
    # state: [S, comp, abs_since_reset, base_err, max_S_err, psi_table_err]
    # best: [ratio, witness, side]; checks: [count, max_diff, max_allowed_slack]
    u = 1.1102230246251565e-16
    np_ = probes_x.shape[0]
    for X in range(x0, x1 + 1):
        i = X - x0
        if X > x_start:
            for j in range(offsets[i], offsets[i + 1]):
                a = ev_a[j]
                d = lp_dense[a] * lam[X // a - t_lo]
                s = state[0]
                tt = s + d
                if abs(s) >= abs(d):
                    state[1] += (s - tt) + d
                else:
                    state[1] += (d - tt) + s
                state[0] = tt
                state[2] += abs(d)
        if X > x_start and (X - x_start) % recompute_every == 0:
            ds, dc, dab = _direct_S(X, a_vals, lp, psi, t_lo)
            inc = state[0] + state[1]
            dv = ds + dc
            inc_err = (state[3] + 16.0 * u * state[2]) * (1.0 + 4.0 * u)
            dir_err = 16.0 * u * dab + state[5]
            diff = abs(inc - dv)
            checks[0] += 1
            if diff > checks[1]:
                checks[1] = diff
            slack = diff - (inc_err + dir_err)
            if slack > checks[2]:
                checks[2] = slack
            if inc_err > state[4]:
                state[4] = inc_err
            state[0] = ds
            state[1] = dc
            state[2] = 0.0
            state[3] = dir_err
        Sv = state[0] + state[1]
        for k in range(np_):
            if probes_x[k] == X:
                probes_out[k] = Sv
        v = Sv - X * L
        ratio = abs(v) / X
        if ratio > best[0]:
            best[0] = ratio
            best[1] = X
            best[2] = 0.0
        if X < x_end:
            v2 = Sv - (X + 1) * L
            ratio2 = abs(v2) / (X + 1)
            if ratio2 > best[0]:
                best[0] = ratio2
                best[1] = X + 1
                best[2] = 1.0
    e = (state[3] + 16.0 * u * state[2]) * (1.0 + 4.0 * u)
    if e > state[4]:
        state[4] = e


def windowed_R4_scan(a_range: tuple[int, int], x_window: tuple[int, int],
                     recompute_every: int = 10**6, chunk: int = 2**22,
                     probes: Sequence[int] = ()) -> R4ScanResult:
    """sup over real X in the window of ``|sum_{A0<a<=A1} Lambda(a) R(X/a)| / X``.

    The sum ``S(X) = sum Lambda(a) psi(X/a)`` is initialised directly and then
    advanced one integer at a time: it only changes at X with a divisor a in
    range, by ``Lambda(a) Lambda(X/a)``.  The smooth part ``X sum Lambda(a)/a``
    is exact-linear.  Between integers the ratio is monotone, so both ends of
    every unit interval are examined.  ``S`` is recomputed from scratch every
    ``recompute_every`` steps and compared with the incremental value.
    ``probes`` records the incremental ``S`` at the given X (for testing).
    """
    A0, A1 = (int(v) for v in a_range)
    X_lo, X_hi = (int(v) for v in x_window)
    if A1 <= A0 or A0 < 1:
        raise ValueError(f"invalid a_range ({A0}, {A1}]")
    if X_hi < X_lo:
        raise ValueError("empty X window")
    if A1 * A1 > X_lo:
        raise ValueError("need A1^2 <= X_lo")
    if recompute_every < 1:
        raise ValueError("recompute_every must be >= 1")

    pps = sieve.prime_powers_upto(A1)
    mask = pps.n > A0
    a_vals = pps.n[mask]
    lp = np.log(pps.p[mask].astype(np.float64))
    L_terms = lp / a_vals
    L = math.fsum(L_terms.tolist())
    L_err = up(float(np.sum(L_terms)) * 4 * EPS + EPS * L)

    t_lo = X_lo // A1 - 1
    t_hi = X_hi // (A0 + 1)
    table = PsiTable.build(t_lo, t_hi)
    psi, lam = table.psi, table.lam

    ds, dc, dab = _direct_S(X_lo, a_vals, lp, psi, t_lo)
    lp_dense = np.zeros(A1 + 1)
    lp_dense[a_vals] = lp
    # psi-table error carried by every direct evaluation of S
    psi_contrib = up(table.err * float(np.sum(lp)))
    # state: S, comp, abs since reset, base err, max S err, psi-table part
    state = np.array([ds, dc, 0.0, up(16 * EPS * dab + psi_contrib), 0.0, psi_contrib])
    best = np.array([-1.0, float(X_lo), 0.0])
    checks = np.zeros(3)
    checks[2] = -math.inf
    probes_x = np.asarray(sorted(probes), dtype=np.int64)
    probes_out = np.full(len(probes_x), np.nan)

    for w in sieve.segments(X_lo, X_hi, chunk):
        offsets, ev_a = sieve.divisor_event_arrays(w, A0, A1, prime_powers_only=True)
        _r4_window_kernel(w.lo, w.hi, X_hi, a_vals, lp, lp_dense, L, psi, lam, t_lo, offsets, ev_a,
                          state, best, recompute_every, X_lo, checks, probes_x, probes_out)

    S_err = state[4]
    # |S - X L| error over X: S error + X L rounding + X * L_err, then / X
    S_max = float(np.sum(lp * psi[X_hi // a_vals - t_lo]))
    err = up(S_err / X_lo + L_err + 4 * EPS * (S_max / X_lo + L) + EPS * best[0])
    return R4ScanResult(
        (A0, A1), (X_lo, X_hi), float(best[0]), int(best[1]),
        "left_limit" if best[2] else "at", err,
        int(checks[0]), float(checks[1]), bool(checks[0] == 0 or checks[2] <= 0.0),
        tuple(zip(probes_x.tolist(), probes_out.tolist())),
    )


def direct_window_sum(X: float, a_range: tuple[int, int]) -> Ball:
    """Oracle for one X: ``sum_{A0<a<=A1} Lambda(a) R(X/a)`` recomputed from
    psi queries (independent of the incremental scanner)."""
    A0, A1 = a_range
    pps = sieve.prime_powers_upto(A1)
    mask = pps.n > A0
    a = pps.n[mask]
    lp = np.log(pps.p[mask].astype(np.float64))
    q = (int(math.floor(X)) // a)
    res = lambda_query(q, fields=("psi",))
    psi_q, psi_err = _lookup(res, q, "psi")
    xa = X / a.astype(np.float64)
    diff = psi_q - xa
    return _weighted_sum(lp, diff, psi_err + EPS * xa + EPS * np.abs(diff))


def boundr_sample(X: int) -> tuple[Ball, float]:
    """``|r(X) - R(X)/X|`` and the envelope ``0.05/sqrt X + 1.75e-12``."""
    ev = evaluate([X])[0]
    lhs = abs(ev.r - ev.R / X)
    return lhs, 0.05 / math.sqrt(X) + 1.75e-12
