"""One check per acceptance criterion, each printing a single PASS/FAIL line
in the terminal summary.  Failing criteria are real findings, recorded in
the decisions ledger; they are asserted, not skipped."""
import math
import time

import numpy as np
import pytest

from moebius import remainder, summatory, verifier
from moebius.numerics import Ball
from moebius.verifier import PASS, lookup

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance


def record(n, ok, text):
    ACCEPTANCE_LINES.append(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {text}")
    return ok


@pytest.fixture(scope="module")
def catalog():
    t0 = time.perf_counter()
    reports = verifier.verify_many(verifier.builtin_catalog())
    return {r.id: r for r in reports}, time.perf_counter() - t0


@pytest.fixture(scope="module")
def integer_reports():
    specs = [lookup("boundRbis").on_integers(), lookup("sqf").on_integers()]
    return {r.id: r for r in verifier.verify_many(specs)}


def describe(r):
    side = "" if r.witness_side in (None, "at") else f" ({r.witness_side})"
    return (f"{r.id}: {r.status}, max ratio {r.ratio:.6f} at X={r.witness_x:.0f}{side}, "
            f"err {r.err_bound:.2g}")


def test_criterion_01_integral_of_R():
    t0 = time.perf_counter()
    b = summatory.integral_R_over_t(10**8)
    dt = time.perf_counter() - t0
    dist = abs(b.value - (-129.559))
    ok = dist + b.err <= 0.01 and dt <= 15 * 60
    record(1, ok, f"int_1^1e8 R(t)dt/t = {b.value:.6f} +- {b.err:.1g}, target -129.559 +- 0.01 "
                  f"(off by {dist:.4f}; see ledger), {dt:.1f}s")
    assert ok


def test_criterion_02_boundRbis(catalog, integer_reports):
    reps, dt = catalog
    r = reps["boundRbis"]
    ri = integer_reports["boundRbis@int"]
    ok = r.status == PASS
    record(2, ok, f"sup over real X in [24200, 3e7] of |R|/sqrt X = {0.71 * r.ratio:.6f} at "
                  f"X -> {r.witness_x:.0f}{'-' if r.witness_side == 'left_limit' else ''} "
                  f"(limit 0.71); integers only: {0.71 * ri.ratio:.6f} at X={ri.witness_x:.0f} {ri.status}")
    assert ok


def test_criterion_03_abs_M_integral():
    t0 = time.perf_counter()
    v = summatory.abs_M_integral(1798118)
    dt = time.perf_counter() - t0
    ok = v <= 216378740 and dt <= 60
    record(3, ok, f"int_1^1798118 |M| = {v} (bound 216378740), {dt:.1f}s")
    assert ok


def test_criterion_04_pari_constant():
    t0 = time.perf_counter()
    b = verifier.pari_constant(4 * 10**7)
    dt = time.perf_counter() - t0
    margin = 7.01 - b.value
    ok = b.hi <= 7.01 and margin > b.err and dt <= 300
    record(4, ok, f"|M(4e7) - M2(mu,4e7)/log^2| = {b.value:.6f} +- {b.err:.1g}, margin {margin:.4f}, {dt:.1f}s")
    assert ok


def test_criterion_05_theorem_1(catalog):
    reps, _ = catalog
    r = reps["thm1"]
    t0 = time.perf_counter()
    ri = verifier.verify(lookup("thm1").on_integers())
    dt = time.perf_counter() - t0
    ok = r.status == PASS and ri.status == PASS and dt <= 300
    record(5, ok, f"{describe(ri)}; real X as well: {r.status}, {dt:.1f}s")
    assert ok


def test_criterion_06_corollaries_for_m(catalog):
    reps, _ = catalog
    a, b = reps["cor-m"], reps["cor-m2"]
    ok = a.status == PASS and b.status == PASS
    record(6, ok, f"{describe(a)}; {describe(b)}")
    assert ok


def test_criterion_07_mertens_slices(catalog):
    reps, _ = catalog
    rs = [reps[i] for i in ("boundsM", "eq13", "eq17")]
    ok = all(r.status == PASS for r in rs)
    record(7, ok, "; ".join(describe(r) for r in rs))
    assert ok


def test_criterion_08_compR2(catalog):
    reps, dt = catalog
    r = reps["compR2"]
    spec = lookup("compR2")
    ok = r.status == PASS and spec.dense_range == (3, 10**6) and len(spec.sample_points()) == 10**4
    record(8, ok, f"{describe(r)} (dense [3, 1e6] + 1e4 log-spaced samples to 1e8)")
    assert ok


def test_criterion_09_aux1():
    t0 = time.perf_counter()
    tab = remainder.r2star_table(10**6)
    a = remainder.aux1_constant(462848, tab)
    b = remainder.aux1_constant(10**6, tab)
    dt = time.perf_counter() - t0
    ok = a.hi <= 4345 * 0.0374 and b.hi <= 4345 * 0.0422 and dt <= 1800
    record(9, ok, f"aux1(462848) = {a.value:.4f} <= {4345 * 0.0374:.4f}, "
                  f"aux1(1e6) = {b.value:.4f} <= {4345 * 0.0422:.4f}, {dt:.1f}s")
    assert ok


def test_criterion_10_windowed_R4():
    t0 = time.perf_counter()
    res = remainder.windowed_R4_scan((1000, 40000), (1_800_000_000, 2_000_000_000))
    dt = time.perf_counter() - t0
    ok = (res.max_ratio + res.err_bound <= 0.000154 and res.recompute_ok
          and res.recompute_checks == 200 and dt <= 6 * 3600)
    record(10, ok, f"max ratio {res.max_ratio:.9f} +- {res.err_bound:.1g} at X={res.witness_x} "
                   f"({res.witness_side}), {res.recompute_checks} recomputations agree "
                   f"(max drift {res.recompute_max_diff:.2g}), {dt:.0f}s")
    assert ok


def _hyperbola_check():
    N = 10**4
    from moebius import sieve
    pps = sieve.prime_powers_upto(N)
    conv = np.zeros(N + 1)
    for d, ld in zip(pps.n.tolist(), pps.log_p().tolist()):
        for e, le in zip(pps.n.tolist(), pps.log_p().tolist()):
            if d * e > N:
                break
            conv[d * e] += ld * le
    cum = np.cumsum(conv)
    evs = remainder.evaluate(range(1, N + 1))
    worst = max(abs(ev.lambda2.value - cum[ev.X]) for ev in evs)
    return worst <= 1e-9, f"hyperbola max diff {worst:.1g}"


def _summation_check(rng):
    N = 10**6
    ints, sums, errs = summatory.summatory_arrays(
        N, ints=("M",), sums=("mu_log", "mu_log2", "psi", "lambda_log", "lambda_log2"))
    arrays = {**ints, **sums, "errors": errs}
    worst = 0.0
    ok = True
    for _ in range(100):
        X0, X = sorted(int(v) for v in rng.integers(2, N + 1, 2))
        f_id = str(rng.choice(["mu", "lambda"]))
        k = int(rng.integers(1, 3))
        r, e = summatory.partial_summation_check(f_id, k, X0, X, arrays=arrays)
        worst = max(worst, r)
        ok &= r <= 1e-9 and r <= e
    return ok, f"summation identity max residual {worst:.1g}"


def _em_check(rng):
    xs = sorted(set(int(v) for v in rng.integers(1, 10**6 + 1, 100)))
    stream = summatory.SummatoryStream()
    ok, worst = True, 0.0
    for ch in stream.chunks(xs[-1], cuts=xs):
        if ch.hi in xs:
            lhs, rhs = verifier.em_inequality_check(ch.hi, stream.state)
            ok &= lhs.hi <= rhs.lo
            worst = max(worst, lhs.value / rhs.value)
    return ok, f"EM at {len(xs)} X, max lhs/rhs {worst:.3f}"


def _majR2_check():
    xs = sorted({int(round(x)) for x in np.geomspace(10**3, 10**8, 100)})
    ok, worst = True, 0.0
    for ev in remainder.evaluate(xs):
        rhs = Ball.of(1.0) + 2 * remainder.GAMMA_BALL + ev.R3 + 2 * abs(ev.R4)
        ok &= abs(ev.R2star).hi <= rhs.lo
        worst = max(worst, abs(ev.R2star.value) / rhs.value)
    return ok, f"majR2 at {len(xs)} X, max lhs/rhs {worst:.3f}"


def test_criterion_11_property_suites(catalog, integer_reports):
    reps, _ = catalog
    rng = np.random.default_rng(11)
    parts = [_hyperbola_check(), _summation_check(rng), _em_check(rng), _majR2_check()]
    rs = reps["R-S"]
    parts.append((rs.status == PASS and rs.witness_x == 113, f"psi(X)/X max at X={rs.witness_x:.0f}"))
    for i in ("sqf", "sqflog", "boundsm"):
        parts.append((reps[i].status == PASS, describe(reps[i])))
    ri = integer_reports["sqf@int"]
    ok = all(p[0] for p in parts)
    failed = [t for p, t in parts if not p]
    text = "; ".join(t for _, t in parts)
    record(11, ok, f"{text}; sqf at integers only: {ri.status} ratio {ri.ratio:.4f}"
                   + (f" [failing: {len(failed)}]" if failed else ""))
    assert ok


def test_criterion_12_determinism(catalog):
    reps, _ = catalog
    specs = verifier.builtin_catalog()
    ref = verifier.reports_to_json([reps[s.id] for s in specs], timing=False)
    other = verifier.verify_many(specs, segment_size=1_000_003, workers=4)
    got = verifier.reports_to_json(other, timing=False)
    split = [verifier.verify(lookup("cor-m2"), segment_size=10**4, workers=4)]
    ok = got == ref and split[0].to_json(timing=False) == reps["cor-m2"].to_json(timing=False)
    record(12, ok, f"full catalog ({len(specs)} reports) byte-identical between workers=1/segment 2^22 "
                   f"and workers=4/segment 1000003; single-spec run matches batch")
    assert ok
