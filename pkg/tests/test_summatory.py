import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from moebius import summatory
from moebius.summatory import (SummatoryCheckpoint, StreamState, SummatoryStream, abs_M_integral,
                               integral_R_over_t, lambda_query, moment, partial_summation_check,
                               psi_at_points, squarefree_stats, state_at, stream_checkpoints,
                               summatory_arrays)

from conftest import mu_oracle, von_mangoldt_mp


@pytest.fixture(scope="module")
def arrays_1e4():
    return summatory_arrays(10**4)


@pytest.fixture(scope="module")
def arrays_1e5():
    ints, sums, errs = summatory_arrays(10**5, ints=("M",), sums=("mu_log", "mu_log2", "psi",
                                                                   "lambda_log", "lambda_log2"))
    return {**ints, **sums, "errors": errs}


def test_stream_examples():
    st10 = state_at(10)
    assert st10.integer("M") == -1
    psi10 = 3 * math.log(2) + 2 * math.log(3) + math.log(5) + math.log(7)
    assert abs(st10.value("psi") - psi10) <= st10.error("psi") + 1e-15
    assert st10.value("psi") == pytest.approx(7.832015, abs=1e-6)
    st4 = state_at(4)
    assert abs(Fraction(st4.value("m")) - Fraction(1, 6)) <= Fraction(st4.error("m"))


def test_first_checkpoint_invariants():
    st1 = state_at(1)
    assert st1.integer("M") == 1
    assert st1.value("psi") == 0.0
    assert st1.integer("absM_integral") == 0
    assert st1.integer("Q") == 1


def test_integers_match_enumeration_below_1e4(arrays_1e4):
    ints, sums, errs = arrays_1e4
    mus = [0] + [mu_oracle(n) for n in range(1, 10**4 + 1)]
    M = np.cumsum(mus)
    Q = np.cumsum(np.abs(mus))
    assert np.array_equal(ints["M"], M)
    assert np.array_equal(ints["Q"], Q)
    absint = np.concatenate([[0, 0], np.cumsum(np.abs(M[1:-1]))])
    assert np.array_equal(ints["absM_integral"], absint)
    assert np.all(np.abs(M[1:]) <= np.arange(1, 10**4 + 1))


def test_floats_match_exact_oracles_below_1e4(arrays_1e4):
    ints, sums, errs = arrays_1e4
    with mpmath.workdps(40):
        psi = mpmath.mpf(0)
        m = Fraction(0)
        worst_psi = worst_m = 0.0
        for n in range(1, 10**4 + 1):
            psi += von_mangoldt_mp(n)
            m += Fraction(mu_oracle(n), n)
            if n % 97 == 0 or n < 200:
                dpsi = abs(float(psi - sums["psi"][n]))
                dm = abs(float(m - Fraction(sums["m"][n])))
                assert dpsi <= errs["psi"]
                assert dm <= errs["m"]
                worst_psi, worst_m = max(worst_psi, dpsi), max(worst_m, dm)
    assert worst_psi < 1e-10 and worst_m < 1e-10


def test_error_bounds_cover_shadow_at_2e5():
    N = 2 * 10**5
    shadow = summatory.shadow_sums(N)
    st = state_at(N)
    for name in summatory.SUM_FIELDS:
        assert abs(float(shadow[name] - mpmath.mpf(st.value(name)))) <= st.error(name), name


@pytest.mark.slow
def test_error_bounds_cover_shadow_at_1e6():
    N = 10**6
    shadow = summatory.shadow_sums(N)
    st = state_at(N)
    for name in summatory.SUM_FIELDS:
        assert abs(float(shadow[name] - mpmath.mpf(st.value(name)))) <= st.error(name), name


def test_checkpoints_are_independent_of_stride_segment_and_workers():
    upto = 3_500_000
    ref = {cp.X: cp.csv_row() for cp in stream_checkpoints(upto, 10**6)}
    assert sorted(ref) == [10**6, 2 * 10**6, 3 * 10**6, upto]
    other = {cp.X: cp.csv_row() for cp in stream_checkpoints(upto, 500_000, segment_size=77_777, workers=3)}
    for X, row in ref.items():
        assert other[X] == row
    assert sorted(other) == [k * 500_000 for k in range(1, 8)]


def test_checkpoint_resume_matches_uninterrupted_stream():
    ref = list(stream_checkpoints(4 * 10**6, 10**6))
    resumed = StreamState.from_checkpoint(SummatoryCheckpoint.from_csv_row(ref[1].csv_row()))
    rest = list(stream_checkpoints(4 * 10**6, 10**6, state=resumed))
    assert [c.csv_row() for c in rest] == [c.csv_row() for c in ref[2:]]
    with pytest.raises(ValueError):
        StreamState.from_checkpoint(SummatoryCheckpoint.from_csv_row(
            list(stream_checkpoints(10, 10))[0].csv_row()))


def test_checkpoint_csv_round_trip_and_header():
    cp = list(stream_checkpoints(12345, 10**4))[-1]
    assert SummatoryCheckpoint.CSV_HEADER == (
        "X,M,m_hi,m_err,psi_hi,psi_err,psitilde_hi,psitilde_err,lambdalog_hi,lambdalog_err,"
        "absMint,Q,qlog_hi,qlog_err")
    back = SummatoryCheckpoint.from_csv_row(cp.csv_row())
    assert back.csv_row() == cp.csv_row()
    assert back.psi.value == cp.psi.value and back.X == 12345
    with pytest.raises(ValueError):
        SummatoryCheckpoint.from_csv_row("1,2,3")


def test_stream_checkpoints_arguments():
    with pytest.raises(ValueError):
        list(stream_checkpoints(0, 5))
    with pytest.raises(ValueError):
        list(stream_checkpoints(10, 0))
    assert [c.X for c in stream_checkpoints(10, 3)] == [3, 6, 9, 10]


def test_moment_examples():
    m2 = moment("mu", 2, 4)
    expected = -math.log(2) ** 2 - math.log(3) ** 2
    assert abs(m2.value.value - expected) <= m2.value.error + 1e-15
    assert m2.value.value == pytest.approx(-1.687402, abs=1e-6)
    assert moment("mu", 0, 10).value.value == -1
    for k in (1, 2):
        assert moment("mu", k, 1).value.value == 0.0
    with pytest.raises(ValueError):
        moment("mu", 3, 10)
    with pytest.raises(ValueError):
        moment("zeta", 1, 10)


def test_abs_M_integral_examples():
    assert abs_M_integral(1) == 0
    assert abs_M_integral(2) == 1
    assert abs_M_integral(5) == 3


def test_abs_M_integral_is_monotone_with_unit_increments(arrays_1e4):
    ints, _, _ = arrays_1e4
    a = ints["absM_integral"]
    assert np.all(np.diff(a[1:]) == np.abs(ints["M"][1:-1]))
    assert summatory.abs_M_integral_real(5.5, abs_M_integral(5), -2) == 3 + 0.5 * 2


def test_integral_R_over_t_examples():
    assert integral_R_over_t(1).value == 0.0
    b = integral_R_over_t(2)
    assert abs(b.value + 1) <= b.err + 1e-15


@given(st.integers(2, 3000))
def test_integral_R_over_t_matches_unit_interval_sum(X):
    # on [n, n+1): int (psi(n) - t)/t dt = psi(n) log((n+1)/n) - 1
    with mpmath.workdps(30):
        total = mpmath.mpf(0)
        psi = mpmath.mpf(0)
        for n in range(1, X):
            psi += von_mangoldt_mp(n)
            total += psi * mpmath.log(mpmath.mpf(n + 1) / n) - 1
    b = integral_R_over_t(X)
    assert abs(float(total) - b.value) <= b.err + 1e-12


def test_squarefree_examples():
    assert squarefree_stats(4)[0] == 3
    Q, qlog = squarefree_stats(10)
    assert Q == 7
    exact = sum(Fraction(1, n) for n in (1, 2, 3, 5, 6, 7, 10))
    assert abs(Fraction(qlog.value) - exact) <= Fraction(qlog.err)


def test_squarefree_bound_at_lemma_threshold():
    X = 438653
    Q, _ = squarefree_stats(X)
    with mpmath.workdps(30):
        assert abs(Q - 6 * X / mpmath.pi**2) <= mpmath.mpf("0.02767") * mpmath.sqrt(X)


def test_partial_summation_examples(arrays_1e5):
    r, e = partial_summation_check("mu", 2, 100, 100, arrays=arrays_1e5)
    assert r <= e and r == pytest.approx(0.0, abs=1e-12)
    r, e = partial_summation_check("mu", 2, 10, 1000, arrays=arrays_1e5)
    assert r <= e and r < 1e-9
    r, e = partial_summation_check("mu", 1, 2, 50, arrays=arrays_1e5)
    assert r <= e and r < 1e-10
    with pytest.raises(ValueError):
        partial_summation_check("mu", 1, 1, 50)


@given(X0=st.integers(2, 99_999), span=st.integers(0, 99_998), f_id=st.sampled_from(["mu", "lambda"]),
       k=st.sampled_from([1, 2]))
def test_partial_summation_identity_residual(X0, span, f_id, k, arrays_1e5):
    X = min(X0 + span, 10**5)
    r, e = partial_summation_check(f_id, k, X0, X, arrays=arrays_1e5)
    assert r <= e
    assert r <= 1e-9 * max(1.0, abs(arrays_1e5["M" if f_id == "mu" else "psi"][X]))


def test_partial_summation_quadrature_agrees(arrays_1e5):
    exact, _ = partial_summation_check("mu", 2, 10, 2000, arrays=arrays_1e5)
    quad, _ = partial_summation_check("mu", 2, 10, 2000, quadrature_steps=8, arrays=arrays_1e5)
    assert abs(exact - quad) < 1e-9


def test_psi_at_points_examples():
    assert psi_at_points([1])[1].value == 0.0
    got = psi_at_points([10, 100])
    assert got[10].value == pytest.approx(7.832015, abs=1e-6)
    assert got[100].value == pytest.approx(94.0453, abs=1e-4)
    assert psi_at_points([113])[113].value / 113 < 1.03883


@given(st.lists(st.integers(1, 3 * 10**6), min_size=1, max_size=30))
def test_lambda_queries_are_bit_identical_to_the_stream(points):
    res = lambda_query(points)
    stream = SummatoryStream()
    for x in sorted(set(points)):
        stream.advance(x)
        for name in summatory.LAMBDA_FIELDS:
            b = res.ball(x, name)
            assert b.value == stream.state.value(name)
            assert b.err == stream.state.error(name)


def test_lambda_query_rejects_mu_fields():
    with pytest.raises(ValueError):
        lambda_query([10], fields=("m",))


def test_lemma_rs_maximum_below_1e6():
    ints, sums, _ = summatory_arrays(10**6, ints=(), sums=("psi",))
    ratio = sums["psi"][1:] / np.arange(1, 10**6 + 1)
    assert int(np.argmax(ratio)) + 1 == 113
    assert ratio.max() < 1.03883


def test_point_errors_do_not_depend_on_chunking():
    def collect(seg, cuts):
        out = []
        stream = SummatoryStream(seg)
        for ch in stream.chunks(2_300_000, sums=("psi", "m"), cuts=cuts, point_errors=True):
            out.append(ch.point_errors["psi"].copy())
            assert ch.point_errors["m"][-1] <= stream.state.error("m") * (1 + 1e-15)
        return np.concatenate(out)

    a = collect(2**22, ())
    b = collect(10**4, (777_777, 1_999_999))
    assert np.array_equal(a, b)
    assert np.all(np.diff(a[: 10**6]) >= 0)
