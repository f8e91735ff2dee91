import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macshaping import optimizer as opt
from macshaping.constellation import InvalidArgument, build_xor_classes, make_pam
from macshaping.info import UnreachableRateError, rate_and_grad_at_snr, rate_at_snr
from macshaping.optimizer import (ASYMMETRIC, OptimizationFailed, ShapingProblem, Tolerances,
                                  horizontal_gap, optimize, reduced_gradient, snr_threshold,
                                  softmax, start_point, sweep)


@pytest.fixture(scope="module")
def x2():
    return build_xor_classes(make_pam(1))


def test_softmax_and_reduced_gradient():
    p = softmax(np.array([0.0, 1.0, 2.0]))
    assert p.sum() == pytest.approx(1.0)
    g = np.array([1.0, 2.0, 3.0])
    r = reduced_gradient(p, g)
    assert abs(r.sum()) < 1e-12
    assert np.allclose(reduced_gradient(p, g + 5.0), r)  # constant shifts are invisible


def test_start_points_are_independent_streams():
    a = start_point(0, 3, 16, ASYMMETRIC)
    b = start_point(0, 3, 16, ASYMMETRIC)
    c = start_point(0, 4, 16, ASYMMETRIC)
    assert np.array_equal(a[0], b[0]) and not np.array_equal(a[0], c[0])
    assert not np.array_equal(a[0], a[1])


def test_problem_validation():
    with pytest.raises(InvalidArgument):
        ShapingProblem("pam4", 10.0, starts=0)
    with pytest.raises(InvalidArgument):
        ShapingProblem("pam4", 10.0, mode="both")
    with pytest.raises(InvalidArgument):
        Tolerances(grad_tol=0)


def test_two_point_optimum_matches_brute_force(x2):
    ts = np.arange(1, 1000) / 1000
    brute = max(rate_at_snr(np.array([t, 1 - t]), np.array([t, 1 - t]), x2, 10.0).mi_bits
                for t in ts)
    res = optimize(ShapingProblem("pam2", 10.0, starts=4), x2)
    assert res.mi_bits >= brute - 1e-9
    assert res.mi_bits - brute < 1e-4


def test_deterministic_and_feasible(x4):
    prob = ShapingProblem("pam4", 8.0, starts=3, seed=11)
    a, b = optimize(prob, x4), optimize(prob, x4)
    assert a.mi_bits == b.mi_bits
    assert np.array_equal(a.best_p.probs, b.best_p.probs)
    p = a.best_p.probs
    assert p.min() >= 0 and abs(p.sum() - 1) < 1e-9
    assert len(a.starts) == 3 and a.provenance["seed"] == 11


def test_more_starts_never_worse(x4):
    few = optimize(ShapingProblem("pam4", 6.0, starts=2, seed=5), x4)
    many = optimize(ShapingProblem("pam4", 6.0, starts=5, seed=5), x4)
    assert [s.init_p for s in many.starts[:2]] == [s.init_p for s in few.starts]
    assert many.mi_bits >= few.mi_bits - 1e-12


def test_best_start_is_local_optimum(x4):
    res = optimize(ShapingProblem("pam4", 10.0, starts=4), x4)
    best = res.starts[res.best_start]
    assert best.converged
    p = res.best_p.probs
    _, gp, gq = rate_and_grad_at_snr(p, p, x4, 10.0)
    # both users share p, so the objective gradient is the sum
    assert np.linalg.norm(reduced_gradient(p, gp + gq)) <= 1e-6


def test_asymmetric_at_least_symmetric(x4):
    sym = optimize(ShapingProblem("pam4", 8.0, starts=3), x4)
    asy = optimize(ShapingProblem("pam4", 8.0, mode=ASYMMETRIC, starts=3),
                   x4, warm_starts=[(sym.best_p, sym.best_p)])
    assert asy.mi_bits >= sym.mi_bits - 1e-6
    assert asy.provenance["warm_starts"] == 1 and len(asy.starts) == 4


def test_low_snr_rate_is_negligible(x16):
    res = optimize(ShapingProblem("pam16", -40.0, starts=2), x16)
    assert res.mi_bits < 0.01


def test_all_starts_failing_raises(x4, monkeypatch):
    def boom(*a, **k):
        raise ArithmeticError("nan objective")
    monkeypatch.setattr(opt, "lbfgs_ascent", boom)
    with pytest.raises(OptimizationFailed):
        optimize(ShapingProblem("pam4", 5.0, starts=2), x4)


def test_threaded_matches_serial(x4):
    a = optimize(ShapingProblem("pam4", 7.0, starts=4), x4)
    b = optimize(ShapingProblem("pam4", 7.0, starts=4, workers=2), x4)
    assert a.mi_bits == b.mi_bits


@settings(max_examples=5)
@given(st.integers(0, 1000), st.floats(-5, 20))
def test_optimized_beats_uniform(seed, snr):
    x = build_xor_classes(make_pam(2))
    u = np.full(4, 0.25)
    res = optimize(ShapingProblem("pam4", snr, starts=2, seed=seed), x)
    assert res.mi_bits >= rate_at_snr(u, u, x, snr).mi_bits - 1e-6


def test_thresholds_ordering(x4):
    c = x4.constellation
    cs = snr_threshold(c, "cutset", 1.2)
    uf = snr_threshold(c, "uniform", 1.2, x=x4)
    op = snr_threshold(c, "optimized", 1.2, x=x4,
                       template=ShapingProblem("pam4", 0.0, starts=2))
    assert cs < op <= uf + 0.02
    with pytest.raises(InvalidArgument):
        snr_threshold(c, "uniform", 2.0, x=x4)
    with pytest.raises(InvalidArgument):
        snr_threshold(c, "bogus", 1.0, x=x4)


def test_sweep_rows_and_gap(x4):
    c = x4.constellation
    rows = sweep(c, 0, 12, 2, ["uniform", "cutset"])
    assert len(rows) == 14
    assert {r["family"] for r in rows} == {"uniform", "cutset"}
    gap = horizontal_gap(rows, "uniform", "cutset", 1.0)
    assert gap > 0
    with pytest.raises(UnreachableRateError):
        horizontal_gap(rows, "uniform", "cutset", 1.99)
    with pytest.raises(InvalidArgument):
        sweep(c, 5, 0, 1)
    with pytest.raises(InvalidArgument):
        sweep(c, 0, 5, 1, ["nope"])


def test_sweep_optimized_is_monotone(x4):
    rows = sweep(x4.constellation, 0, 10, 2.5, ["optimized"],
                 template=ShapingProblem("pam4", 0.0, starts=2))
    rates = [r["rate_bits"] for r in rows]
    assert np.all(np.diff(rates) > 0)


def test_result_json_shape(x4):
    res = optimize(ShapingProblem("pam4", 5.0, starts=2), x4)
    js = res.to_json()
    assert set(js) == {"best_p", "best_q", "mi_bits", "starts", "provenance"}
    assert {"index", "init_p", "objective", "iterations", "converged", "status"} <= set(js["starts"][0])
