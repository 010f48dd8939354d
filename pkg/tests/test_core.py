import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from feasor.algorithms import douglas_rachford
from feasor.core import (InnerProduct, Status, StoppingPolicy, inner, iterate,
                         norm)
from feasor.errors import DimensionError, NumericalError
from feasor.sets import Ball, Halfspace, Hyperplane

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_inner_examples():
    assert inner([1, 2], [3, 4]) == 11
    assert inner([1, 0], [0, 1]) == 0
    assert inner([1, 1], [1, 1], InnerProduct([0.5, 1.5])) == 2


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionError):
        inner([1, 2], [1, 2, 3])
    with pytest.raises(DimensionError):
        inner([1, 2], [1, 2], InnerProduct([1, 1, 1]))


def test_weights_must_be_positive():
    with pytest.raises(ValueError):
        InnerProduct([1.0, 0.0])


@given(arrays(float, 4, elements=finite), arrays(float, 4, elements=finite),
       arrays(float, 4, elements=st.floats(0.1, 10)))
def test_inner_symmetric_and_positive(x, y, w):
    ip = InnerProduct(w)
    assert ip(x, y) == pytest.approx(ip(y, x))
    assert ip(x, x) >= 0
    assert norm(x, ip) == pytest.approx(np.sqrt(np.sum(w * x * x)))


def test_identity_converges_at_first_step():
    rep = iterate(lambda x: x, [3.0, -1.0])
    assert rep.status is Status.CONVERGED
    assert rep.iterations == 1
    assert rep.residuals.tolist() == [0.0]
    assert rep.last_residual == 0.0


def test_dr_lines_converges_with_exact_rate(xaxis, diag):
    T = douglas_rachford(xaxis, diag)
    rep = iterate(T, [1.0, 0.0], StoppingPolicy(step_tol=1e-12, trace_stride=1))
    assert rep.status is Status.CONVERGED
    assert np.linalg.norm(rep.final_iterate) < 1e-11
    for k, x in rep.trace:
        assert abs(np.linalg.norm(x) - 2.0 ** (-k / 2)) <= 1e-12


def test_dr_parallel_lines_diverge(xaxis):
    T = douglas_rachford(xaxis, Hyperplane([0, 1], 1))
    rep = iterate(T, [0.0, 0.0], StoppingPolicy(divergence_radius=1e3))
    assert rep.status is Status.DIVERGING
    assert np.linalg.norm(rep.final_iterate) > 1e3
    np.testing.assert_array_equal(rep.displacement_estimate, [0.0, 1.0])
    np.testing.assert_array_equal(rep.final_iterate, [0.0, rep.iterations])


def test_max_iterations_and_time_limit(xaxis, diag):
    T = douglas_rachford(xaxis, diag)
    rep = iterate(T, [1.0, 0.0], StoppingPolicy(max_iters=5))
    assert rep.status is Status.MAX_ITERATIONS and rep.iterations == 5

    def slow(x):
        import time
        time.sleep(0.002)
        return x + 1.0
    rep = iterate(slow, [0.0], StoppingPolicy(time_limit=0.01))
    assert rep.status is Status.TIME_LIMIT


def test_nonfinite_iterate_raises():
    with pytest.raises(NumericalError):
        iterate(lambda x: x * np.inf, [1.0])
    with pytest.raises(NumericalError):
        iterate(lambda x: x, [np.nan])


def test_dimension_change_raises():
    with pytest.raises(DimensionError):
        iterate(lambda x: np.append(x, 0.0), [1.0])


def test_solution_test_on_start_and_stride():
    rep = iterate(lambda x: x + 1, [5.0], solution_test=lambda s: s[0] >= 5)
    assert rep.status is Status.SOLUTION_FOUND and rep.iterations == 0
    rep = iterate(lambda x: x + 1, [0.0], StoppingPolicy(check_stride=4),
                  solution_test=lambda s: s[0] >= 2)
    assert rep.status is Status.SOLUTION_FOUND and rep.iterations == 4


def test_policy_validation():
    for kw in ({"step_tol": 0}, {"max_iters": 0}, {"time_limit": -1},
               {"divergence_radius": 0}, {"check_stride": 0}, {"trace_stride": -1}):
        with pytest.raises(ValueError):
            StoppingPolicy(**kw)


def test_report_invariants_replayed(rng):
    A, B = Ball(1.0, 3), Halfspace([1, 1, 1], 0.5)
    T = douglas_rachford(A, B)
    x0 = rng.normal(size=3) * 4
    rep = iterate(T, x0, StoppingPolicy(step_tol=1e-9, trace_stride=1))
    assert rep.status is Status.CONVERGED
    assert rep.last_residual <= 1e-9
    assert len(rep.residuals) == rep.iterations
    xs = [x for _, x in rep.trace]
    replay = [np.linalg.norm(xs[k + 1] - xs[k]) for k in range(len(xs) - 1)]
    np.testing.assert_array_equal(rep.residuals, replay)
    np.testing.assert_array_equal(rep.displacement_estimate, xs[-1] - xs[-2])
    np.testing.assert_allclose(rep.shadow, A.project(rep.final_iterate))


def test_fejer_monotone(rng):
    A, B = Ball(2.0, 3), Hyperplane([1, 2, 0], 1)
    T = douglas_rachford(A, B)
    for _ in range(5):
        rep = iterate(T, rng.normal(size=3) * 5, StoppingPolicy(step_tol=1e-13, trace_stride=1))
        f = rep.final_iterate
        d = [np.linalg.norm(x - f) for _, x in rep.trace]
        assert all(d[k + 1] <= d[k] + 1e-9 for k in range(len(d) - 1))


def test_determinism(rng):
    T = douglas_rachford(Ball(1.0, 4), Hyperplane([1, 0, 2, 1], 1))
    x0 = rng.normal(size=4)
    a, b = iterate(T, x0), iterate(T, x0)
    assert a.residuals.tobytes() == b.residuals.tobytes()


@settings(max_examples=50)
@given(st.integers(1, 6))
def test_trace_stride(stride):
    rep = iterate(lambda x: 0.5 * x, [1.0], StoppingPolicy(max_iters=12, step_tol=1e-300,
                                                          trace_stride=stride))
    assert [k for k, _ in rep.trace] == [0] + list(range(stride, 13, stride))
