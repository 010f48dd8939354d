import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from feasor.algorithms import (aamr, anchored_dr, averaged_projections,
                               best_approximation_pair, circumcenter,
                               circumcentered_dr, cyclic_dr,
                               cyclic_projections, douglas_rachford,
                               generalized_dr, lift, naive_multiset_dr,
                               product_aamr, product_dr, product_gdr, raar,
                               unlift_shadow)
from feasor.core import InnerProduct, Status, StoppingPolicy, iterate
from feasor.errors import (DegenerateTriangleError, DimensionError,
                           InvalidProblemError, MissingShadowError, ParamError)
from feasor.sets import (Ball, Halfspace, Hyperplane, Orthant, ProductSet,
                         DiagonalSet, WholeSpace)

coords = arrays(float, 2, elements=st.floats(-50, 50))


def eq(a, b, tol=1e-12):
    np.testing.assert_allclose(a, b, atol=tol, rtol=0)


@pytest.fixture
def yaxis():
    return Hyperplane([1, 0], 0, name="x=0")


@pytest.fixture
def upper():
    return Hyperplane([0, 1], 1, name="y=1")


def test_cyclic_projections_examples(xaxis, diag):
    eq(cyclic_projections([xaxis])([1, 2]), [1, 0])
    eq(cyclic_projections([xaxis, diag])([0, 2]), [0, 0])
    eq(cyclic_projections([xaxis, diag])([0, 0]), [0, 0])
    with pytest.raises(InvalidProblemError):
        cyclic_projections([])


def test_averaged_projections_examples(xaxis, yaxis):
    eq(averaged_projections([xaxis, yaxis])([2, 2]), [1, 1])
    eq(averaged_projections([xaxis, yaxis])([0, 0]), [0, 0])
    eq(averaged_projections([xaxis])([3, 4]), xaxis.project([3, 4]))
    with pytest.raises(InvalidProblemError):
        averaged_projections([])


def test_dr_examples(xaxis, diag, upper):
    T = douglas_rachford(xaxis, diag)
    eq(T([1, 0]), [0.5, 0.5])
    eq(douglas_rachford(xaxis, upper)([0, 0]), [0, 1])
    eq(T([0, 0]), [0, 0])
    eq(T.shadow([1, 3]), [1, 0])


def test_gdr_examples(xaxis, diag, rng):
    eq(generalized_dr(xaxis, diag, 0.8)([1, 0]), [0.2, 0.8])
    G, T = generalized_dr(xaxis, diag, 0.5), douglas_rachford(xaxis, diag)
    for x in rng.normal(size=(100, 2)):
        eq(G(x), T(x))
    eq(G([0, 0]), [0, 0])
    for bad in (0, 1, -0.1, 1.5):
        with pytest.raises(ParamError):
            generalized_dr(xaxis, diag, bad)


def test_raar_examples(xaxis, diag, upper):
    eq(raar(xaxis, diag, 0.4)([1, 0]), [0.8, 0.2])
    eq(raar(xaxis, upper, 0.4)([0, 0]), [0, 0.4])
    eq(raar(xaxis, diag, 0.4)([0, 0]), [0, 0])
    for bad in (0, 1):
        with pytest.raises(ParamError):
            raar(xaxis, diag, bad)


def test_circumcenter_examples():
    eq(circumcenter([0, 0], [2, 0], [0, 2]), [1, 1])
    eq(circumcenter([3, 7], [3, 7], [3, 7]), [3, 7])
    eq(circumcenter([1, 2], [1, -2], [-1, -2]), [0, 0])
    eq(circumcenter([1, 1], [3, 5], [1, 1]), [2, 3])
    with pytest.raises(DegenerateTriangleError):
        circumcenter([0, 0], [1, 1], [3, 3])


@settings(max_examples=200, deadline=None)
@given(arrays(float, (3, 3), elements=st.floats(-10, 10)))
def test_circumcenter_equidistant_in_hull(P):
    a, b, c = P
    u, v = b - a, c - a
    area2 = np.dot(u, u) * np.dot(v, v) - np.dot(u, v) ** 2
    scale = max(np.dot(u, u), np.dot(v, v), 1e-300)
    if area2 <= 1e-6 * scale ** 2:
        return
    z = circumcenter(a, b, c)
    d = [np.linalg.norm(z - p) for p in (a, b, c)]
    assert max(d) - min(d) <= 1e-8 * (1 + max(d))
    # z - a lies in span{u, v}
    M = np.column_stack([u, v])
    coef = np.linalg.lstsq(M, z - a, rcond=None)[0]
    eq(M @ coef, z - a, 1e-8 * (1 + np.abs(z).max()))


def test_cdr_examples(xaxis, yaxis):
    T = circumcentered_dr(xaxis, yaxis)
    eq(T([1, 2]), [0, 0])
    eq(T([0, 0]), [0, 0])
    eq(circumcentered_dr(xaxis, xaxis)([1, 2]), [1, 0])


def test_cdr_degenerate_propagates():
    A = Hyperplane([0, 1], 0)
    B = Hyperplane([0, 1], 1)
    with pytest.raises(DegenerateTriangleError):
        circumcentered_dr(A, B)([0.0, 0.3])


def test_aamr_examples(xaxis, diag):
    E = WholeSpace(2)
    eq(aamr(E, E, 0.5, 0.5, [0, 0])([2, 0]), [1, 0])
    eq(aamr(xaxis, diag, 0.5, 1.0, [0, 0])([1, 0]), [0.5, 0.5])
    eq(aamr(xaxis, diag, 0.7, 0.3, [0, 0])([0, 0]), [0, 0])
    eq(aamr(xaxis, diag, 0.5, 0.5, [1, 2]).shadow([0, 0]), [1, 0])
    with pytest.raises(ParamError):
        aamr(xaxis, diag, 0.0, 0.5)
    with pytest.raises(ParamError):
        aamr(xaxis, diag, 0.5, 1.1)
    with pytest.raises(DimensionError):
        aamr(xaxis, diag, 0.5, 0.5, [0, 0, 0])
    aamr(xaxis, diag, 1.0, 0.5)  # alpha = 1 is admissible


def test_naive_multiset_dr_examples(xaxis, diag, yaxis, rng):
    eq(naive_multiset_dr([xaxis, diag, yaxis])([1, 0]), [0.5, 0.5])
    eq(naive_multiset_dr([xaxis, diag, yaxis])([0, 0]), [0, 0])
    N, T = naive_multiset_dr([xaxis, diag]), douglas_rachford(xaxis, diag)
    for x in rng.normal(size=(20, 2)):
        eq(N(x), T(x))
    with pytest.raises(InvalidProblemError):
        naive_multiset_dr([xaxis])


def test_cyclic_dr_examples(xaxis, diag):
    T = cyclic_dr([xaxis, diag])
    eq(T([1, 0]), [0.5, 0])
    eq(T([0, 0]), [0, 0])
    eq(cyclic_dr([xaxis, xaxis])([4, 0]), [4, 0])
    assert not np.allclose(T([1, 0]), douglas_rachford(xaxis, diag)([1, 0]))
    with pytest.raises(InvalidProblemError):
        cyclic_dr([xaxis])


def test_anchored_dr_examples(xaxis, diag, yaxis, rng):
    E = WholeSpace(2)
    eq(anchored_dr(E, [xaxis])([1, 2]), [1, 0])
    A, T = anchored_dr(xaxis, [diag]), douglas_rachford(xaxis, diag)
    for x in rng.normal(size=(100, 2)):
        eq(A(x), T(x))
    eq(anchored_dr(xaxis, [diag, yaxis])([0, 0]), [0, 0])
    with pytest.raises(InvalidProblemError):
        anchored_dr(xaxis, [])


def test_anchored_with_whole_space_is_cyclic_projections(rng):
    sets = [Hyperplane(rng.normal(size=3), rng.normal()) for _ in range(3)]
    A = anchored_dr(WholeSpace(3), sets)
    C = cyclic_projections(sets)
    for x in rng.normal(size=(50, 3)):
        eq(A(x), C(x))


def test_product_dr_examples():
    one = Hyperplane([1.0], 1.0)
    T = product_dr([one, one])
    eq(T([0, 2]), [0, 2])
    eq(T.shadow([0, 2]), [1])
    eq(T([0, 4]), [-1, 3])
    assert abs(T.shadow(T([0, 4]))[0] - 1) < abs(T.shadow([0, 4])[0] - 1) + 1e-15
    s = np.array([1.0])
    eq(T(lift(s, 2)), lift(s, 2))
    with pytest.raises(InvalidProblemError):
        product_dr([one])


def test_product_dr_matches_displayed_recursion(rng):
    sets = [Ball(1.0, 3), Halfspace([1, 1, 0], 0.2), Hyperplane([0, 1, 1], 0.5)]
    T = product_dr(sets)
    for _ in range(20):
        X = rng.normal(size=9)
        p = X.reshape(3, 3).mean(axis=0)
        blocks = X.reshape(3, 3)
        want = np.concatenate([0.5 * x + 0.5 * C.reflect(2 * p - x)
                               for x, C in zip(blocks, sets)])
        eq(T(X), want, 1e-12)


def test_lift_and_unlift():
    eq(lift([1, 2], 2), [1, 2, 1, 2])
    eq(unlift_shadow([0, 4], 2, 1), [2])
    x = np.array([0.3, -2.0, 7.0])
    eq(unlift_shadow(lift(x, 4), 4), x)
    with pytest.raises(DimensionError):
        unlift_shadow([1, 2, 3], 2)
    with pytest.raises(DimensionError):
        unlift_shadow([1, 2, 3, 4], 2, 3)


def test_best_approximation_pair_parallel(xaxis, upper):
    rep = iterate(douglas_rachford(xaxis, upper), [0.0, 0.0],
                  StoppingPolicy(divergence_radius=100))
    assert rep.status is Status.DIVERGING
    a, b = best_approximation_pair(rep, xaxis, upper)
    assert a[1] == 0 and b[1] == 1 and a[0] == b[0]
    assert np.linalg.norm(a - b) == 1.0
    eq(rep.displacement_estimate, [0, 1])


def test_best_approximation_pair_consistent(xaxis, diag):
    rep = iterate(douglas_rachford(xaxis, diag), [3.0, 1.0])
    a, b = best_approximation_pair(rep, xaxis, diag)
    eq(a, [0, 0], 1e-9)
    eq(b, [0, 0], 1e-9)
    rep = iterate(douglas_rachford(xaxis, xaxis), [3.0, 1.0])
    a, b = best_approximation_pair(rep, xaxis, xaxis)
    eq(a, b, 0)


def test_best_approximation_pair_missing_shadow(xaxis):
    rep = iterate(cyclic_projections([xaxis]), [1.0, 1.0])
    with pytest.raises(MissingShadowError):
        best_approximation_pair(rep, xaxis, xaxis)


def test_two_line_rate_and_parallel_drift(xaxis, diag, upper):
    T = douglas_rachford(xaxis, diag)
    x = np.array([1.0, 0.0])
    for k in range(1, 41):
        x = T(x)
        assert abs(np.linalg.norm(x) - 2 ** (-k / 2)) <= 1e-12
    T = douglas_rachford(xaxis, upper)
    x = np.zeros(2)
    for k in range(1, 30):
        x_new = T(x)
        eq(x_new - x, [0, 1], 0)
        eq(T.shadow(x_new), [0, 0], 0)
        x = x_new


def convex_pairs(rng):
    w = rng.uniform(0.5, 2, 4)
    ip = InnerProduct(w)
    return [
        (Ball(1.0, 4), Halfspace(rng.normal(size=4), 0.3)),
        (Hyperplane(rng.normal(size=4), 1.0), Orthant(4)),
        (Hyperplane(rng.normal(size=4), 1.0, ip), Orthant(4, ip)),
    ]


def test_dr_firmly_nonexpansive(rng):
    for A, B in convex_pairs(rng):
        T = douglas_rachford(A, B)
        ip = A.ip
        for _ in range(1000):
            x, y = rng.normal(size=(2, 4)) * 3
            tx, ty = T(x), T(y)
            assert ip(x - y, tx - ty) >= ip(tx - ty, tx - ty) - 1e-9


def test_dr_fixed_point_characterisation(rng):
    A, B = Ball(1.0, 2), Halfspace([1.0, 0.0], 0.5)
    T = douglas_rachford(A, B)
    for _ in range(500):
        x = rng.normal(size=2) * 2
        gap = np.linalg.norm(B.project(2 * A.project(x) - x) - A.project(x))
        assert np.linalg.norm(T(x) - x) == pytest.approx(gap, abs=1e-15)
    rep = iterate(T, [3.0, 4.0])
    assert A.project(rep.final_iterate) in B


def test_cyclic_projections_averaged(rng):
    for r in (2, 3, 4):
        sets = [Hyperplane(rng.normal(size=5), rng.normal()) for _ in range(r)]
        T = cyclic_projections(sets)
        alpha = 1 - 2.0 ** (-r)
        for _ in range(300):
            x, y = rng.normal(size=(2, 5)) * 3
            tx, ty = T(x), T(y)
            lhs = np.sum((tx - ty) ** 2)
            rhs = np.sum((x - y) ** 2) - (1 - alpha) / alpha * np.sum(((x - tx) - (y - ty)) ** 2)
            assert lhs <= rhs + 1e-9


def test_product_space_equivalence(rng):
    sets = [Hyperplane([1, 1], 1), Halfspace([1, -1], 0), Ball(2.0, 2)]
    C = ProductSet(sets)
    D = DiagonalSet(3, 2)
    for _ in range(500):
        x = rng.normal(size=2) * 1.5
        if rng.uniform() < 0.5:
            x = sets[0].project(x)
        X = lift(x, 3)
        assert all(x in s for s in sets) == (X in C and X in D)


def test_product_variants_reductions(rng):
    sets = [Ball(1.0, 3), Hyperplane([1, 2, 3], 0.5), Orthant(3)]
    P, G = product_dr(sets), product_gdr(sets, 0.5)
    Aq = product_aamr(sets, 0.5, 1.0)
    for X in rng.normal(size=(50, 9)):
        eq(G(X), P(X))
        eq(Aq(X), P(X))
    with pytest.raises(ParamError):
        product_gdr(sets, 1.0)


def test_product_solves_consistent_problem():
    sets = [Ball(1.0, 3), Hyperplane([1, 2, 3], 0.5), Orthant(3)]
    for op in (product_dr(sets), product_aamr(sets, 0.9, 0.9)):
        rep = iterate(op, lift(np.array([2.0, -1.0, 3.0]), 3), StoppingPolicy(step_tol=1e-12))
        assert rep.status is Status.CONVERGED
        s = rep.shadow
        assert all(S.contains(s, 1e-6) for S in sets)


def test_labels_embed_order(xaxis, diag):
    assert douglas_rachford(xaxis, diag).label == "DR[y=0->y=x]"
    assert "y=0" in cyclic_dr([xaxis, diag]).label


@settings(max_examples=100, deadline=None)
@given(coords, st.floats(0.05, 3.0))
def test_cdr_one_step_on_lines(x0, theta):
    # off A; for x0 in A the triple collapses to (x0, x0, R_B x0)
    x0[1] = np.copysign(max(abs(x0[1]), 1e-3), x0[1])
    A = Hyperplane([0, 1], 0)
    B = Hyperplane([-np.sin(theta), np.cos(theta)], 0)
    eq(circumcentered_dr(A, B)(x0), [0, 0], 1e-9 * (1 + np.abs(x0).max()))
