import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evochain.core import (
    DEDUPE_RADIUS,
    NILPOTENT_CODES,
    SOLVER_TOL,
    ZERO_TOL,
    AlgebraElement,
    StructMatrix2,
    baric_batch,
    baric_weight,
    idempotent_bound,
    idempotents,
    iterate,
    multiply,
    nilpotent_batch,
    nilpotent_class,
    square,
)
from oracles import grid_refine_idempotents, ray_refine_idempotents, same_point_sets

entry = st.floats(-3, 3, allow_nan=False)
matrices = st.tuples(entry, entry, entry, entry).map(lambda e: StructMatrix2(*e))
coords = st.floats(-10, 10, allow_nan=False)
elements = st.tuples(coords, coords).map(lambda c: AlgebraElement(*c))

I = StructMatrix2.identity()
ROT = StructMatrix2(0, 1, -1, 0)
HALF = StructMatrix2(0.5, 0.5, 0.5, 0.5)


def test_struct_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        StructMatrix2(math.nan, 0, 0, 0)


def test_multiply_examples():
    assert tuple(multiply(AlgebraElement(1, 2), AlgebraElement(3, 4), StructMatrix2.zero())) == (0, 0)
    assert tuple(multiply(AlgebraElement(1, 0), AlgebraElement(0, 1), HALF)) == (0, 0)
    assert tuple(multiply(AlgebraElement(1, 2), AlgebraElement(3, 4), I)) == (3, 8)


def test_square_examples():
    assert tuple(square(AlgebraElement(0, 0), HALF)) == (0, 0)
    assert tuple(square(AlgebraElement(1, 1), I)) == (1, 1)
    assert tuple(square(AlgebraElement(-1, 1), ROT)) == (-1, 1)


def test_iterate_examples():
    traj = iterate(AlgebraElement(0, 0), HALF, 5)
    assert [tuple(p) for p in traj.points] == [(0, 0)] * 6
    assert [tuple(p) for p in iterate(AlgebraElement(1, 1), I, 3).points] == [(1, 1)] * 4
    assert [tuple(p) for p in iterate(AlgebraElement(0.5, 0.5), HALF, 1).points] == [(0.5, 0.5), (0.25, 0.25)]


def test_iterate_stops_at_overflow_guard():
    traj = iterate(AlgebraElement(2, 0), I, 50)
    assert traj.diverged
    assert all(p.max_abs() <= 1e12 for p in traj.points)
    assert traj.diverged_at == len(traj.points)


def test_baric_examples():
    assert not baric_weight(StructMatrix2.zero()).baric
    st_ = baric_weight(I)
    assert (st_.index, st_.weight) == (1, 1.0)
    st_ = baric_weight(StructMatrix2(0, 0, 5, 3))
    assert (st_.index, st_.weight) == (2, 3.0)


def test_nilpotent_examples():
    assert nilpotent_class(StructMatrix2.zero()).kind == "all"
    c = nilpotent_class(StructMatrix2(0.5, -0.5, -0.5, 0.5))
    assert c.kind == "curve" and c.direction == pytest.approx((1, 1))
    assert nilpotent_class(HALF).kind == "only_zero"


def test_idempotent_examples():
    assert sorted(idempotents(I).as_tuples()) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert same_point_sets(idempotents(ROT).as_tuples(), [(0, 0), (-1, 1)], 1e-12)
    assert same_point_sets(idempotents(HALF).as_tuples(), [(0, 0), (1, 1)], 1e-12)


def test_boundary_flag_in_fragile_band():
    assert baric_weight(StructMatrix2(1, 0, 1.5 * ZERO_TOL, 0)).boundary
    assert not baric_weight(StructMatrix2(1, 0, 0, 0)).boundary
    assert not baric_weight(StructMatrix2(1, 0, 1e-3, 0)).boundary


@given(elements, elements, matrices)
def test_multiply_commutes(x, y, M):
    assert tuple(multiply(x, y, M)) == tuple(multiply(y, x, M))


@given(elements, matrices)
def test_square_is_self_product(x, M):
    assert tuple(square(x, M)) == tuple(multiply(x, x, M))


@settings(max_examples=300, deadline=None)
@given(matrices)
def test_idempotent_set_invariants(M):
    S = idempotents(M)
    pts = S.as_tuples()
    assert (0.0, 0.0) in pts
    for p in S.points:
        v = square(p, M)
        assert max(abs(v.x1 - p.x1), abs(v.x2 - p.x2)) < ZERO_TOL * max(1.0, p.max_abs()) ** 2
    for i, p in enumerate(pts):
        for q in pts[i + 1 :]:
            assert max(abs(p[0] - q[0]), abs(p[1] - q[1])) > DEDUPE_RADIUS
    bound = idempotent_bound(M)
    assert all(math.hypot(*p) <= bound * (1 + 1e-6) + 1e-9 for p in pts)


@settings(max_examples=300, deadline=None)
@given(matrices)
def test_curve_direction_solves_the_linear_system(M):
    c = nilpotent_class(M)
    if c.kind == "curve":
        u, v = c.direction
        assert u >= 0 and v >= 0 and max(u, v) == pytest.approx(1.0)
        scale = max(1.0, M.max_abs())
        assert abs(M.a11 * u + M.a21 * v) <= ZERO_TOL * (u + v) * scale
        assert abs(M.a12 * u + M.a22 * v) <= ZERO_TOL * (u + v) * scale


decisive = st.one_of(st.just(0.0), st.floats(3 * ZERO_TOL, 3, allow_nan=False), st.floats(-3, -3 * ZERO_TOL))


@settings(max_examples=300, deadline=None)
@given(st.tuples(decisive, decisive, decisive, decisive), st.tuples(*[st.floats(-0.49, 0.49)] * 4))
def test_baric_stable_under_small_perturbations(e, d):
    M = StructMatrix2(*e)
    P = StructMatrix2(*(v + ZERO_TOL * w for v, w in zip(e, d)))
    a, b = baric_weight(M), baric_weight(P)
    assert (a.baric, a.index) == (b.baric, b.index)


def test_batch_kernels_match_scalar():
    rng = np.random.default_rng(3)
    A = rng.uniform(-3, 3, (400, 2, 2))
    # plant exact zeros and near-threshold entries
    A[::5, 1, 0] = 0.0
    A[1::7, 0, 1] = 0.0
    A[2::9, 1, 0] = 1.5 * ZERO_TOL
    A[3::11] = A[3::11, :, :1] * np.array([1.0, -1.0])
    index, weight, boundary = baric_batch(A)
    code, nboundary = nilpotent_batch(A)
    for k, a in enumerate(A):
        M = StructMatrix2.from_array(a)
        b = baric_weight(M)
        assert (index[k] or None) == b.index
        assert bool(boundary[k]) == b.boundary
        if b.baric:
            assert weight[k] == b.weight
        n = nilpotent_class(M)
        assert code[k] == NILPOTENT_CODES[n.kind]
        assert bool(nboundary[k]) == n.boundary


def test_oracle_equivalence_on_random_matrices():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        A = rng.uniform(-3, 3, (2, 2))
        M = StructMatrix2.from_array(A)
        S = idempotents(M)
        worst = max(worst, max(S.residuals))
        ref = grid_refine_idempotents(A, min(idempotent_bound(M) * 1.01, 1e4), width=1e-9)
        assert same_point_sets(S.as_tuples(), ref, DEDUPE_RADIUS), A.tolist()
    assert worst < SOLVER_TOL


def test_ray_oracle_agrees_with_box_oracle():
    rng = np.random.default_rng(8)
    for _ in range(200):
        A = rng.uniform(-3, 3, (2, 2))
        ref = grid_refine_idempotents(A, min(idempotent_bound(StructMatrix2.from_array(A)) * 1.01, 1e4))
        assert same_point_sets(ray_refine_idempotents(A), ref, DEDUPE_RADIUS), A.tolist()


def test_unbounded_rows_use_the_ray_oracle():
    # rows on a line through the origin: the radius bound is infinite
    for c in (0.1, 0.5, 4.0):
        M = StructMatrix2(c, -c, -c, c)
        assert idempotent_bound(M) == math.inf
        assert same_point_sets(idempotents(M).as_tuples(), ray_refine_idempotents(M.as_array()), DEDUPE_RADIUS)
    M = StructMatrix2(0.0, 0.0, 2.0, 3.0)
    want = [(0.0, 0.0), (2.0 / 9.0, 1.0 / 3.0)]
    assert same_point_sets(ray_refine_idempotents(M.as_array()), want, 1e-12)
    assert same_point_sets(idempotents(M).as_tuples(), want, 1e-12)


def test_decoupled_system():
    # a12 = a21 = 0 gives x = a11 x^2, y = a22 y^2
    S = idempotents(StructMatrix2(2.0, 0.0, 0.0, 4.0))
    assert sorted(S.as_tuples()) == [(0, 0), (0, 0.25), (0.5, 0), (0.5, 0.25)]


def test_rejects_nonpositive_eps():
    with pytest.raises(ValueError):
        idempotents(I, eps=0.0)
