import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evochain.polynomial import all_roots, cubic_roots, quadratic_roots, quartic_roots, real_roots, trim

coef = st.floats(-10, 10, allow_nan=False).filter(lambda v: v == 0 or abs(v) > 1e-3)


def _matched(ours, ref, tol):
    ref = list(ref)
    for z in ours:
        k = int(np.argmin([abs(z - w) for w in ref]))
        if abs(z - ref[k]) > tol * max(1.0, abs(ref[k])):
            return False
        ref.pop(k)
    return not ref


def test_quadratic_known():
    assert sorted(r.real for r in quadratic_roots(1, -3, 2)) == pytest.approx([1, 2])
    zs = quadratic_roots(1, 0, 1)
    assert sorted(z.imag for z in zs) == pytest.approx([-1, 1])


def test_cubic_known():
    assert sorted(r.real for r in cubic_roots(1, -6, 11, -6)) == pytest.approx([1, 2, 3])


def test_quartic_known():
    roots = sorted(r.real for r in quartic_roots(1, -10, 35, -50, 24))
    assert roots == pytest.approx([1, 2, 3, 4])


def test_quartic_repeated_root():
    # (x - 1)^2 (x + 2)^2
    roots = real_roots(np.polymul([1, -2, 1], [1, 4, 4]).tolist())
    assert len(roots) >= 2
    for r in roots:
        assert min(abs(r - 1), abs(r + 2)) < 1e-6


def test_trim_drops_leading_zeros():
    assert trim([0.0, 0.0, 1.0, 2.0]) == [1.0, 2.0]


def test_degenerate_degrees():
    assert all_roots([0, 0, 2, -4]) == pytest.approx([2])
    assert real_roots([0, 0, 0, 0, 5]) == []


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=4, max_size=4), st.floats(0.1, 5))
def test_quartic_recovers_planted_roots(roots, lead):
    # a root of multiplicity m moves by about eps^(1/m), so clustered roots
    # may come back as a nearby complex pair
    found = all_roots((lead * np.poly(roots)).tolist())
    assert len(found) == 4
    for r in roots:
        assert min(abs(r - z) for z in found) < 2e-3 * max(1.0, abs(r))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=4, max_size=4).filter(
    lambda r: min(abs(p - q) for i, p in enumerate(r) for q in r[i + 1 :]) > 0.1
))
def test_separated_real_roots_are_real(roots):
    found = real_roots(np.poly(roots).tolist())
    assert found == pytest.approx(sorted(roots), abs=1e-8)


def test_tiny_trailing_root_keeps_the_cluster():
    # per-root residuals alone would prefer three copies of the tiny root
    roots = all_roots(np.poly([1, 1, 1, -6.76e-17]).tolist())
    assert sum(abs(z - 1) < 1e-3 for z in roots) == 3


def test_extreme_coefficients_do_not_overflow():
    assert len(all_roots(np.poly([0.0, 1.0, 1.0, 1.28e-305]).tolist())) == 4


@settings(max_examples=300, deadline=None)
@given(st.lists(coef, min_size=5, max_size=5).filter(lambda c: abs(c[0]) > 1e-3))
def test_quartic_matches_numpy(c):
    ours = quartic_roots(*c)
    assert _matched(ours, np.roots(c), 1e-5)


@settings(max_examples=300, deadline=None)
@given(st.lists(coef, min_size=5, max_size=5).filter(lambda c: abs(c[0]) > 1e-3))
def test_roots_have_small_backward_error(c):
    p = np.poly1d(c)
    scale = sum(abs(v) for v in c)
    for z in quartic_roots(*c):
        assert abs(p(z)) <= 1e-8 * scale * max(1.0, abs(z)) ** 4
