from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isocap.errors import ShapeError
from isocap.geometry import Ball, Box, Ellipsoid, ParallelQuery, Polytope, box_polytope, omega, volume
from isocap.quermass import af_check, mean_curvature_integral, quermass, steiner_perimeter, steiner_volume

axes = st.tuples(*[st.floats(0.4, 3.0)] * 3)


def test_cube_vector():
    q = quermass(Box((0.5, 0.5, 0.5)))
    assert np.allclose(q.w, (1.0, 2.0, math.pi, 4 * math.pi / 3), atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_ball_vector(d):
    q = quermass(Ball(2.0, dim=d))
    assert np.allclose(q.w, [omega(d) * 2.0 ** (d - k) for k in range(d + 1)])


def test_polytope_cube_matches_box():
    b = Box((1.0, 0.5, 0.25))
    assert np.allclose(quermass(box_polytope(b)).w, quermass(b).w, rtol=1e-12)


def test_tetrahedron_mean_width():
    # regular tetrahedron with edge 1: mean curvature integral = sum of edges * exterior angle / 2
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float) / (2 * math.sqrt(2))
    q = quermass(Polytope(v))
    dihedral = math.acos(1 / 3)
    assert q.w[0] == pytest.approx(1 / (6 * math.sqrt(2)))
    assert 3 * q.w[1] == pytest.approx(math.sqrt(3))
    assert 3 * q.w[2] == pytest.approx(6 * (math.pi - dihedral) / 2)


def test_polytope_rejects_high_dimension():
    cube4 = Polytope(np.array(np.meshgrid(*[[-1, 1]] * 4)).reshape(4, -1).T)
    with pytest.raises(ShapeError):
        quermass(cube4)


def test_prolate_surface_area():
    a, b = 2.0, 1.0
    e = math.sqrt(1 - b * b / (a * a))
    area = 2 * math.pi * b * b * (1 + a / (b * e) * math.asin(e))
    q = quermass(Ellipsoid((a, b, b)))
    assert 3 * q.w[1] == pytest.approx(area, rel=1e-10)
    assert q.w[0] == pytest.approx(volume(Ellipsoid((a, b, b))), rel=1e-12)


def test_ellipse_perimeter():
    from scipy.special import ellipe

    q = quermass(Ellipsoid((3.0, 1.0)))
    assert 2 * q.w[1] == pytest.approx(4 * 3.0 * ellipe(1 - 1 / 9), rel=1e-10)


def test_ellipsoid_d4_against_sphere_rule():
    q = quermass(Ellipsoid((1.5, 1.0, 1.0, 0.7)))
    assert q.w[-1] == pytest.approx(omega(4))
    assert af_check(q).passed


def test_parallel_query_shifts_vector():
    e = Ellipsoid((2, 1, 0.5))
    q = quermass(ParallelQuery(e, 0.3))
    base = quermass(e)
    for r in (0.0, 0.5, 1.7):
        assert steiner_volume(q, r) == pytest.approx(steiner_volume(base, r + 0.3), rel=1e-9)
        assert steiner_perimeter(q, r) == pytest.approx(steiner_perimeter(base, r + 0.3), rel=1e-9)


def test_af_detects_violation():
    from isocap.quermass import QuermassVector

    bad = QuermassVector(3, (1.0, 10.0, 1.0, 4 * math.pi / 3), "test")
    assert not af_check(bad).passed


def test_mean_curvature_of_ball():
    assert mean_curvature_integral(Ball(1.0)) == pytest.approx(4 * math.pi)


@settings(max_examples=20, deadline=None)
@given(axes)
def test_af_holds_on_ellipsoids(a):
    assert af_check(quermass(Ellipsoid(a))).passed


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.1, 5.0), min_size=2, max_size=5))
def test_af_holds_on_boxes(h):
    assert af_check(quermass(Box(tuple(h)))).passed


@settings(max_examples=20, deadline=None)
@given(axes, st.floats(0.2, 4.0))
def test_quermass_scaling(a, t):
    q, qt = quermass(Ellipsoid(a)), quermass(Ellipsoid(tuple(t * x for x in a)))
    for k in range(4):
        assert qt.w[k] == pytest.approx(t ** (3 - k) * q.w[k], rel=1e-7)
