from __future__ import annotations

import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import elliprf

from isocap.capacity import (CapacityEstimate, ball_capacity, cap_ellipsoid, cap_exact, cap_hitting_mc,
                             isocapacitary_floor, reference_capacity)
from isocap.errors import ShapeError
from isocap.geometry import Ball, Box, Ellipsoid, SegmentFamily, box_polytope, volume
from isocap.mc import MCConfig

axes = st.tuples(*[st.floats(0.3, 4.0)] * 3)

# unit cube: cap / (4 pi) = 0.66067813 (published high-precision value)
CUBE_CAP = 4 * math.pi * 0.66067813


def _carlson(a):
    # int_0^inf prod (a_i^2 + t)^(-1/2) dt = 2 R_F(a_1^2, a_2^2, a_3^2)
    return 8 * math.pi / (2 * elliprf(a[0] ** 2, a[1] ** 2, a[2] ** 2))


def test_ball_capacity_normalisation():
    assert ball_capacity(3, 1.0) == pytest.approx(4 * math.pi)
    assert ball_capacity(5, 0.5) == pytest.approx(math.pi**2)
    assert ball_capacity(4, 2.0) == pytest.approx(16 * math.pi**2)
    with pytest.raises(ShapeError):
        ball_capacity(2)


def test_ellipsoid_frozen_values():
    assert cap_ellipsoid(Ellipsoid((2, 1, 1))).value == pytest.approx(16.527174043782797, rel=1e-10)
    assert cap_ellipsoid(Ellipsoid((3, 2, 1))).value == pytest.approx(24.7056002473543, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(axes)
def test_ellipsoid_against_carlson(a):
    assert cap_ellipsoid(Ellipsoid(a)).value == pytest.approx(_carlson(a), rel=1e-9)


def test_ellipsoid_d4_ball_limit():
    assert cap_ellipsoid(Ellipsoid((1.3,) * 4)).value == pytest.approx(ball_capacity(4, 1.3), rel=1e-9)


def test_planar_logarithmic_capacity():
    assert cap_exact(Ellipsoid((3.0, 1.0))).value == pytest.approx(2.0)
    assert cap_exact(Ball(0.7, dim=2)).value == pytest.approx(0.7)


def test_segment_family_is_polar():
    est = cap_exact(SegmentFamily(1.0))
    assert est.value == 0 and est.meta["polar"]


def test_estimate_validation():
    with pytest.raises(ValueError):
        CapacityEstimate(1.0, "guess")
    with pytest.raises(ValueError):
        CapacityEstimate(0.0, "exact")


def test_hitting_mc_ball_and_cube():
    ball = cap_hitting_mc(Ball(1.0), MCConfig(1, 40_000))
    assert abs(ball.value - 4 * math.pi) < 4 * ball.stderr
    cube = cap_hitting_mc(Box((0.5, 0.5, 0.5)), MCConfig(2, 40_000))
    assert abs(cube.value - CUBE_CAP) < 4 * cube.stderr
    poly = cap_hitting_mc(box_polytope(Box((0.5, 0.5, 0.5))), MCConfig(3, 40_000))
    assert abs(poly.value - CUBE_CAP) < 4 * poly.stderr


def test_hitting_mc_ellipsoid():
    est = cap_hitting_mc(Ellipsoid((2, 1, 1)), MCConfig(4, 40_000))
    assert abs(est.value - 16.527174043782797) < 4 * est.stderr


def test_hitting_mc_is_seed_deterministic_and_worker_independent():
    a = cap_hitting_mc(Box((0.5, 0.3, 0.2)), MCConfig(9, 5_000, chunk_size=1000))
    b = cap_hitting_mc(Box((0.5, 0.3, 0.2)), MCConfig(9, 5_000, workers=2, chunk_size=1000))
    assert a.value == b.value


def test_reference_needs_seed_for_mc_shapes():
    with pytest.raises(ShapeError):
        reference_capacity(Box((1, 1, 1)))


@settings(max_examples=30, deadline=None)
@given(axes)
def test_isocapacitary_floor(a):
    e = Ellipsoid(a)
    assert cap_ellipsoid(e).value >= isocapacitary_floor(3, volume(e)) * (1 - 1e-10)


@settings(max_examples=30, deadline=None)
@given(axes, st.floats(0.2, 5.0))
def test_capacity_scaling(a, t):
    c1 = cap_ellipsoid(Ellipsoid(a)).value
    ct = cap_ellipsoid(Ellipsoid(tuple(t * x for x in a))).value
    assert ct == pytest.approx(t * c1, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(axes, st.tuples(*[st.floats(1.0, 2.0)] * 3))
def test_capacity_monotone(a, grow):
    small = Ellipsoid(a)
    large = Ellipsoid(tuple(x * g for x, g in zip(a, grow)))
    assert cap_ellipsoid(small).value <= cap_ellipsoid(large).value * (1 + 1e-10)
