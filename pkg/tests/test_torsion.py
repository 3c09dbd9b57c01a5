from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isocap.capacity import ball_capacity
from isocap.errors import ShapeError
from isocap.geometry import Ball, Box, Ellipsoid, box_polytope, volume
from isocap.mc import MCConfig
from isocap.torsion import (ball_functional, ball_torsion, check_theorem3, check_theorem4,
                            ellipsoid_torsion_function, functional, functional_from_parts, saint_venant_bound,
                            theorem4_value, torsion)

# eigenfunction series sum over odd n of prod 8 L_i / (n_i pi)^2 / sum (n_i pi / L_i)^2
CUBE_T = 0.0201685      # sides (1, 1, 1)
BOX_T = 0.0123271       # sides (2, 1, 0.5)

axes = st.tuples(*[st.floats(0.3, 3.0)] * 3)


def test_ball_and_ellipsoid_closed_forms():
    assert torsion(Ball(1.0)).value == pytest.approx(4 * math.pi / 45)
    assert torsion(Ellipsoid((1, 1, 1))).value == pytest.approx(ball_torsion(3))
    a = (2.0, 1.0, 0.5)
    want = volume(Ellipsoid(a)) / (5 * sum(x**-2 for x in a))
    assert torsion(Ellipsoid(a)).value == pytest.approx(want)


def test_ellipsoid_torsion_function_solves_poisson():
    a = np.array([2.0, 1.0, 0.5])
    x = np.array([[0.3, 0.2, 0.1]])
    h = 1e-3
    lap = sum((ellipsoid_torsion_function(a, x + h * e) - 2 * ellipsoid_torsion_function(a, x)
               + ellipsoid_torsion_function(a, x - h * e)) / h**2 for e in np.eye(3)[:, None, :])
    assert lap[0] == pytest.approx(-1.0, rel=1e-6)


def test_wos_cube_against_series():
    est = torsion(Box((0.5, 0.5, 0.5)), MCConfig(1, 40_000))
    assert abs(est.value - CUBE_T) < 4 * est.stderr
    est = torsion(box_polytope(Box((1.0, 0.5, 0.25))), MCConfig(2, 40_000))
    assert abs(est.value - BOX_T) < 4 * est.stderr


def test_euler_scheme_is_close():
    est = torsion(Box((0.5, 0.5, 0.5)), MCConfig(3, 2_000), method="euler")
    assert est.meta["scheme"] == "euler"
    assert abs(est.value - CUBE_T) < 4 * est.stderr + 0.05 * CUBE_T


def test_torsion_needs_seed_for_boxes():
    with pytest.raises(ShapeError):
        torsion(Box((1, 1, 1)))


def test_ball_functionals():
    assert ball_functional("G", None, 3) == pytest.approx(0.2)
    assert ball_functional("G_alpha", 0.0, 3) == pytest.approx(1 / (180 * math.pi), rel=1e-12)
    assert ball_functional("J_alpha", 1.0, 3) == pytest.approx(1 / 3)


def test_functional_argument_checks():
    with pytest.raises(ShapeError):
        functional("G_alpha", 2.5, Ball(1.0))
    with pytest.raises(ShapeError):
        functional("H_alpha", 0.5, Ball(1.0))
    with pytest.raises(ShapeError):
        check_theorem3(Ellipsoid((2, 1, 1)), 0.7)


def test_functional_error_propagation():
    from isocap.capacity import CapacityEstimate
    from isocap.torsion import TorsionEstimate

    v = functional_from_parts("G", None, 3, T=TorsionEstimate(1.0, "x", 0.03),
                              cap=CapacityEstimate(2.0, "hitting_mc", 0.08), vol=1.0, P=1.0)
    assert v.value == pytest.approx(2.0)
    assert v.stderr == pytest.approx(2.0 * 0.05)


def test_theorem4_disc_and_ellipses():
    assert theorem4_value(Ball(1.0, dim=2)) == pytest.approx(1 / (256 * math.pi**4), rel=1e-12)
    for a in ((2, 1), (4, 1)):
        reps = check_theorem4(Ellipsoid(a))
        assert all(r.passed for r in reps)


def test_theorem3_on_boxes_mc():
    reps = check_theorem3(Box((0.5, 0.3, 0.8)), (0.0, 0.3, 2 / 3), MCConfig(5, 20_000))
    assert all(r.passed for r in reps)


@settings(max_examples=30, deadline=None)
@given(axes)
def test_saint_venant_and_theorem3_on_ellipsoids(a):
    e = Ellipsoid(a)
    assert torsion(e).value <= saint_venant_bound(3) * volume(e) ** (5 / 3) * (1 + 1e-12)
    assert all(r.passed for r in check_theorem3(e, (0.0, 0.3, 2 / 3)))


@settings(max_examples=30, deadline=None)
@given(axes, st.floats(0.2, 5.0))
def test_torsion_scaling_and_invariance(a, t):
    e, et = Ellipsoid(a), Ellipsoid(tuple(t * x for x in a))
    assert torsion(et).value == pytest.approx(t**5 * torsion(e).value, rel=1e-12)
    g, gt = functional("G", None, e), functional("G", None, et)
    assert gt.value == pytest.approx(g.value, rel=1e-8)


def test_ball_capacity_consistency():
    # G(B) = T cap / |B|^2 with the capacity normalisation used throughout
    T, cap, v = ball_torsion(3), ball_capacity(3), volume(Ball(1.0))
    assert T * cap / v**2 == pytest.approx(0.2)
