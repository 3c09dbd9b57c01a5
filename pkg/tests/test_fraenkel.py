from __future__ import annotations

import numpy as np
import pytest

from isocap.errors import ShapeError
from isocap.fraenkel import (asymmetry, asymmetry_continuity_check, check_deficit, isoperimetric_deficit,
                             symmetry_center)
from isocap.geometry import Ball, Box, Ellipsoid, Polytope, box_polytope
from isocap.mc import MCConfig

# radial estimator with 2e5 directions at the centre of symmetry (independent
# hit-or-miss runs agree within their error bars)
CUBE_A = 0.3140
PROLATE_A = 0.5204


def test_ball_is_symmetric():
    a = asymmetry(Ball(1.3, dim=4), MCConfig(1, 2_000))
    assert a.value == 0.0


def test_cube_and_prolate_values():
    cube = asymmetry(Box((0.5, 0.5, 0.5)), MCConfig(2, 40_000))
    assert abs(cube.value - CUBE_A) < 4 * cube.stderr + 2e-3
    pro = asymmetry(Ellipsoid((2, 1, 1)), MCConfig(3, 40_000))
    assert abs(pro.value - PROLATE_A) < 4 * pro.stderr + 2e-3


def test_hit_or_miss_agrees_with_radial():
    e = Ellipsoid((2, 1, 1))
    r = asymmetry(e, MCConfig(4, 40_000))
    h = asymmetry(e, MCConfig(5, 100_000), method="hit_or_miss")
    assert abs(r.value - h.value) < 4 * np.hypot(r.stderr, h.stderr)


def test_symmetry_center_detection():
    assert np.allclose(symmetry_center(box_polytope(Box((1, 2, 3)))), 0)
    tetra = Polytope(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float))
    assert symmetry_center(tetra) is None


def test_search_finds_shifted_centre():
    # a box polytope translated off the origin: the centre of symmetry moves with it
    pts = box_polytope(Box((0.5, 0.5, 0.5))).points + np.array([0.3, -0.2, 0.1])
    a = asymmetry(Polytope(pts), MCConfig(6, 20_000))
    assert np.allclose(a.center, [0.3, -0.2, 0.1], atol=1e-9)
    assert abs(a.value - CUBE_A) < 4 * a.stderr + 2e-3


def test_search_on_asymmetric_polytope():
    tetra = Polytope(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float))
    a = asymmetry(tetra, MCConfig(7, 20_000))
    assert 0.3 < a.value < 1.2
    # the centre is near the centroid by symmetry of the simplex about x1=x2=x3
    assert np.ptp(a.center) < 0.02


def test_asymmetry_grows_with_elongation():
    values = [asymmetry(Ellipsoid((t, 1, 1)), MCConfig(8, 10_000)).value for t in (1.0, 2.0, 4.0)]
    assert values[0] < 1e-12 and values[0] < values[1] < values[2]


def test_continuity_check():
    rows = asymmetry_continuity_check(Ellipsoid((2, 1, 1)), [0.05, 0.2], MCConfig(9, 3_000))
    assert all(r.passed for r in rows)
    assert rows[-1].a_r < rows[0].a_0  # parallel bodies are rounder


def test_deficit_zero_for_balls_and_check():
    assert isoperimetric_deficit(Ball(2.0)) == pytest.approx(0, abs=1e-12)
    deficit, rhs, ok = check_deficit(Ellipsoid((2, 1, 1)), 0.01, MCConfig(10, 20_000))
    assert deficit > 0 and ok and rhs < deficit


def test_rejects_flat_bodies():
    with pytest.raises(ShapeError):
        asymmetry(Polytope(np.eye(3)), MCConfig(1, 100))
