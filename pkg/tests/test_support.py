from __future__ import annotations

import math

import numpy as np
import pytest

from isocap import segments
from isocap.corpus import build_corpus, random_polytopes
from isocap.errors import ShapeError
from isocap.geometry import Ball, Ellipsoid, Polytope
from isocap.mc import MCConfig, binomial_stderr, map_chunks, mean_stderr, stream, uniform_ball
from isocap.verify import SUITES, VerifyOptions, run_suite


def _draw(seed, key):
    return stream(seed, key).random(3)


def test_streams_are_deterministic_and_distinct():
    assert np.array_equal(stream(1, 2).random(5), stream(1, 2).random(5))
    assert not np.array_equal(stream(1, 2).random(5), stream(1, 3).random(5))
    assert not np.array_equal(stream(1).random(5), stream(2).random(5))


def test_map_chunks_order_and_workers():
    args = [(4, k) for k in range(5)]
    serial = map_chunks(_draw, args)
    assert all(np.array_equal(a, b) for a, b in zip(serial, map_chunks(_draw, args, workers=2)))


def test_mcconfig():
    assert MCConfig(0, 10, chunk_size=4).chunks() == [4, 4, 2]
    assert MCConfig(0, 8, chunk_size=4).with_samples(9).chunks() == [4, 4, 1]
    for bad in (dict(seed=None), dict(seed=1.5), dict(seed=0, n_samples=0), dict(seed=0, workers=0)):
        with pytest.raises(ValueError):
            MCConfig(**bad)


def test_small_statistics_helpers():
    assert mean_stderr(np.array([1.0, 3.0])) == pytest.approx((2.0, 1.0))
    assert mean_stderr(np.array([5.0]))[1] == math.inf
    assert binomial_stderr(0.5, 100) == pytest.approx(0.05)
    x = uniform_ball(stream(0), 40_000, 4)
    assert np.all(np.linalg.norm(x, axis=1) <= 1)
    # E|x|^2 = d / (d + 2) for the uniform ball
    assert (x**2).sum(1).mean() == pytest.approx(4 / 6, rel=0.01)


def test_corpus_is_seeded():
    a, b = build_corpus(1), build_corpus(1)
    assert [e.semi_axes for e in a.ellipsoids] == [e.semi_axes for e in b.ellipsoids]
    assert len(a.ellipsoids) == 20 and len(a.segment_families) == 3
    assert {s.dim for s in a.balls} == {3, 4, 5}
    assert all(isinstance(s, (Ball, Ellipsoid)) or s.dim == 3 for s in a.convex)
    first, again = random_polytopes(3, n=2), random_polytopes(3, n=2)
    assert all(np.array_equal(np.asarray(p.vertices), np.asarray(q.vertices)) for p, q in zip(first, again))
    assert all(isinstance(p, Polytope) for p in a.polytopes)


def test_segment_sections_against_sampling():
    alpha, rho, n = 1.0, 0.05, 30
    c = segments.centers(alpha, n)
    rng = stream(9)
    lo, hi = np.array([-rho, -rho]), np.array([1 + rho, rho])
    x = lo + (hi - lo) * rng.random((400_000, 2))
    inside = (np.abs(x[:, 0, None] - c[None, :]) ** 2 + x[:, 1, None] ** 2 <= rho**2).any(1)
    box = float(np.prod(hi - lo))
    p = inside.mean()
    want = segments.section_area(alpha, rho, n)
    assert abs(box * p - want) < 4 * box * binomial_stderr(p, len(x))


def test_infinite_family_is_limit_of_truncations():
    for alpha in (0.5, 1.0, 2.0):
        inf = segments.section_area(alpha, 0.01)
        big = segments.section_area(alpha, 0.01, 200_000)
        assert big == pytest.approx(inf, rel=1e-4)
        assert segments.section_length(alpha, 0.01, 200_000) == pytest.approx(segments.section_length(alpha, 0.01),
                                                                                rel=1e-3)


def test_perimeter_is_derivative_of_parallel_volume():
    alpha, r, h = 1.0, 0.03, 1e-5
    dv = (segments.parallel_volume(alpha, r + h) - segments.parallel_volume(alpha, r - h)) / (2 * h)
    assert segments.parallel_perimeter(alpha, r) == pytest.approx(dv, rel=1e-3)


def test_distance_to_truncated_family():
    x = np.array([[0.5, 0.0, 0.5], [0.75, 0.0, 2.0], [2.0, 1.0, 0.5]])
    d = segments.distance(1.0, 3, x)
    # centres 0, 1/3, 1/2, 1
    assert d == pytest.approx([0.0, math.hypot(0.25, 1.0), math.hypot(1.0, 1.0)])


@pytest.mark.parametrize("name", ["ball-equalities", "theorem4", "scaling"])
def test_fast_verify_suites(name):
    res = run_suite(name, VerifyOptions(seed=1))
    assert res.passed and res.checks
    assert res.to_json()["passed"]


def test_suite_registry():
    assert {"ball-equalities", "af", "dominance", "theorem3", "theorem4", "prop1", "prop3", "scaling"} <= set(SUITES)
    with pytest.raises(ShapeError):
        run_suite("nope", VerifyOptions())
