"""One test per acceptance criterion, at the stated tolerance and time budget."""
from __future__ import annotations

import math
import time

import pytest

from isocap import bounds as B
from isocap.capacity import cap_ellipsoid
from isocap.corpus import build_corpus, random_ellipsoids
from isocap.fraenkel import asymmetry
from isocap.geometry import Ellipsoid, SegmentFamily, perimeter_mc
from isocap.mc import MCConfig
from isocap.sausage import SausageConfig, fit_slope, richardson, run_sausage
from isocap.verify import (VerifyOptions, suite_af, suite_ball_equalities, suite_properties, suite_scaling,
                           suite_theorem3, suite_theorem4)
from isocap.capacity import reference_capacity

SEED = 42


def _failures(res):
    return [c.to_json() for c in res.failures]


@pytest.mark.acceptance(1, "ball equalities of the perimeter-integral, mean-curvature and P^2/|K| bounds")
def test_ac01_ball_equalities():
    t0 = time.perf_counter()
    res = suite_ball_equalities(VerifyOptions(seed=SEED), tol=1e-6)
    elapsed = time.perf_counter() - t0
    assert len(res.checks) == 27
    assert res.passed, _failures(res)
    assert elapsed < 1.0


@pytest.mark.acceptance(2, "ellipsoid capacity against the prolate closed form and the sphere")
def test_ac02_ellipsoid_reference():
    t0 = time.perf_counter()
    closed = 8.0 * math.pi / ((1.0 / math.sqrt(3.0)) * math.log(7.0 + 4.0 * math.sqrt(3.0)))
    value = cap_ellipsoid(Ellipsoid((2.0, 1.0, 1.0))).value
    sphere = cap_ellipsoid(Ellipsoid((1.0, 1.0, 1.0))).value
    elapsed = time.perf_counter() - t0
    assert abs(value - closed) / closed < 1e-8
    assert abs(sphere - 4.0 * math.pi) / (4.0 * math.pi) < 1e-9
    assert elapsed < 1.0


@pytest.mark.acceptance(3, "dominance of every bound over 20 random ellipsoids, strict slack")
def test_ac03_dominance_random_ellipsoids():
    t0 = time.perf_counter()
    slacks = []
    for e in random_ellipsoids(SEED, n=20):
        cap = cap_ellipsoid(e).value
        values = [B.bound_perimeter_integral(e), B.bound_parallel_volume(e)[0],
                  B.bound_mean_curvature(e), B.bound_p2_over_v(e)]
        slacks += [v / cap for v in values]
    elapsed = time.perf_counter() - t0
    assert len(slacks) == 80
    assert min(slacks) > 1.0
    assert elapsed < 30.0


@pytest.mark.acceptance(4, "asymmetry-refined bound between reference capacity and P^2/|K| bound")
def test_ac04_refined_bound_ordering():
    t0 = time.perf_counter()
    corpus = build_corpus(SEED)
    failures = []
    for k, shape in enumerate(corpus.convex):
        ref = reference_capacity(shape, MCConfig(SEED + 100 + k, 100_000))
        a = asymmetry(shape, MCConfig(SEED + 500 + k, 200_000))
        p2v = B.bound_p2_over_v(shape)
        for c_d in (0.01, 0.1):
            value, _, _ = B.bound_fraenkel_refined(shape, B.BoundsConfig(c_d=c_d), asym=a)
            if not value <= p2v:
                failures.append(("above P^2/|K|", shape, c_d, value, p2v))
            if not value >= (ref.value - 3.0 * ref.stderr) * (1 - 1e-9):
                failures.append(("below capacity", shape, c_d, value, ref.value, ref.stderr))
    elapsed = time.perf_counter() - t0
    assert not failures, failures
    assert elapsed < 300.0


@pytest.mark.acceptance(5, "balls maximise G_alpha on ellipsoids and boxes; G_0(B_1) = 1/(180 pi)")
def test_ac05_theorem3():
    t0 = time.perf_counter()
    res = suite_theorem3(VerifyOptions(seed=SEED))
    elapsed = time.perf_counter() - t0
    assert len(res.checks) == 1 + 3 * 30
    assert res.passed, _failures(res)
    assert elapsed < 600.0


@pytest.mark.acceptance(6, "T cap / P^5 over ellipses is maximal at the disc = 1/(256 pi^4)")
def test_ac06_theorem4():
    res = suite_theorem4(VerifyOptions(seed=SEED))
    assert res.passed, _failures(res)
    disc = next(c for c in res.checks if c.name == "disc_value")
    assert abs(disc.value - 1.0 / (256.0 * math.pi**4)) * 256.0 * math.pi**4 < 1e-9


@pytest.mark.acceptance(7, "sausage slope d=5 eps=0.5 near pi^2, below 27 pi^2, stable under dt halving")
@pytest.mark.slow
def test_ac07_sausage():
    t0 = time.perf_counter()
    cfg = SausageConfig(5, 0.5, seed=SEED, t_max=20.0, dt=1e-3, n_paths=200)
    coarse = run_sausage(cfg)
    fine = run_sausage(cfg.halved())
    elapsed = time.perf_counter() - t0
    slope, se = fit_slope(coarse)
    target = math.pi**2
    assert abs(slope - target) / target < 0.10
    assert slope <= B.sausage_bound_ball(5, 0.5)
    assert abs(B.sausage_bound_ball(5, 0.5) - 27.0 * math.pi**2) < 1e-9
    check = richardson(coarse, fine)
    assert check.passed, check
    assert abs(check.slope_half - check.slope) < 2.0 * max(check.stderr, check.stderr_half)
    assert elapsed < 1800.0


@pytest.mark.acceptance(8, "K(1): bound 2pi/7, perimeter floors, perimeter integral above 2pi/7")
def test_ac08_segment_family():
    assert abs(B.kalpha_bound(1.0) - 2.0 * math.pi / 7.0) < 1e-12
    fam = SegmentFamily(1.0)
    for j, r in enumerate((0.01, 0.05, 0.2)):
        est = perimeter_mc(fam, r, MCConfig(SEED + j, 1_000_000))
        assert est.value >= B.kalpha_perimeter_floor(1.0, r) - 3.0 * est.stderr
    assert B.bound_perimeter_integral(fam) >= 2.0 * math.pi / 7.0


@pytest.mark.acceptance(9, "Aleksandrov-Fenchel on the corpus; cube Quermass vector")
def test_ac09_aleksandrov_fenchel():
    res = suite_af(VerifyOptions(seed=SEED), tol=1e-8)
    assert res.passed, _failures(res)
    assert len(res.checks) == len(build_corpus(SEED).convex) + 1


@pytest.mark.acceptance(10, "scaling laws, monotonicity on nested pairs, isocapacitary floor")
def test_ac10_property_suites():
    opts = VerifyOptions(seed=SEED)
    scaling = suite_scaling(opts)
    props = suite_properties(opts)
    assert scaling.passed, _failures(scaling)
    assert props.passed, _failures(props)
    names = {c.name for c in props.checks}
    assert {"cap monotone", "torsion monotone", "isocapacitary floor"} <= names
