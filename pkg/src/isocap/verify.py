"""Verification suites: each runs one family of inequalities over the corpus.

A suite returns a ``SuiteResult`` holding one ``Check`` per comparison.  A
check passes when the inequality (or equality) holds within the stated
tolerance; Monte Carlo comparisons allow three standard errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


from . import bounds as B
from .capacity import ball_capacity, isocapacitary_floor, reference_capacity
from .corpus import Corpus, build_corpus
from .errors import ShapeError
from .fraenkel import DEFAULT_SAMPLES
from .geometry import Ball, Box, Ellipsoid, SegmentFamily, perimeter, perimeter_mc, scaled, shape_label, volume
from .mc import MCConfig
from .quermass import af_check, quermass
from .torsion import ball_functional, check_theorem3, check_theorem4, theorem4_value, torsion


@dataclass
class Check:
    name: str
    shape: str
    value: float
    reference: float
    passed: bool
    stderr: float = 0.0
    detail: str = ""

    def to_json(self) -> dict:
        return {"check": self.name, "shape": self.shape, "value": self.value, "reference": self.reference,
                "stderr": self.stderr, "passed": bool(self.passed), "detail": self.detail}


@dataclass
class SuiteResult:
    suite: str
    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def add(self, *args, **kw) -> Check:
        c = Check(*args, **kw)
        self.checks.append(c)
        return c

    def to_json(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "n_checks": len(self.checks),
                "failures": [c.to_json() for c in self.failures],
                "checks": [c.to_json() for c in self.checks], **self.meta}


@dataclass(frozen=True)
class VerifyOptions:
    """Knobs shared by the suites.

    ``n_samples`` is the walker count of Monte Carlo capacities and torsions;
    ``asym_samples`` the direction count of asymmetries.
    """

    seed: int = 42
    c_d: float | None = None
    alphas: tuple[float, ...] | None = None
    n_samples: int = 100_000
    asym_samples: int = DEFAULT_SAMPLES
    workers: int = 1
    sausage_paths: int = 200
    sausage_t_max: float = 20.0
    sausage_dt: float = 1e-3
    sausage_points: int = 20_000
    sausage_halving: bool = True

    def mc(self, key: int = 0) -> MCConfig:
        return MCConfig(self.seed + key, self.n_samples, self.workers)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


# --------------------------------------------------------------------------

def suite_ball_equalities(opts: VerifyOptions, corpus: Corpus | None = None, tol: float = 1e-6) -> SuiteResult:
    res = SuiteResult("ball-equalities")
    for d in (3, 4, 5):
        for R in (0.5, 1.0, 2.0):
            ball = Ball(R, dim=d)
            cap = ball_capacity(d, R)
            for name, value in (("perimeter_integral", B.bound_perimeter_integral(ball)),
                                ("mean_curvature", B.bound_mean_curvature(ball)),
                                ("p2_over_v", B.bound_p2_over_v(ball))):
                res.add(name, shape_label(ball), value, cap, _rel(value, cap) < tol)
    return res


def suite_af(opts: VerifyOptions, corpus: Corpus | None = None, tol: float = 1e-8) -> SuiteResult:
    corpus = corpus or build_corpus(opts.seed)
    res = SuiteResult("af")
    for shape in corpus.convex:
        rep = af_check(quermass(shape), tol)
        res.add("af_min_log_slack", shape_label(shape), rep.min_slack, -tol, rep.passed,
                detail=f"triple {rep.triple}")
    cube = quermass(Box((0.5, 0.5, 0.5)))
    want = (1.0, 2.0, math.pi, 4.0 * math.pi / 3.0)
    err = max(abs(w - x) for w, x in zip(cube.w, want))
    res.add("cube_quermass", "box(0.5,0.5,0.5)", err, 0.0, err < 1e-6, detail=str(list(cube.w)))
    return res


def _reference(shape, opts: VerifyOptions, key: int):
    return reference_capacity(shape, opts.mc(key))


def suite_dominance(opts: VerifyOptions, corpus: Corpus | None = None) -> SuiteResult:
    """Every bound at least the reference capacity; convex bounds ordered.

    The asymmetry-refined bound is included when ``opts.c_d`` is set.
    """
    corpus = corpus or build_corpus(opts.seed)
    res = SuiteResult("dominance", meta={"c_d": opts.c_d})
    cfg = B.BoundsConfig(c_d=opts.c_d)
    for k, shape in enumerate(corpus.all):
        ref = _reference(shape, opts, 100 + k)
        asym_cfg = MCConfig(opts.seed + 500 + k, opts.asym_samples, opts.workers)
        rep = B.bound_report(shape, cfg, asym_cfg, reference=ref)
        low = (ref.value - 3.0 * ref.stderr) * (1 - 1e-9)  # equality cases at round-off
        label = rep.shape_id
        for name, value in rep.bounds.items():
            res.add(f"{name}>=cap", label, value, ref.value, value >= low, ref.stderr)
            if isinstance(shape, Ellipsoid) and len(set(shape.semi_axes)) > 1:
                res.add(f"{name}/cap>1", label, value / ref.value, 1.0, value > ref.value)
        if "p2_over_v" in rep.bounds:
            p2v = rep.bounds["p2_over_v"]
            mc_ = rep.bounds["mean_curvature"]
            res.add("mean_curvature<=p2_over_v", label, mc_, p2v, mc_ <= p2v * (1 + 1e-9))
            if "fraenkel_refined" in rep.bounds:
                fr = rep.bounds["fraenkel_refined"]
                res.add("fraenkel_refined<=p2_over_v", label, fr, p2v, fr <= p2v)
    return res


def suite_theorem3(opts: VerifyOptions, corpus: Corpus | None = None) -> SuiteResult:
    corpus = corpus or build_corpus(opts.seed)
    res = SuiteResult("theorem3")
    g0 = ball_functional("G_alpha", 0.0, 3)
    ref = 1.0 / (180.0 * math.pi)
    res.add("G_0(B_1)", "ball(d=3,R=1)", g0, ref, _rel(g0, ref) < 1e-9)
    for k, shape in enumerate(corpus.ellipsoids + corpus.boxes):
        d = shape.dim
        alphas = opts.alphas if opts.alphas is not None else (0.0, 0.3, 2.0 / d)
        for rep in check_theorem3(shape, alphas, opts.mc(200 + k)):
            res.add(rep.name, shape_label(shape), rep.value, rep.reference, rep.passed, rep.stderr)
    return res


def suite_theorem4(opts: VerifyOptions, corpus: Corpus | None = None) -> SuiteResult:
    res = SuiteResult("theorem4")
    disc = theorem4_value(Ball(1.0, dim=2))
    want = 1.0 / (256.0 * math.pi**4)
    res.add("disc_value", "disc", disc, want, _rel(disc, want) < 1e-9)
    values = {}
    for a in ((1.0, 1.0), (2.0, 1.0), (4.0, 1.0)):
        e = Ellipsoid(a)
        for rep in check_theorem4(e):
            res.add(rep.name, shape_label(e), rep.value, rep.reference, rep.passed)
        values[a] = theorem4_value(e)
    best = max(values, key=values.get)
    res.add("maximal_at_disc", "ellipses", values[best], disc, best == (1.0, 1.0),
            detail=str({str(k): v for k, v in values.items()}))
    return res


PROP1_RADII = (0.01, 0.05, 0.2)


def suite_prop1(opts: VerifyOptions, corpus: Corpus | None = None, alphas=(0.5, 1.0, 2.0)) -> SuiteResult:
    res = SuiteResult("prop1")
    v = B.kalpha_bound(1.0)
    res.add("kalpha_bound(1)=2pi/7", "K(1)", v, 2 * math.pi / 7, abs(v - 2 * math.pi / 7) < 1e-12)
    for i, a in enumerate(alphas):
        fam = SegmentFamily(a)
        value = B.bound_perimeter_integral(fam)
        res.add("perimeter_integral>=kalpha_bound", shape_label(fam), value, B.kalpha_bound(a),
                value >= B.kalpha_bound(a))
        for j, r in enumerate(PROP1_RADII):
            est = perimeter_mc(fam, r, MCConfig(opts.seed + 300 + 10 * i + j, 1_000_000, opts.workers))
            floor = B.kalpha_perimeter_floor(a, r)
            res.add(f"P(K_r)>=floor r={r:g}", shape_label(fam), est.value, floor,
                    est.value >= floor - 3.0 * est.stderr, est.stderr)
    return res


def suite_prop3(opts: VerifyOptions, corpus: Corpus | None = None, d: int = 5, eps: float = 0.5) -> SuiteResult:
    from .sausage import SausageConfig, check_prop3, richardson, run_sausage

    res = SuiteResult("prop3")
    cfg = SausageConfig(d, eps, opts.seed, t_max=opts.sausage_t_max, dt=opts.sausage_dt,
                        n_paths=opts.sausage_paths, n_points=opts.sausage_points, workers=opts.workers)
    run = run_sausage(cfg)
    rep = check_prop3(run)
    label = f"sausage(d={d},eps={eps:g})"
    res.add("slope<=bound", label, rep.slope, min(rep.bound_general, rep.bound_ball), rep.upper_ok, rep.stderr)
    res.add("slope>=cap", label, rep.slope, rep.capacity, rep.lower_ok, rep.stderr)
    res.add("slope~cap(10%)", label, rep.slope, rep.capacity, _rel(rep.slope, rep.capacity) < 0.1, rep.stderr)
    res.meta["prop3"] = rep.to_json()
    if opts.sausage_halving:
        fine = run_sausage(cfg.halved())
        dt = richardson(run, fine)
        res.add("dt_halving<2se", label, dt.slope_half, dt.slope, dt.passed, max(dt.stderr, dt.stderr_half),
                detail=f"extrapolated {dt.extrapolated:.6g}")
        res.meta["dt_check"] = dt.to_json()
    return res


def suite_scaling(opts: VerifyOptions, corpus: Corpus | None = None) -> SuiteResult:
    """Homogeneity of capacity, torsion, perimeter, Quermass integrals and bounds
    under dilation, checked on closed forms."""
    corpus = corpus or build_corpus(opts.seed)
    res = SuiteResult("scaling")
    shapes = corpus.balls + corpus.ellipsoids[:5] + corpus.boxes[:3]
    for t in (0.5, 3.0):
        for shape in shapes:
            d = shape.dim
            big = scaled(shape, t)
            label = shape_label(shape)

            def law(name, f, power, tol=1e-8):
                a, b = f(big), f(shape) * t**power
                res.add(f"{name} t={t:g}", label, a, b, _rel(a, b) < tol)

            if not isinstance(shape, Box):
                law("cap", lambda s: reference_capacity(s).value, d - 2)
                law("torsion", lambda s: torsion(s).value, d + 2)
            law("perimeter", lambda s: perimeter(s), d - 1)
            for k in range(d + 1):
                law(f"W_{k}", lambda s, k=k: quermass(s).w[k], d - k, 1e-7)
            law("p2_over_v", B.bound_p2_over_v, d - 2)
            law("mean_curvature", B.bound_mean_curvature, d - 2, 1e-7)
            law("perimeter_integral", B.bound_perimeter_integral, d - 2, 1e-7)
    return res


def suite_properties(opts: VerifyOptions, corpus: Corpus | None = None) -> SuiteResult:
    """Monotonicity of capacity and torsion on nested pairs, and the
    isocapacitary floor on every capacity estimate."""
    corpus = corpus or build_corpus(opts.seed)
    res = SuiteResult("properties")
    pairs = [
        (Ellipsoid((1.0, 1.0, 0.5)), Ellipsoid((1.2, 1.0, 0.8))),
        (Ball(1.0), Ellipsoid((2.0, 1.0, 1.0))),
        (Box((0.5, 0.5, 0.5)), Box((0.6, 0.5, 0.5))),
        (Ball(0.5), Box((0.5, 0.5, 0.5))),
        (Box((0.3, 0.3, 0.3)), Ball(0.6)),
    ]
    for k, (small, large) in enumerate(pairs):
        cs, cl = _reference(small, opts, 400 + 2 * k), _reference(large, opts, 401 + 2 * k)
        se = math.hypot(cs.stderr, cl.stderr)
        label = f"{shape_label(small)}<{shape_label(large)}"
        res.add("cap monotone", label, cs.value, cl.value, cs.value <= cl.value + 3 * se, se)
        ts, tl = torsion(small, opts.mc(450 + 2 * k)), torsion(large, opts.mc(451 + 2 * k))
        se = math.hypot(ts.stderr, tl.stderr)
        res.add("torsion monotone", label, ts.value, tl.value, ts.value <= tl.value + 3 * se, se)
    for k, shape in enumerate(corpus.convex):
        ref = _reference(shape, opts, 100 + k)
        floor = isocapacitary_floor(shape.dim, volume(shape))
        tight = isinstance(shape, Ball)
        ok = (_rel(ref.value, floor) < 1e-9) if tight else ref.value >= floor - 3 * ref.stderr
        res.add("isocapacitary floor", shape_label(shape), ref.value, floor, ok, ref.stderr)
    return res


SUITES = {
    "ball-equalities": suite_ball_equalities,
    "af": suite_af,
    "dominance": suite_dominance,
    "theorem3": suite_theorem3,
    "theorem4": suite_theorem4,
    "prop1": suite_prop1,
    "prop3": suite_prop3,
    "scaling": suite_scaling,
    "properties": suite_properties,
}


def run_suite(name: str, opts: VerifyOptions = VerifyOptions(), corpus: Corpus | None = None) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ShapeError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    return fn(opts, corpus)
