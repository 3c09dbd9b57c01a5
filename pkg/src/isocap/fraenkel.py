"""Fraenkel asymmetry: distance of a body from the equal-volume balls.

    A(K) = min_c |K symdiff B(c)| / |B|,   |B| = |K|.

Because |K| = |B|, the symmetric difference is twice |B(c) minus K|, so the
objective is twice the fraction of a uniform sample of B(c) that misses K.
The same unit-ball sample is reused for every candidate centre (common random
numbers), which turns the objective into a deterministic function of c and
lets a simplex search converge.  By default the sample is a set of
directions and each ray's missed length is integrated exactly, so the
objective is also smooth in c.  For convex K the overlap |K cap B(c)| is
log-concave in c, so the problem is unimodal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ShapeError
from .geometry import (Ball, Box, Ellipsoid, ParallelQuery, Polytope, center, contains, distance, inradius, is_convex, omega,
                       perimeter, radial_extent, volume)
from .mc import MCConfig, stream, uniform_ball, unit_vectors

DEFAULT_SAMPLES = 200_000


@dataclass(frozen=True)
class AsymmetryResult:
    value: float
    center: tuple[float, ...]
    stderr: float
    n_samples: int

    def to_json(self) -> dict:
        return {"value": self.value, "center": list(self.center), "stderr": self.stderr,
                "n_samples": self.n_samples}


def _radial_ok(shape) -> bool:
    if isinstance(shape, ParallelQuery):
        return not isinstance(shape.base, Polytope)
    return is_convex(shape)


def symmetry_center(shape, tol: float = 1e-12) -> np.ndarray | None:
    """Centre of central symmetry, or None when there is none (or it is unknown)."""
    if isinstance(shape, ParallelQuery):
        return symmetry_center(shape.base, tol)
    if isinstance(shape, (Ball, Ellipsoid, Box)):
        return center(shape)
    if isinstance(shape, Polytope):
        c = shape.centroid
        pts = shape.points
        mirrored = 2.0 * c - pts
        gap = np.abs(mirrored[:, None, :] - pts[None, :, :]).max(-1).min(1).max()
        return c if gap <= tol * max(1.0, float(np.abs(pts).max())) else None
    return None


def asymmetry(shape, cfg: MCConfig, n_starts: int = 5, tol: float = 1e-4,
              method: str = "radial", n_search: int = 20_000) -> AsymmetryResult:
    """Fraenkel asymmetry by multi-start Nelder-Mead over the ball centre.

    For a centrally symmetric body the overlap |K cap B(c)| is a convolution
    of log-concave indicators, hence log-concave and even about the centre of
    symmetry, which is therefore the optimal centre; no search is run.

    Parameters
    ----------
    shape
        Convex body or parallel body with positive volume.
    cfg : MCConfig
        ``n_samples`` directions (``"radial"``) or ball points
        (``"hit_or_miss"``), shared by every evaluation.
    n_starts : int
        The centroid plus ``n_starts - 1`` random displacements of length
        inradius/2.
    tol : float
        Tolerance on the asymmetry value.
    method : {"radial", "hit_or_miss"}
        ``"radial"`` integrates the missed part of each ray of the ball
        exactly, ``(rho^d - rho_K(c, v)^d)_+ / rho^d``, which makes the
        objective smooth in ``c``.  ``"hit_or_miss"`` counts uniform ball
        points outside the body.  Parallel bodies of polytopes always use
        hit-or-miss.
    n_search : int
        The multi-start search uses the first ``n_search`` samples; the best
        centre is then polished with all of them.
    """
    vol = volume(shape)
    if not vol > 0:
        raise ShapeError("asymmetry needs a body of positive volume")
    if method not in ("radial", "hit_or_miss"):
        raise ValueError(f"unknown asymmetry method {method!r}")
    d = shape.dim
    rho = (vol / omega(d)) ** (1.0 / d)
    rng = stream(cfg.seed, 0)
    paired = method == "radial" and _radial_ok(shape)
    if paired:
        # antithetic pairs keep the sampled objective even for symmetric bodies
        half = unit_vectors(rng, (cfg.n_samples + 1) // 2, d)

        def samples(m):
            k = min(len(half), (m + 1) // 2)
            return np.concatenate([half[:k], -half[:k]])

        def per_sample(c, v):
            if not contains(shape, c):
                return None
            ext = np.minimum(radial_extent(shape, c, v), rho)
            return 1.0 - (ext / rho) ** d
    else:
        u = rho * uniform_ball(rng, cfg.n_samples, d)

        def samples(m):
            return u[:m]

        def per_sample(c, v):
            return (~contains(shape, v + c)).astype(float)

    def objective(v):
        def miss(c):
            g = per_sample(c, v)
            if g is None:  # centre left the body: push it back
                return 1.0 + float(distance(shape, c)) / rho
            return float(g.mean())
        return miss

    step = 0.5 * inradius(shape)
    size = max(0.5 * step, 1e-9)
    options = {"fatol": 0.5 * tol, "xatol": 1e-4 * step, "maxfev": 400 * d}

    def search(f, s):
        init = np.vstack([s, s + size * np.eye(d)])
        return minimize(f, s, method="Nelder-Mead", options={"initial_simplex": init, **options})

    full = samples(cfg.n_samples)
    best_c = symmetry_center(shape)
    if best_c is None:
        c0 = center(shape)
        dirs = stream(cfg.seed, 1).standard_normal((n_starts - 1, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        coarse = objective(samples(min(n_search, cfg.n_samples)))
        best_f, best_c = math.inf, c0
        for s in [c0] + [c0 + step * w for w in dirs]:
            res = search(coarse, s)
            if res.fun < best_f:
                best_f, best_c = float(res.fun), res.x
        if len(full) > n_search:
            size = max(0.1 * size, 1e-9)
            best_c = search(objective(full), best_c).x
    g = per_sample(np.asarray(best_c, dtype=float), full)
    value = 2.0 * float(g.mean())
    if paired:
        g = 0.5 * (g[: len(g) // 2] + g[len(g) // 2:])  # pairs are the independent units
    return AsymmetryResult(value, tuple(float(c) for c in best_c),
                           2.0 * float(g.std(ddof=1)) / math.sqrt(len(g)), len(full))


@dataclass(frozen=True)
class ContinuityRow:
    r: float
    a_r: float
    a_0: float
    bound: float
    passed: bool

    def to_json(self) -> dict:
        return {"r": self.r, "A(K_r)": self.a_r, "A(K)": self.a_0, "bound": self.bound, "passed": self.passed}


def asymmetry_continuity_check(shape, r_list, cfg: MCConfig) -> list[ContinuityRow]:
    """|A(K_r) - A(K)| <= 4 (|K_r| - |K|)/|K| + 6 stderr for every r."""
    if not is_convex(shape):
        raise ShapeError("continuity check needs a convex body")
    base = asymmetry(shape, cfg)
    vol = volume(shape)
    rows = []
    for r in r_list:
        q = ParallelQuery(shape, r)
        ar = asymmetry(q, cfg)
        bound = 4.0 * (volume(q) - vol) / vol + 6.0 * math.hypot(base.stderr, ar.stderr)
        rows.append(ContinuityRow(float(r), ar.value, base.value, bound,
                                  abs(ar.value - base.value) <= bound))
    return rows


def isoperimetric_deficit(shape) -> float:
    """P |K|^(-(d-1)/d) / (d omega_d^(1/d)) - 1, zero exactly for balls."""
    d = shape.dim
    return perimeter(shape, 0.0) * volume(shape) ** (-(d - 1.0) / d) / (d * omega(d) ** (1.0 / d)) - 1.0


def check_deficit(shape, c_d: float, cfg: MCConfig, result: AsymmetryResult | None = None):
    """Quantitative isoperimetric inequality: deficit >= c_d A^2 (within 3 sigma of A^2).

    Returns ``(deficit, c_d * A^2, passed)``.
    """
    a = result or asymmetry(shape, cfg)
    lhs = isoperimetric_deficit(shape)
    low = max(a.value - 3.0 * a.stderr, 0.0)
    return lhs, c_d * a.value**2, lhs >= c_d * low**2 - 1e-12
