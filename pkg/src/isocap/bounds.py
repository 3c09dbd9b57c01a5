"""Upper bounds on Newtonian capacity and the report that compares them.

For a compact K in R^d, d >= 3:

* perimeter integral:  cap(K) <= ( int_0^inf dt / P(K_t) )^(-1)
* parallel volume:     cap(K) <= inf_a |K_a| / a^2
* mean curvature:      cap(K) <= (d-2) M(K)          (convex K)
* perimeter/volume:    cap(K) <= (d-2) P^2 / (d |K|)  (convex K)
* asymmetry-refined:   the previous bound times 1 - gamma_d A(K)^2.

All of them are equalities for balls except the parallel-volume bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from . import segments
from .capacity import CapacityEstimate, ball_capacity, reference_capacity
from .errors import NumericalFailure, ShapeError
from .fraenkel import AsymmetryResult, asymmetry
from .geometry import (SegmentFamily, diameter, inradius, is_convex, omega, parallel_volume,
                       ParallelQuery, perimeter, shape_label, volume)
from .mc import MCConfig
from .quermass import mean_curvature_integral, quermass

BOUND_NAMES = ("perimeter_integral", "parallel_volume", "mean_curvature", "p2_over_v", "fraenkel_refined")


@dataclass(frozen=True)
class BoundsConfig:
    """Settings shared by the bound evaluations.

    ``c_d`` is the constant of the quantitative isoperimetric inequality; it
    has no default because only its existence is known.
    """

    c_d: float | None = None
    t_max_factor: float = 100.0
    quad_tol: float = 1e-10
    search_tol: float = 1e-10
    bracket: tuple[float, float] | None = None

    def __post_init__(self):
        if self.c_d is not None and not self.c_d > 0:
            raise ValueError("c_d must be positive")
        if not self.t_max_factor > 0:
            raise ValueError("t_max_factor must be positive")


def _need_d3(shape):
    if shape.dim < 3:
        raise ShapeError("capacity bounds need d >= 3")


# --------------------------------------------------------------------------
# perimeter integral

def _tail_shift(q) -> float:
    """Smallest s with P(K_t) <= d omega_d (t + s)^(d-1) coefficientwise."""
    d = q.d
    return max((q.w[k + 1] / omega(d)) ** (1.0 / (d - 1 - k)) for k in range(d - 1))


def perimeter_integral(shape, cfg: BoundsConfig = BoundsConfig()) -> tuple[float, dict]:
    """int_0^inf dt / P(K_t), evaluated so that the result never exceeds the truth
    for convex bodies (the tail is bounded from below) and returns metadata."""
    _need_d3(shape)
    d = shape.dim
    T = cfg.t_max_factor * diameter(shape)
    if isinstance(shape, SegmentFamily):
        return _segment_perimeter_integral(shape.alpha, T, cfg.quad_tol)
    if not is_convex(shape):
        raise ShapeError(f"perimeter integral unsupported for {type(shape).__name__}")
    q = quermass(shape)
    coef = np.polynomial.polynomial.polyder(q.steiner)
    body, err = quad(lambda t: 1.0 / np.polynomial.polynomial.polyval(t, coef), 0.0, T,
                     epsabs=0.0, epsrel=cfg.quad_tol, limit=500, points=[diameter(shape)])
    if err > 1e3 * cfg.quad_tol * body:
        raise NumericalFailure(f"perimeter-integral quadrature error {err:.2e}")
    s = _tail_shift(q)
    tail = 1.0 / (d * (d - 2) * omega(d) * (T + s) ** (d - 2))
    return body + tail, {"t_max": T, "tail": tail, "tail_shift": s, "quad_err": err,
                         "tail_rule": "lower bound from P(K_t) <= d omega_d (t+s)^(d-1)"}


def _segment_perimeter_integral(alpha: float, T: float, tol: float) -> tuple[float, dict]:
    # The infinite family: every finite truncation is a finite union of
    # segments, whose perimeter integral diverges at t = 0.
    r_star = kalpha_r_star(alpha)
    t_min = min(1e-4, r_star)
    beta = alpha / (alpha + 1.0)
    c = (2.0 * math.pi / 3.0) * (alpha / 2.0) ** (1.0 / (alpha + 1.0))
    head = t_min ** (1.0 - beta) / (c * (1.0 - beta))  # int_0^t_min dt / floor(t)

    # The infinite-sum truncation makes the integrand slightly rough, which
    # defeats adaptive error control; use panels of Gauss-Legendre in log t
    # and compare two orders instead.
    edges = np.linspace(math.log(t_min), math.log(T), 41)

    def panels(order):
        x, w = np.polynomial.legendre.leggauss(order)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            for s, ws in zip(0.5 * (hi - lo) * (x + 1.0) + lo, 0.5 * (hi - lo) * w):
                t = math.exp(s)
                total += ws * t / segments.parallel_perimeter(alpha, t, None)
        return total

    body = panels(12)
    err = abs(body - panels(8))
    if err > 1e-3 * body:
        raise NumericalFailure(f"segment-family perimeter integral unresolved (error {err:.2e})")
    body = float(body + err)
    tail = 1.0 / (4.0 * math.pi * T)  # P(K_t) >= 4 pi t^2 for t >= r*
    return head + body + tail, {"t_max": T, "t_min": t_min, "head": head, "tail": tail, "quad_err": err,
                                "tail_rule": "upper bounds from the perimeter floors near 0 and at infinity"}


def bound_perimeter_integral(shape, cfg: BoundsConfig = BoundsConfig()) -> float:
    return 1.0 / perimeter_integral(shape, cfg)[0]


# --------------------------------------------------------------------------
# parallel volume

def _volume_at(shape, a: float) -> float:
    if isinstance(shape, SegmentFamily):
        return segments.parallel_volume(shape.alpha, a, None)
    return parallel_volume(ParallelQuery(shape, a)).value


def inf_volume_ratio(shape, power: float, cfg: BoundsConfig = BoundsConfig()) -> tuple[float, float]:
    """min over a > 0 of |K_a| / a^power, by a log grid scan and golden section."""
    diam = diameter(shape)
    if cfg.bracket is not None:
        lo, hi = cfg.bracket
    else:
        rin = inradius(shape)
        lo, hi = (rin / 10.0 if rin > 0 else 1e-6 * diam), 10.0 * diam

    def f(s):
        a = math.exp(s)
        return math.log(_volume_at(shape, a)) - power * s

    grid = np.linspace(math.log(lo), math.log(hi), 81)
    vals = np.array([f(s) for s in grid])
    k = int(np.argmin(vals))
    if k == 0 or k == len(grid) - 1:
        raise NumericalFailure("minimiser of |K_a|/a^p sits on the search bracket")
    res = minimize_scalar(f, bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden",
                          tol=cfg.search_tol)
    a = math.exp(res.x)
    return math.exp(res.fun), a


def bound_parallel_volume(shape, cfg: BoundsConfig = BoundsConfig()) -> tuple[float, float]:
    """inf_a |K_a| / a^2 and the minimising a."""
    _need_d3(shape)
    return inf_volume_ratio(shape, 2.0, cfg)


# --------------------------------------------------------------------------
# convex bounds

def bound_mean_curvature(shape) -> float:
    _need_d3(shape)
    if not is_convex(shape):
        raise ShapeError("the mean-curvature bound needs a convex body")
    return (shape.dim - 2) * mean_curvature_integral(shape)


def bound_p2_over_v(shape) -> float:
    _need_d3(shape)
    if not is_convex(shape):
        raise ShapeError("the P^2/|K| bound needs a convex body")
    vol = volume(shape)
    if not vol > 0:
        raise ShapeError("the P^2/|K| bound needs positive volume")
    d = shape.dim
    return (d - 2) * perimeter(shape, 0.0) ** 2 / (d * vol)


def gamma_d(d: int, c_d: float) -> float:
    """Gamma(d+1)Gamma(d-1) / (Gamma(2d-2) + Gamma(d)Gamma(d-1)) * c_d / (1 + 4 d c_d)."""
    if c_d is None or not c_d > 0:
        raise ValueError("c_d must be a positive number")
    lg = gammaln
    num = lg(d + 1) + lg(d - 1)
    den = np.logaddexp(lg(2 * d - 2), lg(d) + lg(d - 1))
    return math.exp(num - den) * c_d / (1.0 + 4.0 * d * c_d)


def bound_fraenkel_refined(shape, cfg: BoundsConfig, mc: MCConfig | None = None,
                           asym: AsymmetryResult | None = None) -> tuple[float, float, AsymmetryResult]:
    """(d-2) P^2/(d|K|) (1 - gamma_d A^2); returns ``(value, gamma_d, asymmetry)``."""
    if cfg.c_d is None:
        raise ShapeError("the asymmetry-refined bound needs c_d")
    if asym is None:
        if mc is None:
            raise ShapeError("the asymmetry-refined bound needs a seeded MCConfig")
        asym = asymmetry(shape, mc)
    g = gamma_d(shape.dim, cfg.c_d)
    return bound_p2_over_v(shape) * (1.0 - g * asym.value**2), g, asym


# --------------------------------------------------------------------------
# segment family K(alpha)

def kalpha_bound(alpha: float) -> float:
    """Lower bound 4 pi alpha / (2^(alpha+2) + 3 alpha (alpha+1)) on the
    perimeter-integral bound of K(alpha)."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return 4.0 * math.pi * alpha / (2.0 ** (alpha + 2) + 3.0 * alpha * (alpha + 1))


def kalpha_r_star(alpha: float) -> float:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return alpha / 2.0 ** (alpha + 2)


def kalpha_perimeter_floor(alpha: float, r: float) -> float:
    """Pointwise lower bound on P(K(alpha)_r)."""
    if not r > 0:
        raise ValueError("r must be positive")
    if r >= kalpha_r_star(alpha):
        return 4.0 * math.pi * r * r
    return (2.0 * math.pi / 3.0) * (alpha / 2.0) ** (1.0 / (alpha + 1)) * r ** (alpha / (alpha + 1))


# --------------------------------------------------------------------------
# J_alpha on flat ellipsoids and sausage bounds

def jalpha_lower_ellipsoid(eps: float, alpha: float, d: int) -> float:
    """Lower bound on J_alpha of the ellipsoid with semi-axes (1,..,1,eps,eps)."""
    if not 0 < eps < 1 or not 0 < alpha < 1 or d < 3:
        raise ValueError("need 0 < eps < 1, 0 < alpha < 1 and d >= 3")
    w = omega(d)
    p = (d * alpha + d - 2.0) / (d - 1.0)
    return (d * w ** (1 + alpha) / (d * 2.0**d) ** p * eps ** ((d - 2.0) * (alpha - 1.0) / (d - 1.0))
            * math.sqrt(1.0 - eps * eps) / math.log(2.0 / eps))


def kappa(d: int) -> float:
    """Capacity of the closed unit ball."""
    return ball_capacity(d, 1.0)


def sausage_bound_ball(d: int, eps: float) -> float:
    """kappa_d (d-2)^(d-2) / (4 (d-4)^(d-4)) eps^(d-4)."""
    if d < 5:
        raise ShapeError("the sausage bounds need d >= 5")
    return kappa(d) * (d - 2.0) ** (d - 2) / (4.0 * (d - 4.0) ** (d - 4)) * eps ** (d - 4)


def sausage_bound_ball_numeric(d: int, eps: float, tol: float = 1e-10) -> tuple[float, float]:
    """Same bound by minimising kappa_d (a+eps)^(d-2) / a^2 over a numerically.

    The minimiser is a = 2 eps / (d-4).
    """
    if d < 5:
        raise ShapeError("the sausage bounds need d >= 5")

    def f(s):
        a = math.exp(s)
        return math.log(kappa(d)) + (d - 2) * math.log(a + eps) - 2.0 * s

    guess = math.log(eps)
    res = minimize_scalar(f, bracket=(guess - 3.0, guess, guess + 3.0), method="golden", tol=tol)
    return math.exp(res.fun), math.exp(res.x)


def sausage_bound_general(shape, cfg: BoundsConfig = BoundsConfig()) -> float:
    """16 inf_c |K_c| / c^4."""
    if shape.dim < 5:
        raise ShapeError("the sausage bounds need d >= 5")
    m, _ = inf_volume_ratio(shape, 4.0, cfg)
    return 16.0 * m


def sausage_bounds(d: int, eps: float | None = None, shape=None,
                   cfg: BoundsConfig = BoundsConfig()) -> dict:
    """Both sausage-rate bounds for a ball of radius ``eps`` or a given shape."""
    if d < 5:
        raise ShapeError("the sausage bounds need d >= 5")
    from .geometry import Ball

    if shape is None:
        if eps is None:
            raise ValueError("give eps or a shape")
        shape = Ball(eps, dim=d)
    out = {"general": sausage_bound_general(shape, cfg)}
    if eps is not None:
        out["ball"] = sausage_bound_ball(d, eps)
        out["ball_numeric"], out["ball_argmin"] = sausage_bound_ball_numeric(d, eps)
    return out


# --------------------------------------------------------------------------
# report

@dataclass
class BoundReport:
    shape_id: str
    reference: CapacityEstimate
    bounds: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def slack(self, name: str) -> float:
        ref = self.reference.value
        return self.bounds[name] / ref if ref > 0 else math.inf

    def dominance(self, sigmas: float = 3.0) -> dict:
        """name -> True when the bound is at least reference - sigmas * stderr."""
        low = self.reference.value - sigmas * self.reference.stderr
        return {k: v >= low * (1 - 1e-9) for k, v in self.bounds.items()}

    def rows(self) -> list[dict]:
        return [{"shape": self.shape_id, "bound": k, "value": v, "reference": self.reference.value,
                 "stderr": self.reference.stderr, "slack": self.slack(k),
                 "method": self.reference.method, "seed": self.reference.meta.get("seed", "")}
                for k, v in self.bounds.items()]

    def to_json(self) -> dict:
        return {"shape": self.shape_id, "reference": self.reference.to_json(), "bounds": dict(self.bounds),
                "slack": {k: self.slack(k) for k in self.bounds}, **self.meta}


def bound_report(shape, cfg: BoundsConfig = BoundsConfig(), mc: MCConfig | None = None,
                 reference: CapacityEstimate | None = None, refined: bool | None = None,
                 asym: AsymmetryResult | None = None) -> BoundReport:
    """All bounds applicable to ``shape`` next to its reference capacity.

    ``refined`` defaults to "whenever ``cfg.c_d`` is set".
    """
    _need_d3(shape)
    ref = reference or reference_capacity(shape, mc)
    rep = BoundReport(shape_label(shape), ref)
    integral, meta = perimeter_integral(shape, cfg)
    rep.bounds["perimeter_integral"] = 1.0 / integral
    rep.meta["perimeter_integral"] = meta
    value, a = bound_parallel_volume(shape, cfg)
    rep.bounds["parallel_volume"] = value
    rep.meta["parallel_volume_argmin"] = a
    if is_convex(shape):
        rep.bounds["mean_curvature"] = bound_mean_curvature(shape)
        rep.bounds["p2_over_v"] = bound_p2_over_v(shape)
        if refined is None:
            refined = cfg.c_d is not None
        if refined:
            value, g, a_res = bound_fraenkel_refined(shape, cfg, mc, asym)
            rep.bounds["fraenkel_refined"] = value
            rep.meta.update(gamma_d=g, c_d=cfg.c_d, asymmetry=a_res.to_json())
    if ref.meta.get("polar"):
        rep.meta["capacity_zero"] = True
    rep.meta["kappa_d"] = "cap of the closed unit ball"
    return rep
