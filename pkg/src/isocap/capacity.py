"""Reference values of Newtonian capacity (d >= 3) and logarithmic capacity (d = 2).

Normalisation: cap(K) is the Dirichlet energy of the equilibrium potential,
so cap(B_R) = (d-2) d omega_d R^(d-2).  Brownian motion runs with generator
Laplacian (coordinate variance 2t), under which the expected sausage volume
grows like cap(K) t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import NumericalFailure, ShapeError
from .geometry import (Ball, Box, Ellipsoid, Polytope, SegmentFamily, center, circumradius,
                       exterior_step, omega)
from .mc import MCConfig, binomial_stderr, map_chunks, stream, unit_vectors

METHODS = ("exact", "quadrature", "sausage_mc", "hitting_mc")


@dataclass(frozen=True)
class CapacityEstimate:
    value: float
    method: str
    stderr: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown capacity method {self.method!r}")
        if self.value < 0 or (self.value == 0 and not self.meta.get("polar")):
            raise ValueError("capacity must be positive unless tagged polar")

    @property
    def is_mc(self) -> bool:
        return self.method.endswith("_mc")

    def to_json(self) -> dict:
        return {"value": self.value, "method": self.method, "stderr": self.stderr, **self.meta}


def ball_capacity(d: int, radius: float = 1.0) -> float:
    """(d-2) d omega_d R^(d-2); equals kappa_d for the unit ball."""
    if d < 3:
        raise ShapeError("Newtonian capacity needs d >= 3")
    return (d - 2) * d * omega(d) * radius ** (d - 2)


def cap_exact(shape) -> CapacityEstimate:
    """Closed forms: balls in d >= 3, discs and ellipses (logarithmic) in d = 2,
    and the polar segment family (capacity zero)."""
    if isinstance(shape, SegmentFamily):
        return CapacityEstimate(0.0, "exact", meta={"polar": True})
    if shape.dim == 2:
        if isinstance(shape, Ball):
            return CapacityEstimate(shape.radius, "exact", meta={"logarithmic": True})
        if isinstance(shape, Ellipsoid):
            return CapacityEstimate(0.5 * sum(shape.semi_axes), "exact", meta={"logarithmic": True})
    elif isinstance(shape, Ball):
        return CapacityEstimate(ball_capacity(shape.dim, shape.radius), "exact")
    raise ShapeError(f"no closed-form capacity for {type(shape).__name__} in d={shape.dim}")


def ellipsoid_integral(a, tol: float = 1e-10) -> tuple[float, float]:
    """int_0^inf prod (a_i^2 + t)^(-1/2) dt and its absolute error estimate.

    Uses t = m (u / (1-u))^2 with m the smallest a_i^2, which maps the half
    line to (0, 1) and leaves a bounded integrand for d >= 3.
    """
    a2 = np.asarray(a, dtype=float) ** 2
    m = float(a2.min())

    def integrand(u):
        if u >= 1.0:
            return 2.0 / math.sqrt(m) if len(a2) == 3 else 0.0  # limit as u -> 1
        s = u / (1.0 - u)
        t = m * s * s
        return float(np.prod(a2 + t) ** -0.5) * 2.0 * m * s / (1.0 - u) ** 2

    val, err = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=tol, limit=200)
    return val, err


def cap_ellipsoid(shape: Ellipsoid, tol: float = 1e-10) -> CapacityEstimate:
    """cap(E) = 2 d omega_d / e(a) by adaptive quadrature."""
    d = shape.dim
    if d < 3:
        raise ShapeError("cap_ellipsoid needs d >= 3; use cap_exact for ellipses")
    if not tol > 0:
        raise ValueError("tol must be positive")
    e, err = ellipsoid_integral(shape.semi_axes, tol)
    if not (e > 0 and err <= tol * e):
        raise NumericalFailure(f"ellipsoid quadrature error {err:.2e} above tolerance")
    return CapacityEstimate(2.0 * d * omega(d) / e, "quadrature", meta={"tol": tol})


def _harmonic_return(rng, x, rho):
    """Points on the sphere |y| = rho hit by Brownian motion started at exterior x.

    The exterior hitting density is proportional to |x - y|^(-d); proposals
    uniform on the sphere are accepted with probability ((|x|-rho)/|x-y|)^d.
    """
    n, d = x.shape
    out = np.empty_like(x)
    todo = np.arange(n)
    near = np.linalg.norm(x, axis=1) - rho
    while todo.size:
        y = rho * unit_vectors(rng, todo.size, d)
        ratio = near[todo] / np.linalg.norm(x[todo] - y, axis=1)
        ok = rng.random(todo.size) < ratio**d
        out[todo[ok]] = y[ok]
        todo = todo[~ok]
    return out


def _hitting_chunk(shape, rho0, delta, max_steps, seed, k, m):
    rng = stream(seed, k)
    d = shape.dim
    c = center(shape)
    far = 4.0 * rho0
    x = rho0 * unit_vectors(rng, m, d)  # coordinates relative to c
    alive = np.ones(m, dtype=bool)
    hits = 0
    for _ in range(max_steps):
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            return hits
        xi = x[idx]
        radius = np.linalg.norm(xi, axis=1)
        out = radius > far
        if np.any(out):
            back = rng.random(np.count_nonzero(out)) < (rho0 / radius[out]) ** (d - 2)
            gone = idx[out][~back]
            alive[gone] = False
            ret = idx[out][back]
            if ret.size:
                x[ret] = _harmonic_return(rng, x[ret], rho0)
            idx = idx[~out]
            if idx.size == 0:
                continue
            xi = x[idx]
        step = exterior_step(shape, xi + c)
        absorbed = step < delta
        hits += int(np.count_nonzero(absorbed))
        alive[idx[absorbed]] = False
        move = idx[~absorbed]
        x[move] += step[~absorbed, None] * unit_vectors(rng, move.size, d)
    raise NumericalFailure("walk-on-spheres walkers not absorbed within the step budget")


def cap_hitting_mc(shape, cfg: MCConfig, max_steps: int = 20_000) -> CapacityEstimate:
    """Walk-on-spheres estimate of the Newtonian capacity.

    Walkers start uniformly on the sphere of radius rho0 = 2 circumradius about
    the centre; the fraction that hit K before escaping to infinity equals
    cap(K) / cap(B_rho0).  Walkers beyond 4 rho0 escape with the exact
    probability 1 - (rho0/|x|)^(d-2) and otherwise re-enter on the start
    sphere according to the exterior hitting law.
    """
    d = shape.dim
    if d < 3:
        raise ShapeError("hitting estimator needs d >= 3")
    if not isinstance(shape, (Ball, Ellipsoid, Box, Polytope)):
        raise ShapeError(f"hitting estimator does not support {type(shape).__name__}")
    R = circumradius(shape)
    rho0 = 2.0 * R
    delta = 1e-6 * R
    args = [(shape, rho0, delta, max_steps, cfg.seed, k, m) for k, m in enumerate(cfg.chunks())]
    hits = sum(map_chunks(_hitting_chunk, args, cfg.workers))
    n = cfg.n_samples
    p = hits / n
    if hits == 0:
        raise NumericalFailure("no walker hit the body; increase n_samples")
    scale = ball_capacity(d, rho0)
    return CapacityEstimate(scale * p, "hitting_mc", scale * binomial_stderr(p, n),
                            meta={"n_walkers": n, "seed": cfg.seed, "delta": delta, "rho0": rho0})


def cap_from_sausage(run, burn_in: float = 0.2) -> CapacityEstimate:
    """Slope of the mean sausage volume against time (see ``sausage.fit_slope``)."""
    from .sausage import fit_slope

    slope, se = fit_slope(run, burn_in=burn_in)
    return CapacityEstimate(slope, "sausage_mc", se,
                            meta={"n_paths": run.n_paths, "dt": run.dt, "seed": run.seed})


def reference_capacity(shape, cfg: MCConfig | None = None, tol: float = 1e-10) -> CapacityEstimate:
    """Best available capacity: closed form, quadrature, or walk-on-spheres."""
    if isinstance(shape, SegmentFamily) or isinstance(shape, Ball) or shape.dim == 2:
        return cap_exact(shape)
    if isinstance(shape, Ellipsoid):
        return cap_ellipsoid(shape, tol)
    if cfg is None:
        raise ShapeError(f"capacity of a {type(shape).__name__} needs a seeded MCConfig")
    return cap_hitting_mc(shape, cfg)


def isocapacitary_floor(d: int, vol: float) -> float:
    """Smallest capacity of a body of volume ``vol`` (attained by balls)."""
    return (d - 2) * d * omega(d) ** (2.0 / d) * vol ** ((d - 2.0) / d)
