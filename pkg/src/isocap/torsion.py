"""Torsional rigidity and the scale-invariant shape functionals built from it.

The torsion function solves -Lap v = 1 in the domain with v = 0 on the
boundary, and T = int v.  With Brownian motion of generator Lap (coordinate
variance 2t), v(x) is the expected exit time from x.  Two Monte Carlo schemes
estimate it:

* ``"wos"`` (default) walks on spheres and adds the mean exit time r^2/(2d) of
  every ball it crosses.  This is unbiased up to the stopping shell.
* ``"euler"`` runs time-stepped Gaussian increments with
  dt = (inradius/50)^2/(2d) until the walker leaves.  It overshoots, so it
  overestimates exit times by O(sqrt(dt)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .capacity import reference_capacity
from .errors import NumericalFailure, ShapeError
from .geometry import (Ball, Box, Ellipsoid, Polytope, boundary_distance, inradius, is_convex,
                       omega, perimeter, sample_uniform, volume)
from .mc import MCConfig, map_chunks, mean_stderr, stream, unit_vectors


@dataclass(frozen=True)
class TorsionEstimate:
    value: float
    method: str
    stderr: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {"value": self.value, "method": self.method, "stderr": self.stderr, **self.meta}


def ball_torsion(d: int, radius: float = 1.0) -> float:
    return omega(d) * radius ** (d + 2) / (d * (d + 2))


def ellipsoid_torsion_function(a, x) -> np.ndarray:
    """v(x) = (1 - sum x_i^2/a_i^2) / (2 sum a_i^-2) inside the ellipsoid."""
    a = np.asarray(a, dtype=float)
    return (1.0 - ((np.asarray(x) / a) ** 2).sum(-1)) / (2.0 * (a**-2).sum())


def saint_venant_bound(d: int) -> float:
    """Upper bound on T / |Omega|^((d+2)/d), attained by balls."""
    return 1.0 / (d * (d + 2) * omega(d) ** (2.0 / d))


def _wos_chunk(shape, delta, max_steps, seed, k, m):
    rng = stream(seed, k)
    d = shape.dim
    x = sample_uniform(shape, m, rng)
    tau = np.zeros(m)
    idx = np.arange(m)
    for _ in range(max_steps):
        r = boundary_distance(shape, x[idx])
        live = r >= delta
        idx, r = idx[live], r[live]
        if idx.size == 0:
            return tau
        tau[idx] += r * r / (2.0 * d)
        x[idx] += r[:, None] * unit_vectors(rng, idx.size, d)
    raise NumericalFailure("walk-on-spheres torsion walkers did not reach the boundary")


def _euler_chunk(shape, dt, max_steps, seed, k, m):
    rng = stream(seed, k)
    d = shape.dim
    x = sample_uniform(shape, m, rng)
    steps = np.zeros(m)
    idx = np.arange(m)
    sd = math.sqrt(2.0 * dt)
    for _ in range(max_steps):
        x[idx] += sd * rng.standard_normal((idx.size, d))
        steps[idx] += 1
        inside = boundary_distance(shape, x[idx]) > 0
        idx = idx[inside]
        if idx.size == 0:
            return steps * dt
    raise NumericalFailure("exit-time walkers exceeded the step budget")


def torsion(shape, cfg: MCConfig | None = None, method: str = "wos") -> TorsionEstimate:
    """Torsional rigidity: exact for balls and ellipsoids, Monte Carlo otherwise."""
    if not is_convex(shape):
        raise ShapeError(f"torsion needs a convex body with interior, got {type(shape).__name__}")
    d = shape.dim
    if isinstance(shape, Ball):
        return TorsionEstimate(ball_torsion(d, shape.radius), "exact")
    if isinstance(shape, Ellipsoid):
        a = np.asarray(shape.semi_axes)
        return TorsionEstimate(volume(shape) / ((d + 2) * (a**-2).sum()), "exact")
    if not isinstance(shape, (Box, Polytope)):
        raise ShapeError(f"torsion does not support {type(shape).__name__}")
    if cfg is None:
        raise ShapeError("Monte Carlo torsion needs a seeded MCConfig")
    rin = inradius(shape)
    if method == "wos":
        delta = 1e-6 * rin
        args = [(shape, delta, 10_000, cfg.seed, k, m) for k, m in enumerate(cfg.chunks())]
        meta = {"scheme": "wos", "delta": delta}
        fn = _wos_chunk
    elif method == "euler":
        dt = (rin / 50.0) ** 2 / (2.0 * d)
        args = [(shape, dt, 10_000_000, cfg.seed, k, m) for k, m in enumerate(cfg.chunks())]
        meta = {"scheme": "euler", "dt": dt}
        fn = _euler_chunk
    else:
        raise ValueError(f"unknown torsion method {method!r}")
    tau = np.concatenate(map_chunks(fn, args, cfg.workers))
    mean, se = mean_stderr(tau)
    vol = volume(shape)
    meta.update(n_starts=cfg.n_samples, seed=cfg.seed)
    return TorsionEstimate(vol * mean, "exit_time_mc", vol * se, meta)


# --------------------------------------------------------------------------
# functionals

@dataclass(frozen=True)
class FunctionalValue:
    kind: str
    alpha: float | None
    value: float
    stderr: float = 0.0

    def to_json(self) -> dict:
        return {"kind": self.kind, "alpha": self.alpha, "value": self.value, "stderr": self.stderr}


def _rel(est) -> float:
    return est.stderr / est.value if est.value > 0 else 0.0


def functional_from_parts(kind: str, alpha, d: int, T=None, cap=None, vol=None, P=None) -> FunctionalValue:
    """Evaluate G, G_alpha, H_alpha or J_alpha from already computed parts.

    ``T`` and ``cap`` are estimates (with ``value`` and ``stderr``); ``vol``
    and ``P`` are exact numbers.  Relative errors are combined to first order.
    """
    if kind == "G":
        if d < 3:
            raise ShapeError("G needs d >= 3")
        value = T.value * cap.value / vol**2
        rel = math.hypot(_rel(T), _rel(cap))
    elif kind == "G_alpha":
        if d < 3 or not 0 <= alpha <= 2:
            raise ShapeError("G_alpha needs d >= 3 and 0 <= alpha <= 2")
        value = T.value * cap.value / (vol**alpha * P ** (d * (2 - alpha) / (d - 1)))
        rel = math.hypot(_rel(T), _rel(cap))
    elif kind == "H_alpha":
        if d != 2 or not 0 <= alpha <= 1.5:
            raise ShapeError("H_alpha needs d = 2 and 0 <= alpha <= 3/2")
        value = math.sqrt(T.value) * cap.value / (vol**alpha * P ** (3 - 2 * alpha))
        rel = math.hypot(0.5 * _rel(T), _rel(cap))
    elif kind == "J_alpha":
        if d < 3 or not alpha > 0:
            raise ShapeError("J_alpha needs d >= 3 and alpha > 0")
        value = vol**alpha * cap.value / P ** ((d * alpha + d - 2) / (d - 1))
        rel = _rel(cap)
    else:
        raise ValueError(f"unknown functional {kind!r}")
    return FunctionalValue(kind, alpha, value, value * rel)


def functional(kind: str, alpha, shape, cfg: MCConfig | None = None) -> FunctionalValue:
    d = shape.dim
    vol = volume(shape)
    P = perimeter(shape, 0.0)
    cap = reference_capacity(shape, cfg)
    T = None if kind == "J_alpha" else torsion(shape, cfg)
    return functional_from_parts(kind, alpha, d, T=T, cap=cap, vol=vol, P=P)


def ball_functional(kind: str, alpha, d: int) -> float:
    return functional(kind, alpha, Ball(1.0, dim=d)).value


@dataclass(frozen=True)
class CheckReport:
    name: str
    value: float
    reference: float
    stderr: float
    passed: bool

    @property
    def slack(self) -> float:
        return self.reference - self.value

    def to_json(self) -> dict:
        return {"check": self.name, "value": self.value, "reference": self.reference,
                "stderr": self.stderr, "slack": self.slack, "passed": self.passed}


def check_theorem3(shape, alphas, cfg: MCConfig | None = None) -> list[CheckReport]:
    """Balls maximise G_alpha for 0 <= alpha <= 2/d: test G_alpha(K) <= G_alpha(B_1).

    ``alphas`` is one value or a sequence; torsion and capacity are computed
    once and shared.
    """
    d = shape.dim
    if d < 3:
        raise ShapeError("the G_alpha maximiser check needs d >= 3")
    alphas = [alphas] if np.isscalar(alphas) else list(alphas)
    for alpha in alphas:
        if not 0 <= alpha <= 2.0 / d + 1e-12:
            raise ShapeError(f"alpha must lie in [0, 2/d] = [0, {2.0 / d:.6g}]")
    parts = dict(T=torsion(shape, cfg), cap=reference_capacity(shape, cfg), vol=volume(shape),
                 P=perimeter(shape, 0.0))
    out = []
    for alpha in alphas:
        g = functional_from_parts("G_alpha", alpha, d, **parts)
        ref = ball_functional("G_alpha", alpha, d)
        out.append(CheckReport(f"G_alpha({alpha:g})", g.value, ref, g.stderr,
                               g.value <= ref * (1 + 1e-12) + 3.0 * g.stderr))
    return out


def theorem4_value(shape) -> float:
    """T cap / P^5 for a disc or ellipse (logarithmic capacity)."""
    if shape.dim != 2 or not isinstance(shape, (Ball, Ellipsoid)):
        raise ShapeError("the planar check supports discs and ellipses only")
    T = torsion(shape).value
    cap = reference_capacity(shape).value
    return T * cap / perimeter(shape, 0.0) ** 5


def check_theorem4(shape) -> list[CheckReport]:
    """T cap / P^5 and cap / P are both maximised by the disc."""
    ref = theorem4_value(Ball(1.0, dim=2))
    val = theorem4_value(shape)
    cap_ratio = reference_capacity(shape).value / perimeter(shape, 0.0)
    return [
        CheckReport("T*cap/P^5", val, ref, 0.0, val <= ref * (1 + 1e-12)),
        CheckReport("cap/P", cap_ratio, 1.0 / (2.0 * math.pi), 0.0, cap_ratio <= (1 + 1e-12) / (2.0 * math.pi)),
    ]
