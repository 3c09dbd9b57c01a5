"""Shape representations, measures and distance functions.

Supported compact bodies: balls, centred axis-aligned ellipsoids and boxes,
convex polytopes given by vertices, and the segment family K(alpha) in R^3.
None of them has interior cavities, so the "filled" set used by the perimeter
integral bound coincides with the set itself.

All point-wise functions are vectorised over a trailing coordinate axis:
``x`` has shape ``(..., d)`` and the result has shape ``x.shape[:-1]``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar, NamedTuple, Union

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError
from scipy.special import gammaln

from . import segments
from .errors import NumericalFailure, ShapeError
from .mc import MCConfig, binomial_stderr, stream, uniform_ball


def omega(d: int) -> float:
    """Volume of the unit ball in R^d."""
    if d < 0:
        raise ValueError("dimension must be nonnegative")
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0))


class Estimate(NamedTuple):
    value: float
    stderr: float = 0.0


def _vec(v, name: str) -> tuple[float, ...]:
    out = tuple(float(a) for a in np.asarray(v, dtype=float).ravel())
    if not all(math.isfinite(a) for a in out):
        raise ShapeError(f"{name} must be finite")
    return out


@dataclass(frozen=True)
class Ball:
    radius: float
    dim: int = 3
    center: tuple[float, ...] | None = None
    kind: ClassVar[str] = "ball"

    def __post_init__(self):
        c = (0.0,) * int(self.dim) if self.center is None else _vec(self.center, "center")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "dim", len(c))
        object.__setattr__(self, "radius", float(self.radius))
        if self.dim < 2:
            raise ShapeError("dimension must be at least 2")
        if not self.radius > 0:
            raise ShapeError("radius must be positive")


@dataclass(frozen=True)
class Ellipsoid:
    semi_axes: tuple[float, ...]
    kind: ClassVar[str] = "ellipsoid"

    def __post_init__(self):
        a = _vec(self.semi_axes, "semi_axes")
        object.__setattr__(self, "semi_axes", a)
        if len(a) < 2:
            raise ShapeError("dimension must be at least 2")
        if min(a) <= 0:
            raise ShapeError("semi-axes must be positive")

    @property
    def dim(self) -> int:
        return len(self.semi_axes)


@dataclass(frozen=True)
class Box:
    half_widths: tuple[float, ...]
    kind: ClassVar[str] = "box"

    def __post_init__(self):
        h = _vec(self.half_widths, "half_widths")
        object.__setattr__(self, "half_widths", h)
        if len(h) < 2:
            raise ShapeError("dimension must be at least 2")
        if min(h) <= 0:
            raise ShapeError("half-widths must be positive")

    @property
    def dim(self) -> int:
        return len(self.half_widths)


@dataclass(frozen=True)
class Polytope:
    """Convex hull of a finite point set; must be full-dimensional."""

    vertices: tuple[tuple[float, ...], ...]
    kind: ClassVar[str] = "polytope"

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.ndim != 2 or v.shape[1] < 2:
            raise ShapeError("vertices must be an (m, d) array with d >= 2")
        if not np.all(np.isfinite(v)):
            raise ShapeError("vertices must be finite")
        if v.shape[0] < v.shape[1] + 1:
            raise ShapeError("a polytope needs at least d+1 vertices")
        object.__setattr__(self, "vertices", tuple(tuple(row) for row in v))
        try:
            hull = ConvexHull(v)
        except QhullError as exc:
            raise ShapeError("vertices are not affinely independent") from exc
        object.__setattr__(self, "_hull", hull)

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    def __reduce__(self):
        # the Qhull object does not pickle; rebuild it from the vertices
        return (Polytope, (self.vertices,))

    @property
    def hull(self) -> ConvexHull:
        return self._hull

    @cached_property
    def points(self) -> np.ndarray:
        return self.hull.points[self.hull.vertices]

    @cached_property
    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit outer normals ``A`` and offsets ``b`` with ``P = {A x <= b}``."""
        eq = self.hull.equations
        return eq[:, :-1], -eq[:, -1]

    @cached_property
    def centroid(self) -> np.ndarray:
        pts = self.hull.points
        apex = pts[self.hull.vertices].mean(axis=0)
        simp = pts[self.hull.simplices]                      # (f, d, d)
        edges = simp - apex
        vols = np.abs(np.linalg.det(edges))
        cents = (simp.sum(axis=1) + apex) / (self.dim + 1)
        return (vols[:, None] * cents).sum(axis=0) / vols.sum()


@dataclass(frozen=True)
class SegmentFamily:
    """K(alpha) in R^3, truncated to segments n = 1..N plus the limit segment."""

    alpha: float
    truncation: int = 100
    kind: ClassVar[str] = "segment_family"
    dim: ClassVar[int] = 3

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "truncation", int(self.truncation))
        if not self.alpha > 0:
            raise ShapeError("alpha must be positive")
        if self.truncation < 1:
            raise ShapeError("truncation must be a positive integer")

    @property
    def truncation_error(self) -> float:
        """Upper bound on the distance error caused by the truncation."""
        return self.truncation ** (-self.alpha)


Shape = Union[Ball, Ellipsoid, Box, Polytope, SegmentFamily]
CONVEX_KINDS = (Ball, Ellipsoid, Box, Polytope)


@dataclass(frozen=True)
class ParallelQuery:
    """The closed r-neighbourhood ``K_r`` of a base shape."""

    base: Shape
    r: float

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        if not self.r >= 0:
            raise ShapeError("r must be nonnegative")

    @property
    def dim(self) -> int:
        return self.base.dim


def is_convex(shape) -> bool:
    if isinstance(shape, ParallelQuery):
        return is_convex(shape.base)
    return isinstance(shape, CONVEX_KINDS)


def _points(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != d:
        raise ShapeError(f"points must have trailing dimension {d}")
    return x


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# measures

def volume(shape) -> float:
    """Lebesgue measure of the shape."""
    if isinstance(shape, Ball):
        return omega(shape.dim) * shape.radius ** shape.dim
    if isinstance(shape, Ellipsoid):
        return omega(shape.dim) * float(np.prod(shape.semi_axes))
    if isinstance(shape, Box):
        return float(np.prod(2.0 * np.asarray(shape.half_widths)))
    if isinstance(shape, Polytope):
        return float(shape.hull.volume)
    if isinstance(shape, SegmentFamily):
        return 0.0
    if isinstance(shape, ParallelQuery):
        return parallel_volume(shape).value
    raise ShapeError(f"unsupported shape {shape!r}")


def center(shape) -> np.ndarray:
    """Centroid (centre of symmetry where one exists)."""
    if isinstance(shape, ParallelQuery):
        return center(shape.base)
    if isinstance(shape, Ball):
        return np.asarray(shape.center)
    if isinstance(shape, (Ellipsoid, Box)):
        return np.zeros(shape.dim)
    if isinstance(shape, Polytope):
        return shape.centroid
    if isinstance(shape, SegmentFamily):
        return np.array([0.5, 0.0, 0.5])
    raise ShapeError(f"unsupported shape {shape!r}")


def circumradius(shape) -> float:
    """Radius of the smallest ball about ``center(shape)`` containing the shape."""
    if isinstance(shape, ParallelQuery):
        return circumradius(shape.base) + shape.r
    if isinstance(shape, Ball):
        return shape.radius
    if isinstance(shape, Ellipsoid):
        return max(shape.semi_axes)
    if isinstance(shape, Box):
        return float(np.linalg.norm(shape.half_widths))
    if isinstance(shape, Polytope):
        return float(np.linalg.norm(shape.points - shape.centroid, axis=1).max())
    if isinstance(shape, SegmentFamily):
        return math.sqrt(0.5)
    raise ShapeError(f"unsupported shape {shape!r}")


def diameter(shape) -> float:
    if isinstance(shape, ParallelQuery):
        return diameter(shape.base) + 2.0 * shape.r
    if isinstance(shape, Ball):
        return 2.0 * shape.radius
    if isinstance(shape, Ellipsoid):
        return 2.0 * max(shape.semi_axes)
    if isinstance(shape, Box):
        return 2.0 * float(np.linalg.norm(shape.half_widths))
    if isinstance(shape, Polytope):
        p = shape.points
        return float(np.sqrt(((p[:, None, :] - p[None, :, :]) ** 2).sum(-1)).max())
    if isinstance(shape, SegmentFamily):
        return math.sqrt(2.0)
    raise ShapeError(f"unsupported shape {shape!r}")


def inradius(shape) -> float:
    """Radius of the largest ball contained in the shape (0 for K(alpha))."""
    if isinstance(shape, ParallelQuery):
        return inradius(shape.base) + shape.r
    if isinstance(shape, Ball):
        return shape.radius
    if isinstance(shape, Ellipsoid):
        return min(shape.semi_axes)
    if isinstance(shape, Box):
        return min(shape.half_widths)
    if isinstance(shape, Polytope):
        A, b = shape.halfspaces
        d = shape.dim
        # maximise t subject to A x + t <= b
        res = linprog(np.r_[np.zeros(d), -1.0], A_ub=np.c_[A, np.ones(len(b))], b_ub=b,
                      bounds=[(None, None)] * d + [(0, None)], method="highs")
        if not res.success:
            raise NumericalFailure("Chebyshev centre LP failed")
        return float(res.x[-1])
    if isinstance(shape, SegmentFamily):
        return 0.0
    raise ShapeError(f"unsupported shape {shape!r}")


def bounding_box(shape, r: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Tight axis-aligned bounding box of ``K_r``."""
    if isinstance(shape, ParallelQuery):
        return bounding_box(shape.base, r + shape.r)
    if isinstance(shape, Ball):
        c = np.asarray(shape.center)
        return c - shape.radius - r, c + shape.radius + r
    if isinstance(shape, (Ellipsoid, Box)):
        h = np.asarray(getattr(shape, "semi_axes", None) or shape.half_widths)
        return -h - r, h + r
    if isinstance(shape, Polytope):
        p = shape.points
        return p.min(axis=0) - r, p.max(axis=0) + r
    if isinstance(shape, SegmentFamily):
        return np.array([-r, -r, -r]), np.array([1.0 + r, r, 1.0 + r])
    raise ShapeError(f"unsupported shape {shape!r}")


def scaled(shape, t: float):
    """The dilation ``t K`` about the origin."""
    if not t > 0:
        raise ShapeError("scale factor must be positive")
    if isinstance(shape, Ball):
        return Ball(shape.radius * t, center=tuple(t * c for c in shape.center))
    if isinstance(shape, Ellipsoid):
        return Ellipsoid(tuple(t * a for a in shape.semi_axes))
    if isinstance(shape, Box):
        return Box(tuple(t * h for h in shape.half_widths))
    if isinstance(shape, Polytope):
        return Polytope(t * np.asarray(shape.vertices))
    raise ShapeError(f"cannot scale {type(shape).__name__}")


def box_polytope(shape: Box) -> Polytope:
    """The box as a vertex-described polytope."""
    h = np.asarray(shape.half_widths)
    corners = np.array(np.meshgrid(*[[-1.0, 1.0]] * shape.dim, indexing="ij")).reshape(shape.dim, -1).T
    return Polytope(corners * h)


# --------------------------------------------------------------------------
# membership and distances

def contains(shape, x, tol: float = 0.0) -> np.ndarray:
    """Membership test ``x in K`` (closed set)."""
    x = _points(x, shape.dim)
    if isinstance(shape, ParallelQuery):
        # the cheap lower bound settles most points; resolve the rest exactly
        lower = np.asarray(exterior_step(shape.base, x))
        out = lower <= shape.r + tol
        unsure = out & (lower > 0)
        if np.any(unsure):
            out[unsure] = np.asarray(distance(shape.base, x[unsure])) <= shape.r + tol
        return out
    if isinstance(shape, Ball):
        return np.linalg.norm(x - np.asarray(shape.center), axis=-1) <= shape.radius + tol
    if isinstance(shape, Ellipsoid):
        a = np.asarray(shape.semi_axes)
        return ((x / a) ** 2).sum(-1) <= (1.0 + tol) ** 2
    if isinstance(shape, Box):
        return np.all(np.abs(x) <= np.asarray(shape.half_widths) + tol, axis=-1)
    if isinstance(shape, Polytope):
        A, b = shape.halfspaces
        return np.all(x @ A.T <= b + tol, axis=-1)
    if isinstance(shape, SegmentFamily):
        return segments.distance(shape.alpha, shape.truncation, x) <= tol
    raise ShapeError(f"unsupported shape {shape!r}")


def _ellipsoid_secular(a2, ax, t):
    q = ax / (a2 + t)
    return (q**2).sum(-1) - 1.0, -2.0 * (q**2 / (a2 + t)).sum(-1)


def ellipsoid_closest_point(a, x) -> np.ndarray:
    """Closest boundary point of the ellipsoid for points on or outside it.

    Solves ``sum (a_i x_i / (a_i^2 + t))^2 = 1`` for ``t >= 0`` by Newton's
    method started at ``t = 0``; the function is convex and decreasing, so
    the iterates increase monotonically to the root.
    """
    a = np.asarray(a, dtype=float)
    a2 = a**2
    ax = a * x
    t = np.zeros(x.shape[:-1])
    for _ in range(500):
        f, fp = _ellipsoid_secular(a2, ax, t[..., None])
        step = np.where(f > 0, -f / fp, 0.0)
        t = t + step
        if np.all(step <= 1e-15 * (t + a2.min())):
            break
    else:
        raise NumericalFailure("ellipsoid projection did not converge")
    return a2 * x / (a2 + t[..., None])


def _ellipsoid_inner_distance(a, x) -> np.ndarray:
    """Distance from interior points to the ellipsoid boundary.

    The nearest boundary point is ``a_i^2 x_i / (a_i^2 + t)`` with ``t`` the
    root in ``(-a_min^2, 0]``; when the component along the shortest axis
    vanishes and no root exists there, the nearest point lies on the circle
    ``t = -a_min^2`` (medial-axis case).
    """
    a = np.asarray(a, dtype=float)
    a2 = a**2
    m = a2.min()
    short = np.isclose(a2, m, rtol=1e-12, atol=0.0)
    ax = a * x
    lo = np.full(x.shape[:-1], -m)
    hi = np.zeros(x.shape[:-1])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f, _ = _ellipsoid_secular(a2, ax, mid[..., None])
        up = f > 0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    t = 0.5 * (lo + hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = a2 * x / (a2 + t[..., None])
    dist = np.linalg.norm(x - y, axis=-1)
    # medial-axis branch
    ys = np.where(short, 0.0, a2 * x / np.where(short, 1.0, a2 - m))
    rest = 1.0 - ((ys / a) ** 2).sum(-1)
    deg = (rest > 0) & ~np.isfinite(dist) | ((rest > 0) & (np.abs(t + m) < 1e-9 * m))
    if np.any(deg):
        xs = np.where(short, x, 0.0)
        nx = np.linalg.norm(xs, axis=-1, keepdims=True)
        e = np.zeros(a.shape)
        e[np.argmax(short)] = 1.0
        direction = np.where(nx > 0, xs / np.where(nx > 0, nx, 1.0), e)
        yd = ys + direction * np.sqrt(np.clip(rest, 0, None) * m)[..., None]
        ddeg = np.linalg.norm(x - yd, axis=-1)
        dist = np.where(deg, np.fmin(dist, ddeg), dist)
    return dist


def _min_norm_point(P: np.ndarray, tol: float = 1e-10, max_iter: int = 1000) -> np.ndarray:
    """Point of conv(P) nearest the origin (Wolfe's active-set method)."""
    scale = max(1.0, float((P**2).sum(1).max()))
    S = [int(np.argmin((P**2).sum(1)))]
    lam = np.array([1.0])
    x = P[S[0]].copy()
    for _ in range(max_iter):
        j = int(np.argmin(P @ x))
        if x @ x - P[j] @ x <= tol * scale or j in S:
            return x
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            Q = P[S]
            k = len(S)
            M = np.zeros((k + 1, k + 1))
            M[:k, :k] = Q @ Q.T
            M[:k, k] = M[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            mu = np.linalg.lstsq(M, rhs, rcond=None)[0][:k]
            if np.all(mu > tol):
                lam = mu
                x = mu @ Q
                break
            neg = mu <= tol
            denom = lam[neg] - mu[neg]
            theta = np.min(np.where(denom > 0, lam[neg] / np.where(denom > 0, denom, 1.0), 1.0))
            lam = theta * mu + (1.0 - theta) * lam
            keep = lam > tol
            if not np.any(keep):
                keep[np.argmax(lam)] = True
            S = [s for s, kk in zip(S, keep) if kk]
            lam = lam[keep] / lam[keep].sum()
            x = lam @ P[S]
    raise NumericalFailure("polytope projection did not converge")


def distance(shape, x):
    """Distance from ``x`` to the shape; 0 inside."""
    x = _points(x, shape.dim)
    if isinstance(shape, ParallelQuery):
        return _scalar(np.maximum(distance(shape.base, x) - shape.r, 0.0))
    if isinstance(shape, Ball):
        out = np.maximum(np.linalg.norm(x - np.asarray(shape.center), axis=-1) - shape.radius, 0.0)
    elif isinstance(shape, Box):
        out = np.linalg.norm(np.maximum(np.abs(x) - np.asarray(shape.half_widths), 0.0), axis=-1)
    elif isinstance(shape, Ellipsoid):
        a = np.asarray(shape.semi_axes)
        out = np.zeros(x.shape[:-1])
        outside = ((x / a) ** 2).sum(-1) > 1.0
        if np.any(outside):
            xo = x[outside]
            out[outside] = np.linalg.norm(xo - ellipsoid_closest_point(a, xo), axis=-1)
    elif isinstance(shape, Polytope):
        A, b = shape.halfspaces
        flat = x.reshape(-1, shape.dim)
        out = np.zeros(len(flat))
        viol = (flat @ A.T - b).max(axis=1)
        P = shape.points
        for i in np.nonzero(viol > 0)[0]:
            out[i] = np.linalg.norm(_min_norm_point(P - flat[i]))
        out = out.reshape(x.shape[:-1])
    elif isinstance(shape, SegmentFamily):
        out = segments.distance(shape.alpha, shape.truncation, x)
    else:
        raise ShapeError(f"unsupported shape {shape!r}")
    return _scalar(out)


def boundary_distance(shape, x):
    """Distance from interior points to the boundary; 0 outside the shape."""
    x = _points(x, shape.dim)
    if isinstance(shape, Ball):
        out = shape.radius - np.linalg.norm(x - np.asarray(shape.center), axis=-1)
    elif isinstance(shape, Box):
        out = (np.asarray(shape.half_widths) - np.abs(x)).min(axis=-1)
    elif isinstance(shape, Polytope):
        A, b = shape.halfspaces
        out = (b - x @ A.T).min(axis=-1)
    elif isinstance(shape, Ellipsoid):
        a = np.asarray(shape.semi_axes)
        inside = ((x / a) ** 2).sum(-1) < 1.0
        out = np.zeros(x.shape[:-1])
        if np.any(inside):
            out[inside] = _ellipsoid_inner_distance(a, x[inside])
    else:
        raise ShapeError(f"{type(shape).__name__} has no interior")
    return _scalar(np.maximum(out, 0.0))


def exterior_step(shape, x) -> np.ndarray:
    """A lower bound on ``distance(shape, x)`` that is cheap to vectorise.

    Exact for balls, boxes, ellipsoids and K(alpha).  For polytopes it is the
    largest violated facet inequality, which is within a constant factor of
    the distance (Hoffman), so walk-on-spheres still converges.
    """
    if isinstance(shape, Polytope):
        A, b = shape.halfspaces
        return np.maximum((x @ A.T - b).max(axis=-1), 0.0)
    return np.asarray(distance(shape, x))


def closest_point(shape, x) -> np.ndarray:
    """Nearest point of a convex shape (points inside map to themselves)."""
    x = _points(x, shape.dim)
    if isinstance(shape, Ball):
        c = np.asarray(shape.center)
        v = x - c
        n = np.linalg.norm(v, axis=-1, keepdims=True)
        return np.where(n > shape.radius, c + v * shape.radius / np.where(n > 0, n, 1.0), x)
    if isinstance(shape, Box):
        h = np.asarray(shape.half_widths)
        return np.clip(x, -h, h)
    if isinstance(shape, Ellipsoid):
        a = np.asarray(shape.semi_axes)
        out = x.copy()
        outside = ((x / a) ** 2).sum(-1) > 1.0
        if np.any(outside):
            out[outside] = ellipsoid_closest_point(a, x[outside])
        return out
    if isinstance(shape, Polytope):
        flat = x.reshape(-1, shape.dim)
        out = flat.copy()
        A, b = shape.halfspaces
        P = shape.points
        for i in np.nonzero((flat @ A.T - b).max(axis=1) > 0)[0]:
            out[i] = flat[i] + _min_norm_point(P - flat[i])
        return out.reshape(x.shape)
    raise ShapeError(f"no projection for {type(shape).__name__}")


def _quadratic_exit(p, v):
    """Largest s with |p + s v| = 1 for |p| <= 1."""
    a = (v * v).sum(-1)
    b = (p * v).sum(-1)
    c = (p * p).sum(-1) - 1.0
    return (-b + np.sqrt(np.maximum(b * b - a * c, 0.0))) / a


def radial_extent(shape, c, v) -> np.ndarray:
    """Distance from ``c`` (inside the shape) to the boundary along unit rays ``v``.

    Exact for the convex kinds; for parallel bodies the level set
    ``d_K = r`` is found by Newton's method on the convex function
    ``s -> d_K(c + s v) - r`` started outside, which converges monotonically.
    """
    c = np.asarray(c, dtype=float)
    v = _points(v, shape.dim)
    if isinstance(shape, Ball):
        return shape.radius * _quadratic_exit((c - np.asarray(shape.center)) / shape.radius, v / shape.radius)
    if isinstance(shape, Ellipsoid):
        a = np.asarray(shape.semi_axes)
        return _quadratic_exit(c / a, v / a)
    if isinstance(shape, (Box, Polytope)):
        if isinstance(shape, Box):
            h = np.asarray(shape.half_widths)
            A = np.vstack([np.eye(shape.dim), -np.eye(shape.dim)])
            b = np.concatenate([h, h])
        else:
            A, b = shape.halfspaces
        # exit time min_j room_j / (v . a_j) over facets ahead = 1 / max_j (v . a_j / room_j)
        room = np.maximum(b - A @ c, 1e-300)
        rate = (v @ (A / room[:, None]).T).max(axis=-1)
        return 1.0 / rate
    if isinstance(shape, ParallelQuery):
        base, r = shape.base, shape.r
        reach = np.linalg.norm(c - center(base)) + circumradius(base) + r
        s = np.full(v.shape[:-1], reach)
        for _ in range(100):
            x = c + s[..., None] * v
            y = closest_point(base, x)
            gap = x - y
            dist = np.linalg.norm(gap, axis=-1)
            slope = (gap * v).sum(-1) / np.where(dist > 0, dist, 1.0)
            step = (dist - r) / np.where(slope > 1e-12, slope, 1e-12)
            step = np.where(dist > r, step, 0.0)
            s = s - step
            if np.all(step <= 1e-13 * reach):
                return s
        raise NumericalFailure("ray exit from the parallel body did not converge")
    raise ShapeError(f"no radial function for {type(shape).__name__}")


# --------------------------------------------------------------------------
# sampling

def sample_uniform(shape, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points uniformly distributed in the shape."""
    d = shape.dim
    if isinstance(shape, Ball):
        return np.asarray(shape.center) + shape.radius * uniform_ball(rng, n, d)
    if isinstance(shape, Ellipsoid):
        return np.asarray(shape.semi_axes) * uniform_ball(rng, n, d)
    if isinstance(shape, Box):
        return np.asarray(shape.half_widths) * (2.0 * rng.random((n, d)) - 1.0)
    if isinstance(shape, (Polytope, ParallelQuery)):
        lo, hi = bounding_box(shape)
        out = []
        got = 0
        while got < n:
            x = lo + (hi - lo) * rng.random((max(2 * (n - got), 1024), d))
            x = x[contains(shape, x)]
            out.append(x)
            got += len(x)
        return np.concatenate(out)[:n]
    raise ShapeError(f"cannot sample from {type(shape).__name__}")


# --------------------------------------------------------------------------
# parallel sets

def _hit_or_miss(shape, r, h, mc: MCConfig):
    """Hit-or-miss estimates of |K_r| and of the shell |K_{r+h}| - |K_{r-h}|."""
    lo, hi = bounding_box(shape, r + h)
    if np.any(hi - lo <= 0):
        raise NumericalFailure("degenerate bounding box")
    box = float(np.prod(hi - lo))
    inside = shell = 0
    for k, m in enumerate(mc.chunks()):
        rng = stream(mc.seed, k)
        x = lo + (hi - lo) * rng.random((m, shape.dim))
        dist = distance(shape, x)
        inside += int(np.count_nonzero(dist <= r))
        if h > 0:
            shell += int(np.count_nonzero((dist > r - h) & (dist <= r + h)))
    n = mc.n_samples
    pv, ps = inside / n, shell / n
    return Estimate(box * pv, box * binomial_stderr(pv, n)), Estimate(box * ps, box * binomial_stderr(ps, n))


def parallel_volume(q: ParallelQuery, mc: MCConfig | None = None) -> Estimate:
    """Volume of the parallel set ``K_r``.

    Convex kinds use the Steiner polynomial of their Quermass integrals.  For
    K(alpha) a seeded ``mc`` selects hit-or-miss sampling over the tight
    bounding box of ``K_r``; without it the semi-analytic union-of-discs
    formula for the truncated family is used.
    """
    from .quermass import quermass, steiner_volume

    shape, r = q.base, q.r
    if is_convex(shape):
        return Estimate(steiner_volume(quermass(shape), r))
    if isinstance(shape, SegmentFamily):
        if mc is None:
            return Estimate(segments.parallel_volume(shape.alpha, r, shape.truncation))
        if r <= 0:
            return Estimate(0.0)
        return _hit_or_miss(shape, r, 0.0, mc)[0]
    raise ShapeError(f"unsupported shape {shape!r}")


def fd_step(r: float) -> float:
    return max(1e-4, 1e-3 * r)


def perimeter(shape, r: float = 0.0) -> float:
    """Perimeter of ``K_r`` (``r = 0``: of the shape itself, convex kinds only).

    Convex kinds: derivative of the Steiner polynomial.  K(alpha): central
    difference of the parallel volume with step ``max(1e-4, 1e-3 r)``.
    """
    from .quermass import quermass, steiner_perimeter

    if r < 0:
        raise ShapeError("r must be nonnegative")
    if is_convex(shape):
        return steiner_perimeter(quermass(shape), r)
    if isinstance(shape, SegmentFamily):
        if r <= 0:
            raise ShapeError("K(alpha) needs r > 0")
        h = min(fd_step(r), 0.5 * r)
        up = segments.parallel_volume(shape.alpha, r + h, shape.truncation)
        down = segments.parallel_volume(shape.alpha, r - h, shape.truncation)
        return (up - down) / (2.0 * h)
    raise ShapeError(f"unsupported shape {shape!r}")


def perimeter_mc(shape, r: float, mc: MCConfig, rel_tol: float = 0.05) -> Estimate:
    """Central-difference perimeter of ``K_r`` from one hit-or-miss sample.

    Both volumes come from the same points, so the difference is the shell
    count ``r - h < d_K <= r + h``.  Raises when the relative standard error
    exceeds ``rel_tol``.
    """
    if r <= 0:
        raise ShapeError("r must be positive")
    h = min(fd_step(r), 0.5 * r)
    _, shell = _hit_or_miss(shape, r, h, mc)
    est = Estimate(shell.value / (2.0 * h), shell.stderr / (2.0 * h))
    if est.value <= 0 or est.stderr > rel_tol * est.value:
        raise NumericalFailure(f"finite-difference perimeter not converged: {est}")
    return est


# --------------------------------------------------------------------------
# JSON

def shape_to_dict(shape) -> dict:
    if isinstance(shape, Ball):
        return {"kind": "ball", "dim": shape.dim, "radius": shape.radius, "center": list(shape.center)}
    if isinstance(shape, Ellipsoid):
        return {"kind": "ellipsoid", "dim": shape.dim, "semi_axes": list(shape.semi_axes)}
    if isinstance(shape, Box):
        return {"kind": "box", "dim": shape.dim, "half_widths": list(shape.half_widths)}
    if isinstance(shape, Polytope):
        return {"kind": "polytope", "dim": shape.dim, "vertices": [list(v) for v in shape.vertices]}
    if isinstance(shape, SegmentFamily):
        return {"kind": "segment_family", "dim": 3, "alpha": shape.alpha, "truncation": shape.truncation}
    raise ShapeError(f"unsupported shape {shape!r}")


def shape_from_dict(obj: dict) -> Shape:
    try:
        kind = obj["kind"]
        dim = obj.get("dim")
        if kind == "ball":
            shape = Ball(obj["radius"], dim=dim or len(obj.get("center") or [0, 0, 0]),
                         center=obj.get("center"))
        elif kind == "ellipsoid":
            shape = Ellipsoid(obj["semi_axes"])
        elif kind == "box":
            shape = Box(obj["half_widths"])
        elif kind == "polytope":
            shape = Polytope(obj["vertices"])
        elif kind == "segment_family":
            shape = SegmentFamily(obj["alpha"], obj.get("truncation", 100))
        else:
            raise ShapeError(f"unknown shape kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise ShapeError(f"malformed shape description: {exc}") from exc
    if dim is not None and int(dim) != shape.dim:
        raise ShapeError(f"dim={dim} does not match the shape data (dim {shape.dim})")
    return shape


def load_shape(path) -> Shape:
    with open(path) as fh:
        try:
            return shape_from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ShapeError(f"{path}: invalid JSON ({exc})") from exc


def shape_label(shape) -> str:
    if isinstance(shape, Ball):
        return f"ball(d={shape.dim},R={shape.radius:g})"
    if isinstance(shape, Ellipsoid):
        return "ellipsoid(" + ",".join(f"{a:.4g}" for a in shape.semi_axes) + ")"
    if isinstance(shape, Box):
        return "box(" + ",".join(f"{a:.4g}" for a in shape.half_widths) + ")"
    if isinstance(shape, Polytope):
        return f"polytope(d={shape.dim},m={len(shape.points)})"
    if isinstance(shape, SegmentFamily):
        return f"K(alpha={shape.alpha:g},N={shape.truncation})"
    return repr(shape)
