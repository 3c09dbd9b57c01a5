"""Quermass integrals, the Steiner polynomial and Aleksandrov-Fenchel checks.

For a convex body K in R^d the volume of the parallel body is a polynomial

    |K_r| = sum_{n=0}^{d} C(d, n) W_n(K) r^n,

with W_0 = |K|, d W_1 = P(K), d W_2 = M(K) (integrated mean curvature) and
W_d = omega_d.  Balls and boxes have closed forms.  Polytopes are exact in
d = 2 and d = 3 (edge lengths times exterior dihedral angles).  Ellipsoids are
fitted: |K_r| is evaluated by integrating over the unit sphere of normals,

    |K_r| = (1/d) int_{S^{d-1}} (h(u) + r) prod_i (rho_i(u) + r) du,

with support function h and principal radii of curvature rho_i, and the
coefficients are recovered from d+1 samples by a Vandermonde solve.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import comb

from .errors import NumericalFailure, ShapeError
from .geometry import Ball, Box, Ellipsoid, ParallelQuery, Polytope, diameter, omega, volume

FIT_TOL = 1e-8


@dataclass(frozen=True)
class QuermassVector:
    """``w[n] = W_n(K)`` for n = 0..d."""

    d: int
    w: tuple[float, ...]
    provenance: str = "exact"

    def __post_init__(self):
        if len(self.w) != self.d + 1:
            raise ValueError("a QuermassVector of dimension d has d+1 entries")

    def to_json(self) -> dict:
        return {"d": self.d, "w": list(self.w), "provenance": self.provenance}

    @property
    def steiner(self) -> np.ndarray:
        """Coefficients ``C(d, n) W_n`` of the Steiner polynomial, lowest first."""
        return np.array([comb(self.d, n, exact=True) * w for n, w in enumerate(self.w)])


def steiner_volume(q: QuermassVector, r) -> float:
    return float(np.polynomial.polynomial.polyval(r, q.steiner))


def steiner_perimeter(q: QuermassVector, r) -> float:
    """``d|K_r|/dr = sum_n n C(d,n) W_n r^(n-1)``."""
    return float(np.polynomial.polynomial.polyval(r, np.polynomial.polynomial.polyder(q.steiner)))


def _elementary_symmetric(values) -> np.ndarray:
    """e_0..e_m of the given numbers (coefficients of prod (1 + v x))."""
    e = np.array([1.0])
    for v in values:
        e = np.concatenate([e, [0.0]]) + np.concatenate([[0.0], v * e])
    return e


def _box(shape: Box) -> QuermassVector:
    # |K_r| = sum_k omega_k e_{d-k}(sides) r^k: each k-dimensional rounding sits
    # on a (d-k)-face spanned by d-k of the side lengths.
    d = shape.dim
    e = _elementary_symmetric(2.0 * np.asarray(shape.half_widths))
    w = [float(omega(k) * e[d - k] / comb(d, k, exact=True)) for k in range(d + 1)]
    return QuermassVector(d, tuple(w), "exact")


def _polytope(shape: Polytope) -> QuermassVector:
    d = shape.dim
    hull = shape.hull
    if d == 2:
        # ConvexHull.area is the perimeter in the plane
        return QuermassVector(2, (float(hull.volume), float(hull.area) / 2.0, math.pi), "exact")
    if d != 3:
        raise ShapeError("exact polytope Quermass integrals are available for d = 2, 3 only")
    normals = hull.equations[:, :3]
    pts = hull.points
    edge_term = 0.0
    for i, simplex in enumerate(hull.simplices):
        for k, j in enumerate(hull.neighbors[i]):
            cosang = float(np.clip(normals[i] @ normals[j], -1.0, 1.0))
            if cosang > 1.0 - 1e-12:
                continue  # coplanar triangles of one facet
            edge = np.delete(simplex, k)
            length = float(np.linalg.norm(pts[edge[0]] - pts[edge[1]]))
            edge_term += length * math.acos(cosang)
    # each edge was visited from both sides; coefficient of r^2 is sum L*theta/2
    w2 = (edge_term / 2.0) / 2.0 / 3.0
    return QuermassVector(3, (float(hull.volume), float(hull.area) / 3.0, w2, omega(3)), "exact")


@lru_cache(maxsize=16)
def _sphere_rule(d: int, n: int):
    """Product Gauss-Legendre rule on the positive orthant of S^{d-1}."""
    x, wts = np.polynomial.legendre.leggauss(n)
    phi = (x + 1.0) * (math.pi / 4.0)
    wphi = wts * (math.pi / 4.0)
    grids = np.meshgrid(*[phi] * (d - 1), indexing="ij")
    angles = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.ones(len(angles))
    for k, wk in enumerate(np.meshgrid(*[wphi] * (d - 1), indexing="ij")):
        weights *= wk.ravel() * np.sin(angles[:, k]) ** (d - 2 - k)
    u = np.ones((len(angles), d))
    for k in range(d - 1):
        u[:, k] *= np.cos(angles[:, k])
        u[:, k + 1:] *= np.sin(angles[:, k])[:, None]
    return u, weights * 2.0**d


_NODES = {2: 400, 3: 160, 4: 56, 5: 28}


def ellipsoid_support_moments(a) -> tuple[np.ndarray, np.ndarray]:
    """``I_k = int h sigma_k(rho) du`` and ``J_k = int sigma_k(rho) du``, k = 0..d-1."""
    a = np.asarray(a, dtype=float)
    d = len(a)
    u, wts = _sphere_rule(d, _NODES.get(d, 14))
    a2 = a**2
    h = np.sqrt((u**2 * a2).sum(1))
    g = u * a2
    # Hessian of h restricted to the tangent space has the radii as eigenvalues
    hess = (np.diag(a2)[None] - g[:, :, None] * g[:, None, :] / h[:, None, None] ** 2) / h[:, None, None]
    rho = np.linalg.eigvalsh(hess)[:, 1:]  # drop the zero eigenvalue along u
    sig = np.ones((len(u), 1))
    for k in range(d - 1):
        col = rho[:, k:k + 1]
        sig = np.concatenate([sig, np.zeros((len(u), 1))], axis=1) + \
            np.concatenate([np.zeros((len(u), 1)), col * sig], axis=1)
    I = (wts[:, None] * h[:, None] * sig).sum(0)
    J = (wts[:, None] * sig).sum(0)
    return I, J


def ellipsoid_parallel_volume(a, r) -> np.ndarray:
    """|E_r| from the support-function integral (vectorised over ``r``)."""
    I, J = ellipsoid_support_moments(a)
    d = len(I)
    r = np.asarray(r, dtype=float)
    total = np.zeros_like(r)
    for k in range(d):
        total = total + (I[k] + r * J[k]) * r ** (d - 1 - k)
    return total / d


def fit_steiner(volume_at, d: int, r0: float, exact_volume: float) -> QuermassVector:
    """Recover W_0..W_d from |K_r| sampled at r = r0, 2 r0, ..., (d+1) r0.

    The polynomial is validated against ``exact_volume`` at r = 0 and against a
    fresh evaluation at r0/2; a relative residual above ``FIT_TOL`` raises.
    """
    s = np.arange(1, d + 2, dtype=float)
    vals = np.asarray(volume_at(s * r0), dtype=float)
    V = np.vander(s, d + 1, increasing=True)
    c = np.linalg.solve(V, vals) / r0 ** np.arange(d + 1)
    for r, ref in ((0.0, exact_volume), (0.5 * r0, float(volume_at(np.array([0.5 * r0]))[0]))):
        got = float(np.polynomial.polynomial.polyval(r, c))
        if abs(got - ref) > FIT_TOL * abs(ref):
            raise NumericalFailure(f"Steiner fit residual {abs(got - ref) / ref:.2e} at r={r:g}")
    w = tuple(float(c[n] / comb(d, n, exact=True)) for n in range(d + 1))
    return QuermassVector(d, w, "fitted")


@lru_cache(maxsize=512)
def quermass(shape) -> QuermassVector:
    """Quermass integrals W_0..W_d of a convex body (memoised per shape)."""
    if isinstance(shape, ParallelQuery):
        # W_n(K_r) = sum_k C(d-n, k) W_{n+k}(K) r^k
        base = quermass(shape.base)
        d, r = base.d, shape.r
        w = [sum(comb(d - n, k, exact=True) * base.w[n + k] * r**k for k in range(d - n + 1))
             for n in range(d + 1)]
        return QuermassVector(d, tuple(w), base.provenance)
    if isinstance(shape, Ball):
        d = shape.dim
        return QuermassVector(d, tuple(omega(d) * shape.radius ** (d - n) for n in range(d + 1)))
    if isinstance(shape, Box):
        return _box(shape)
    if isinstance(shape, Polytope):
        return _polytope(shape)
    if isinstance(shape, Ellipsoid):
        a = shape.semi_axes
        if max(a) == min(a):
            return quermass(Ball(a[0], dim=shape.dim))
        return fit_steiner(lambda r: ellipsoid_parallel_volume(a, r), shape.dim, diameter(shape), volume(shape))
    raise ShapeError(f"Quermass integrals need a convex body, got {type(shape).__name__}")


def mean_curvature_integral(shape) -> float:
    """M(K) = d W_2(K); for nonsmooth bodies this is the Steiner-coefficient extension."""
    q = quermass(shape)
    if q.d < 2:
        raise ShapeError("mean curvature needs d >= 2")
    return q.d * q.w[2]


@dataclass(frozen=True)
class AFReport:
    min_slack: float
    triple: tuple[int, int, int] | None
    passed: bool


def af_check(q: QuermassVector, tol: float = 1e-8) -> AFReport:
    """Check W_j^(k-i) >= W_i^(k-j) W_k^(j-i) for all i < j < k in log form."""
    w = np.asarray(q.w, dtype=float)
    if np.any(w <= 0):
        return AFReport(-math.inf, None, False)
    lw = np.log(w)
    worst, where = math.inf, None
    for i, j, k in itertools.combinations(range(q.d + 1), 3):
        slack = (k - i) * lw[j] - (k - j) * lw[i] - (j - i) * lw[k]
        if slack < worst:
            worst, where = float(slack), (i, j, k)
    return AFReport(worst, where, worst >= -tol)
