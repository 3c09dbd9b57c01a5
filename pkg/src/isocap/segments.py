"""Parallel sets of the segment family K(alpha) in R^3.

K(alpha) is the union of the vertical unit segments ``{(c, 0)} x [0, 1]`` over
the centres ``c in {n**-alpha : n >= 1} U {0}``.  All centres lie on the
x1-axis, so the horizontal section of the r-neighbourhood is a union of equal
discs with collinear centres.  For such a union, a disc meets the union of the
discs to its left only inside its left neighbour, which gives closed forms for
area and boundary length as sums over consecutive gaps.  The vertical extent
adds two caps whose volume and area reduce to one-dimensional integrals over
the section radius.

``truncation=N`` keeps segments ``n = 1..N`` plus the limit segment at 0.
``truncation=None`` is the infinite family: gaps are summed exactly up to an
index where they are far below the disc diameter, and the remaining
telescoping tail is added in closed form (first order in gap/diameter).
"""
from __future__ import annotations

import math

import numpy as np

_PHI_NODES, _PHI_WEIGHTS = np.polynomial.legendre.leggauss(96)
# map [-1, 1] -> [0, pi/2]
_PHI = (_PHI_NODES + 1.0) * (math.pi / 4.0)
_PHI_W = _PHI_WEIGHTS * (math.pi / 4.0)

_MAX_TERMS = 4_000_000


def centers(alpha: float, truncation: int) -> np.ndarray:
    """Sorted x1-coordinates of the truncated family (0 first, 1 last)."""
    n = np.arange(int(truncation), 0, -1, dtype=float)
    return np.concatenate([[0.0], n ** (-alpha)])


def _gaps(alpha: float, n_terms: int) -> np.ndarray:
    n = np.arange(1, n_terms + 1, dtype=float)
    return n ** (-alpha) - (n + 1.0) ** (-alpha)


def _terms_needed(alpha: float, rho: float) -> int:
    # beyond this index every gap is < 2*rho / 20**(alpha+1)
    k = (alpha / (2.0 * rho)) ** (1.0 / (alpha + 1.0))
    return int(min(_MAX_TERMS, max(64, math.ceil(20.0 * k) + 8)))


def _gap_set(alpha: float, rho: float, truncation: int | None):
    """Consecutive gaps and the size of the untreated tail (0 when finite)."""
    if truncation is not None:
        n = int(truncation)
        g = _gaps(alpha, n - 1) if n > 1 else np.empty(0)
        return np.concatenate([g, [n ** (-alpha)]]), 0.0
    m = _terms_needed(alpha, rho)
    return _gaps(alpha, m), (m + 1.0) ** (-alpha)


def _lens_area(g: np.ndarray, rho: float) -> np.ndarray:
    x = np.clip(g / (2.0 * rho), 0.0, 1.0)
    return 2.0 * rho**2 * np.arccos(x) - 0.5 * g * np.sqrt(np.clip(4.0 * rho**2 - g**2, 0.0, None))


def section_area(alpha: float, rho: float, truncation: int | None = None) -> float:
    """Area of the union of discs of radius ``rho`` around the centres."""
    if rho <= 0:
        return 0.0
    g, tail = _gap_set(alpha, rho, truncation)
    added = math.pi * rho**2 - _lens_area(g, rho)
    return float(math.pi * rho**2 + added.sum() + 2.0 * rho * tail)


def section_length(alpha: float, rho: float, truncation: int | None = None) -> float:
    """Boundary length of the same union of discs."""
    if rho <= 0:
        return 0.0
    g, tail = _gap_set(alpha, rho, truncation)
    s = np.arcsin(np.clip(g / (2.0 * rho), 0.0, 1.0)).sum()
    return float(2.0 * math.pi * rho + 4.0 * rho * s + 2.0 * tail)


def parallel_volume(alpha: float, r: float, truncation: int | None = None) -> float:
    """|K(alpha)_r| = A(r) + 2 r int_0^{pi/2} A(r cos phi) cos phi dphi."""
    if r <= 0:
        return 0.0
    caps = sum(w * section_area(alpha, r * math.cos(p), truncation) * math.cos(p)
               for p, w in zip(_PHI, _PHI_W))
    return section_area(alpha, r, truncation) + 2.0 * r * caps


def parallel_perimeter(alpha: float, r: float, truncation: int | None = None) -> float:
    """Surface area of the boundary of K(alpha)_r."""
    if r <= 0:
        return 0.0
    caps = sum(w * section_length(alpha, r * math.cos(p), truncation)
               for p, w in zip(_PHI, _PHI_W))
    return section_length(alpha, r, truncation) + 2.0 * r * caps


def distance(alpha: float, truncation: int, x: np.ndarray) -> np.ndarray:
    """Euclidean distance from points ``x[..., 3]`` to the truncated family."""
    c = centers(alpha, truncation)
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    i = np.clip(np.searchsorted(c, x1), 1, len(c) - 1)
    dx = np.minimum(np.abs(x1 - c[i - 1]), np.abs(x1 - c[i]))
    dz = np.maximum(np.maximum(-x3, x3 - 1.0), 0.0)
    return np.sqrt(dx**2 + x2**2 + dz**2)
