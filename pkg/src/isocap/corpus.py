"""Built-in test corpus of shapes, generated deterministically from a seed."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Ball, Box, Ellipsoid, Polytope, SegmentFamily
from .mc import stream


@dataclass(frozen=True)
class Corpus:
    balls: tuple
    ellipsoids: tuple
    boxes: tuple
    polytopes: tuple
    segment_families: tuple

    @property
    def convex(self) -> tuple:
        return self.balls + self.ellipsoids + self.boxes + self.polytopes

    @property
    def all(self) -> tuple:
        return self.convex + self.segment_families


def random_ellipsoids(seed: int, n: int = 20, d: int = 3, lo: float = 0.5, hi: float = 4.0) -> list[Ellipsoid]:
    """Semi-axes log-uniform in [lo, hi]."""
    rng = stream(seed, 1)
    return [Ellipsoid(tuple(np.exp(rng.uniform(np.log(lo), np.log(hi), d)))) for _ in range(n)]


def random_boxes(seed: int, n: int = 10, d: int = 3, lo: float = 0.25, hi: float = 1.0) -> list[Box]:
    rng = stream(seed, 2)
    return [Box(tuple(np.exp(rng.uniform(np.log(lo), np.log(hi), d)))) for _ in range(n)]


def random_polytopes(seed: int, n: int = 10, d: int = 3, n_vertices: int = 16) -> list[Polytope]:
    """Hulls of points on the unit sphere with radii in [0.5, 1] and a random stretch."""
    rng = stream(seed, 3)
    out = []
    for _ in range(n):
        g = rng.standard_normal((n_vertices, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        pts = g * rng.uniform(0.5, 1.0, (n_vertices, 1)) * rng.uniform(0.6, 1.6, d)
        out.append(Polytope(pts))
    return out


def build_corpus(seed: int = 42) -> Corpus:
    return Corpus(
        balls=tuple(Ball(1.0, dim=d) for d in (3, 4, 5)),
        ellipsoids=tuple(random_ellipsoids(seed)),
        boxes=tuple(random_boxes(seed)),
        polytopes=tuple(random_polytopes(seed)),
        segment_families=tuple(SegmentFamily(a) for a in (0.5, 1.0, 2.0)),
    )
