"""Sharpening the P^2/|K| bound with the Fraenkel asymmetry.

A body far from round has a large asymmetry, and the quantitative
isoperimetric inequality converts that into a multiplicative gain
1 - gamma_d(c) A(K)^2 on the plain P^2/|K| bound.  The constant c of that
inequality is not known in closed form, so it is an input here; the demo
shows how the gain scales with it.

Run:  python demos/asymmetry_refinement.py
"""
from __future__ import annotations

from isocap import (BoundsConfig, Box, Ellipsoid, MCConfig, asymmetry, bound_fraenkel_refined, bound_p2_over_v,
                    reference_capacity)


def main() -> None:
    shapes = [Ellipsoid((2, 1, 1)), Ellipsoid((4, 1, 1)), Box((0.5, 0.5, 0.5)), Box((1.0, 0.25, 0.25))]
    for k, shape in enumerate(shapes):
        asym = asymmetry(shape, MCConfig(100 + k, 50_000))
        cap = reference_capacity(shape, MCConfig(200 + k, 50_000))
        plain = bound_p2_over_v(shape)
        print(f"{shape!r}")
        print(f"  asymmetry {asym.value:.4f} +- {asym.stderr:.4f}   capacity {cap.value:.4f} +- {cap.stderr:.4f}")
        print(f"  plain P^2/|K| bound {plain:.4f}")
        for c in (0.01, 0.1, 1.0):
            value, g, _ = bound_fraenkel_refined(shape, BoundsConfig(c_d=c), asym=asym)
            print(f"  c = {c:<5g} gamma = {g:.5f}  refined {value:.4f}  still above capacity: {value >= cap.value}")


if __name__ == "__main__":
    main()
