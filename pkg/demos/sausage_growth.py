"""Capacity of a ball from the volume growth of its Wiener sausage.

The expected volume of the sausage of B_eps grows like cap(B_eps) t.  A small
run in d = 5 shows the mean volume against time and the fitted slope next to
the exact capacity and the upper bound on the sausage capacity growth.  The
default budget takes about ten seconds; pass a path count to change it.

Run:  python demos/sausage_growth.py [n_paths]
"""
from __future__ import annotations

import sys

from isocap import SausageConfig, ball_capacity, fit_slope, run_sausage, sausage_bounds


def main(n_paths: int = 40) -> None:
    d, eps = 5, 1.0
    cfg = SausageConfig(d, eps, seed=7, t_max=10.0, dt=2e-3, n_paths=n_paths, n_points=5_000)
    run = run_sausage(cfg)
    mean = run.volumes.mean(0)
    for t, v in zip(run.t_grid, mean):
        print(f"t = {t:5.1f}   mean volume {v:9.2f}   per unit time {v / t:7.2f}")
    slope, se = fit_slope(run)
    b = sausage_bounds(d, eps)
    print(f"\nslope {slope:.2f} +- {se:.2f}")
    print(f"cap(B_eps) = {ball_capacity(d, eps):.2f}   upper bound {min(b['general'], b['ball']):.2f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 40)
