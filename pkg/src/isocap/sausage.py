"""Wiener sausages of a ball and their volume growth.

The sausage of a closed ball of radius eps along a Brownian path beta is the
union of the balls B(beta(s), eps) for 0 <= s <= t.  Its expected volume grows
like cap(B_eps) t as t grows, so a least-squares slope of the mean volume
against t estimates the capacity.

Paths have generator Laplacian: Gaussian increments with coordinate variance
2 dt.  A path is simulated on a base grid and can be refined by Brownian
bridge midpoints, so a run with step dt/2 reuses the exact same path and the
two slopes differ only by discretisation and sampling noise.

Volume estimators (all nested in t: one sample set serves every time in the
grid, so volumes are nondecreasing along each path):

``"bridge"`` (default)
    Karp-Luby estimator over the union of pieces, one piece per path step:
    a capsule of radius eps + 4 sqrt(h) around the step.  A point sampled in
    piece j is weighted by q_j(x) prod_{i<j} (1 - q_i(x)), where q_i(x) is the
    probability that the Brownian bridge over step i passes within eps of x.
    It is 1 near the step's endpoints and otherwise exp(-d_a d_b / h), with d_a,
    d_b the distances from x to the endpoint balls (the half-space crossing
    law of a bridge).  This counts the continuous-time sausage, up to the
    curvature of the ball.
``"capsule"``
    Same sampling with radius eps and the weight "x lies in no earlier
    capsule": the volume of the polyline's eps-neighbourhood.
``"hit_or_miss"``
    Uniform points in the inflated bounding box, counted when inside the
    polyline's eps-neighbourhood.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .bounds import sausage_bounds
from .capacity import ball_capacity
from .errors import ShapeError
from .geometry import Ball, omega
from .mc import map_chunks, stream

ESTIMATORS = ("bridge", "capsule", "hit_or_miss")
INFLATE = 4.0  # bridge pieces reach eps + INFLATE sqrt(h)
_BOOTSTRAP = 400


@dataclass(frozen=True)
class SausageConfig:
    """Parameters of a sausage experiment.

    ``t_grid`` defaults to ``(0.2, 0.4, 0.6, 0.8, 1.0) * t_max``.  ``refine``
    halves the step ``refine`` times by bridge midpoints.
    """

    d: int
    eps: float
    seed: int
    t_max: float = 20.0
    dt: float = 1e-3
    n_paths: int = 200
    n_points: int = 20_000
    t_grid: tuple[float, ...] | None = None
    refine: int = 0
    estimator: str = "bridge"
    workers: int = 1

    def __post_init__(self):
        if self.d < 2:
            raise ShapeError("sausages need d >= 2")
        if not (self.eps > 0 and self.dt > 0 and self.t_max > 0):
            raise ValueError("eps, dt and t_max must be positive")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.n_paths < 2 or self.n_points < 1 or self.refine < 0:
            raise ValueError("need n_paths >= 2, n_points >= 1, refine >= 0")
        grid = self.grid
        if np.any(np.diff(grid) <= 0) or grid[0] <= 0 or grid[-1] > self.t_max * (1 + 1e-12):
            raise ValueError("t_grid must increase within (0, t_max]")
        if self.dt > grid[0] / 100.0:
            raise ValueError("dt must be at most min(t_grid)/100")

    @property
    def grid(self) -> np.ndarray:
        if self.t_grid is None:
            return self.t_max * np.array([0.2, 0.4, 0.6, 0.8, 1.0])
        return np.asarray(self.t_grid, dtype=float)

    @property
    def step(self) -> float:
        return self.dt / 2.0**self.refine

    def halved(self) -> "SausageConfig":
        return replace(self, refine=self.refine + 1)


@dataclass
class SausageRun:
    d: int
    eps: float
    t_grid: np.ndarray
    n_paths: int
    dt: float
    seed: int
    volumes: np.ndarray  # (n_paths, len(t_grid))
    stderr: np.ndarray   # per-path sampling error, same shape
    estimator: str = "bridge"
    meta: dict = field(default_factory=dict)

    @property
    def body(self) -> Ball:
        return Ball(self.eps, dim=self.d)

    def rows(self) -> list[dict]:
        return [{"path_id": p, "t": float(t), "volume": float(self.volumes[p, k]),
                 "stderr": float(self.stderr[p, k])}
                for p in range(self.n_paths) for k, t in enumerate(self.t_grid)]


# --------------------------------------------------------------------------
# paths

def simulate_path(seed: int, path_id: int, n_steps: int, dt: float, d: int, refine: int = 0) -> np.ndarray:
    """One path with ``n_steps * 2**refine + 1`` points, started at the origin.

    Level ``k`` midpoints come from the stream ``(seed, path_id, k + 1)``, so
    refining never changes the coarser points.
    """
    inc = stream(seed, path_id, 0).standard_normal((n_steps, d)) * math.sqrt(2.0 * dt)
    path = np.vstack([np.zeros(d), np.cumsum(inc, axis=0)])
    h = dt
    for level in range(refine):
        # bridge midpoint over a step of length h: mean of the ends, coordinate variance h/2
        noise = stream(seed, path_id, level + 1).standard_normal((len(path) - 1, d))
        mid = 0.5 * (path[:-1] + path[1:]) + noise * math.sqrt(0.5 * h)
        fine = np.empty((2 * len(path) - 1, d))
        fine[0::2], fine[1::2] = path, mid
        path, h = fine, 0.5 * h
    return path


def simulate_paths(cfg: SausageConfig) -> np.ndarray:
    """All paths of a run as one ``(n_paths, n + 1, d)`` array (memory heavy)."""
    n = int(round(cfg.t_max / cfg.dt))
    return np.stack([simulate_path(cfg.seed, p, n, cfg.dt, cfg.d, cfg.refine) for p in range(cfg.n_paths)])


# --------------------------------------------------------------------------
# volume estimators

def _sample_pieces(a, b, radius, m, rng):
    """Uniform points in capsules chosen proportionally to capsule volume."""
    n, d = a.shape
    length = np.linalg.norm(b - a, axis=1)
    v_ball = omega(d) * radius**d
    v_cyl = omega(d - 1) * radius ** (d - 1) * length
    vol = v_ball + v_cyl
    total = float(vol.sum())
    j = rng.choice(n, size=m, p=vol / total)
    in_cyl = rng.random(m) < v_cyl[j] / vol[j]
    u = (b[j] - a[j]) / np.where(length[j] > 0, length[j], 1.0)[:, None]
    g = rng.standard_normal((m, d))
    g -= (g * u).sum(1)[:, None] * u
    g /= np.linalg.norm(g, axis=1)[:, None]
    rad = radius * rng.random(m) ** (1.0 / (d - 1))
    x_cyl = a[j] + rng.random(m)[:, None] * (b[j] - a[j]) + rad[:, None] * g
    z = rng.standard_normal((m, d))
    z *= (radius * rng.random(m) ** (1.0 / d) / np.linalg.norm(z, axis=1))[:, None]
    forward = (z * u).sum(1) > 0  # half ball in front of the step belongs to its far end
    x_cap = a[j] + z + forward[:, None] * (b[j] - a[j])
    return np.where(in_cyl[:, None], x_cyl, x_cap), j, total


def _neighbours(x, a, b, reach):
    """Pairs (owner sample, step index) whose step midpoint is within ``reach``."""
    mid = 0.5 * (a + b)
    half = 0.5 * float(np.linalg.norm(b - a, axis=1).max())
    pairs = cKDTree(x).sparse_distance_matrix(cKDTree(mid), reach + half, output_type="ndarray")
    return pairs["i"].astype(np.int64), pairs["j"].astype(np.int64)


def _segment_distance(x, a, b):
    ab = b - a
    l2 = (ab * ab).sum(-1)
    s = np.clip(((x - a) * ab).sum(-1) / np.where(l2 > 0, l2, 1.0), 0.0, 1.0)
    return np.linalg.norm(x - (a + s[:, None] * ab), axis=-1)


def _bridge_hit(x, a, b, eps, h):
    d1 = np.linalg.norm(x - a, axis=1) - eps
    d2 = np.linalg.norm(x - b, axis=1) - eps
    near = (d1 <= 0) | (d2 <= 0)
    return np.where(near, 1.0, np.exp(-np.clip(d1, 0, None) * np.clip(d2, 0, None) / h))


def sausage_volume(path: np.ndarray, eps: float, h: float, n_steps_at: np.ndarray, n_points: int,
                   rng: np.random.Generator, estimator: str = "bridge") -> tuple[np.ndarray, np.ndarray]:
    """Volume of the sausage of ``B(0, eps)`` along the first ``n_steps_at[k]`` steps.

    Returns ``(volumes, stderr)`` with one entry per requested prefix.
    """
    a, b = path[:-1], path[1:]
    m_at = np.asarray(n_steps_at)
    if estimator == "hit_or_miss":
        lo, hi = path.min(0) - eps, path.max(0) + eps
        box = float(np.prod(hi - lo))
        if not box > 0:
            raise ShapeError("degenerate bounding box")
        x = lo + (hi - lo) * rng.random((n_points, path.shape[1]))
        owner, idx = _neighbours(x, a, b, eps)
        first = np.full(n_points, len(a))
        hit = _segment_distance(x[owner], a[idx], b[idx]) <= eps
        np.minimum.at(first, owner[hit], idx[hit])
        y = box * (first[None, :] < m_at[:, None])
    else:
        radius = eps + INFLATE * math.sqrt(h) if estimator == "bridge" else eps
        x, j, total = _sample_pieces(a, b, radius, n_points, rng)
        owner, idx = _neighbours(x, a, b, radius)
        keep = idx < j[owner]
        owner, idx = owner[keep], idx[keep]
        if estimator == "bridge":
            w = _bridge_hit(x, a[j], b[j], eps, h)
            q = _bridge_hit(x[owner], a[idx], b[idx], eps, h)
            log_miss = np.zeros(n_points)
            np.add.at(log_miss, owner, np.log1p(-np.minimum(q, 1.0 - 1e-16)))
            w = w * np.exp(log_miss)
        else:
            covered = np.zeros(n_points, dtype=bool)
            covered[owner[_segment_distance(x[owner], a[idx], b[idx]) <= eps]] = True
            w = (~covered).astype(float)
        y = total * w[None, :] * (j[None, :] < m_at[:, None])
    return y.mean(1), y.std(1, ddof=1) / math.sqrt(n_points)


def _path_volumes(cfg: SausageConfig, path_id: int):
    n = int(round(cfg.t_max / cfg.dt))
    path = simulate_path(cfg.seed, path_id, n, cfg.dt, cfg.d, cfg.refine)
    h = cfg.step
    m_at = np.round(cfg.grid / h).astype(int)
    # the volume sample stream does not depend on the refinement level
    rng = stream(cfg.seed, path_id, 1000)
    return sausage_volume(path, cfg.eps, h, m_at, cfg.n_points, rng, cfg.estimator)


def run_sausage(cfg: SausageConfig) -> SausageRun:
    """Simulate ``cfg.n_paths`` paths and estimate their sausage volumes on the grid."""
    out = map_chunks(_path_volumes, [(cfg, p) for p in range(cfg.n_paths)], cfg.workers)
    vols = np.array([v for v, _ in out])
    errs = np.array([e for _, e in out])
    return SausageRun(cfg.d, cfg.eps, cfg.grid, cfg.n_paths, cfg.step, cfg.seed, vols, errs, cfg.estimator,
                      meta={"base_dt": cfg.dt, "refine": cfg.refine, "n_points": cfg.n_points,
                            "inflate": INFLATE if cfg.estimator == "bridge" else 0.0})


# --------------------------------------------------------------------------
# slope

def _design(t: np.ndarray, d: int) -> np.ndarray:
    cols = [t, np.ones_like(t)]
    if d == 3:
        cols.append(np.sqrt(t))  # second-order term of the d = 3 expansion
    return np.column_stack(cols)


def fit_slope(run: SausageRun, burn_in: float = 0.2) -> tuple[float, float]:
    """Least-squares slope of the path-mean volume against t and its bootstrap stderr.

    Times below ``burn_in * t_max`` are dropped.  In d = 3 the fit includes a
    sqrt(t) term.  The stderr resamples paths.
    """
    t = np.asarray(run.t_grid, dtype=float)
    keep = t >= burn_in * t[-1] * (1 - 1e-12)
    X = _design(t[keep], run.d)
    if keep.sum() < X.shape[1]:
        raise ValueError("too few times after burn-in for the slope fit")
    pinv = np.linalg.pinv(X)[0]
    v = run.volumes[:, keep]
    slope = float(pinv @ v.mean(0))
    rng = stream(run.seed, 10**6)
    boot = np.array([pinv @ v[rng.integers(0, run.n_paths, run.n_paths)].mean(0) for _ in range(_BOOTSTRAP)])
    return slope, float(boot.std(ddof=1))


@dataclass(frozen=True)
class DtCheck:
    slope: float
    slope_half: float
    stderr: float
    stderr_half: float
    extrapolated: float
    passed: bool

    def to_json(self) -> dict:
        return {"slope": self.slope, "slope_half": self.slope_half, "stderr": self.stderr,
                "stderr_half": self.stderr_half, "extrapolated": self.extrapolated, "passed": self.passed}


def richardson(coarse: SausageRun, fine: SausageRun, order: float = 0.5, burn_in: float = 0.2) -> DtCheck:
    """Compare slopes at dt and dt/2.

    ``passed`` is |difference| < 2 stderr (the larger of the two).  The
    extrapolation assumes an error of order dt**order and is a diagnostic
    only.
    """
    if not fine.dt < coarse.dt:
        raise ValueError("the fine run needs a smaller step than the coarse one")
    s1, e1 = fit_slope(coarse, burn_in)
    s2, e2 = fit_slope(fine, burn_in)
    ratio = (coarse.dt / fine.dt) ** order
    extra = s2 + (s2 - s1) / (ratio - 1.0)
    return DtCheck(s1, s2, e1, e2, extra, abs(s2 - s1) < 2.0 * max(e1, e2))


@dataclass(frozen=True)
class Prop3Report:
    slope: float
    stderr: float
    capacity: float
    bound_general: float
    bound_ball: float
    upper_ok: bool
    lower_ok: bool

    @property
    def passed(self) -> bool:
        return self.upper_ok and self.lower_ok

    def to_json(self) -> dict:
        return {"slope": self.slope, "stderr": self.stderr, "capacity": self.capacity,
                "bound_general": self.bound_general, "bound_ball": self.bound_ball,
                "upper_ok": self.upper_ok, "lower_ok": self.lower_ok, "passed": self.passed}


def check_prop3(run: SausageRun, burn_in: float = 0.2) -> Prop3Report:
    """Slope against the sausage-capacity bounds (above) and cap(B_eps) (below).

    The expected capacity of the sausage grows at most like the bounds, and
    at least like cap(K) since K is contained in every translate's union.
    """
    if run.d < 5:
        raise ShapeError("the sausage bounds need d >= 5")
    slope, se = fit_slope(run, burn_in)
    b = sausage_bounds(run.d, run.eps)
    cap = ball_capacity(run.d, run.eps)
    bound = min(b["general"], b["ball"])
    return Prop3Report(slope, se, cap, b["general"], b["ball"], slope <= bound + 3.0 * se,
                       slope >= cap - 3.0 * se)
