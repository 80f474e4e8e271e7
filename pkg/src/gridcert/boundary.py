"""Solvability boundaries projected onto a two-parameter (P, Q) plane.

A :class:`LoadPattern` maps a scalar pair ``(P, Q)`` to the per-bus
consumption ``s_k = P * wp_k + 1j * Q * wq_k``. Along a ray
``(P, Q) = t * (cos a, sin a)`` every certificate is positively homogeneous
of degree one in ``t``, so its critical scaling has a closed form. The
numerical reference ("oracle") instead marches ``t`` upward with
warm-started fixed-point solves and bisects the first failure.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ._validation import check_impedance, check_lambda, check_v0
from .certificates import criterion_lhs, hull_ratio, norm_key, rhombus
from .pfsolver import DEFAULT_TOL, iterate_batch, recover

METHODS = ("oracle", "hull", "base2", "base_inf", "rescaled")
DEFAULT_BISECTION_TOL = 1e-6
DEFAULT_STEPS = 200
DAMPING = 0.5
MAX_DOUBLINGS = 20
ORACLE_MAX_ITER = 1000


def canonical_method(method: str) -> str:
    key = method.strip().lower().replace("-", "_")
    key = {"baseinf": "base_inf", "norm2": "base2", "norm_inf": "base_inf"}.get(key, key)
    if key not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return key


def resolve_n_jobs(n_jobs=None) -> int:
    """Worker count: explicit value, else ``GRIDCERT_THREADS``, else 1. Zero means all cores."""
    if n_jobs is None:
        raw = os.environ.get("GRIDCERT_THREADS", "1").strip() or "1"
        try:
            n_jobs = int(raw)
        except ValueError:
            raise ValueError(f"GRIDCERT_THREADS must be an integer, got {raw!r}") from None
    if n_jobs < 0:
        raise ValueError("thread count must be >= 0")
    return n_jobs or (os.cpu_count() or 1)


@dataclass(frozen=True, eq=False)
class LoadPattern:
    weights_p: np.ndarray
    weights_q: np.ndarray

    def __post_init__(self):
        wp = np.asarray(self.weights_p, dtype=float).reshape(-1)
        wq = np.asarray(self.weights_q, dtype=float).reshape(-1)
        if wp.shape != wq.shape or wp.size == 0:
            raise ValueError("weights_p and weights_q must be non-empty and equally long")
        if not (np.all(np.isfinite(wp)) and np.all(np.isfinite(wq))):
            raise ValueError("pattern weights must be finite")
        if not (np.any(wp) or np.any(wq)):
            raise ValueError("pattern needs at least one nonzero weight")
        object.__setattr__(self, "weights_p", wp)
        object.__setattr__(self, "weights_q", wq)

    @classmethod
    def uniform(cls, n):
        """Every load bus draws the same ``P + jQ``."""
        return cls(np.ones(n), np.ones(n))

    @property
    def n(self) -> int:
        return self.weights_p.shape[0]

    def loads(self, P, Q) -> np.ndarray:
        """Consumption-positive complex load vector for ``(P, Q)``."""
        return P * self.weights_p + 1j * Q * self.weights_q


@dataclass(frozen=True, eq=False)
class RaySpec:
    pattern: LoadPattern
    direction: tuple[float, float]

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float).reshape(-1)
        if d.shape != (2,) or not np.all(np.isfinite(d)):
            raise ValueError("direction must be a finite 2-vector")
        norm = float(np.hypot(d[0], d[1]))
        if norm == 0:
            raise ValueError("direction (0, 0) does not define a ray")
        object.__setattr__(self, "direction", (float(d[0] / norm), float(d[1] / norm)))

    @classmethod
    def from_angle(cls, pattern, angle):
        return cls(pattern, (np.cos(angle), np.sin(angle)))

    @property
    def angle(self) -> float:
        return float(np.arctan2(self.direction[1], self.direction[0]))

    def unit_load(self) -> np.ndarray:
        """Consumption load at ``t = 1``."""
        return self.pattern.loads(*self.direction)


@dataclass(frozen=True)
class BoundarySample:
    direction: tuple[float, float]
    t_star: float
    method: str
    unbounded: bool = False
    non_monotone: bool = False
    bracket: tuple[float, float] = field(default=(np.nan, np.nan))

    @property
    def angle(self) -> float:
        return float(np.arctan2(self.direction[1], self.direction[0]))

    @property
    def point(self) -> tuple[float, float]:
        return (self.t_star * self.direction[0], self.t_star * self.direction[1])


def ray_angles(n_rays, full=False) -> np.ndarray:
    """Uniform angles: ``[0, pi/2]`` inclusive, or ``[0, 2 pi)`` when ``full``."""
    if n_rays < 2:
        raise ValueError("need at least 2 rays")
    if full:
        return 2 * np.pi * np.arange(n_rays) / n_rays
    return np.linspace(0.0, np.pi / 2, n_rays)


def _check_pattern(Z, pattern):
    if pattern.n != Z.shape[0]:
        raise ValueError(f"pattern has {pattern.n} buses, Z has {Z.shape[0]}")


# ---------------------------------------------------------------- certificates


def certificate_t_star(Z, v0, ray: RaySpec, method="hull", *, lam=None, norm=None) -> BoundarySample:
    """Closed-form critical scaling of a certificate along ``ray``.

    ``method="rescaled"`` additionally needs ``lam`` (diagonal) and ``norm``.
    """
    Z = check_impedance(Z)
    v0 = check_v0(v0)
    _check_pattern(Z, ray.pattern)
    method = canonical_method(method)
    w = ray.unit_load()
    if not np.any(w):
        raise ValueError(f"ray {ray.direction} projects to an all-zero load")
    if method == "hull":
        t = 1.0 / hull_ratio(rhombus(Z, v0), w)
    elif method == "base2":
        t = v0 * v0 / criterion_lhs(Z, w, 2)
    elif method == "base_inf":
        t = v0 * v0 / criterion_lhs(Z, w, "inf")
    elif method == "rescaled":
        if lam is None or norm is None:
            raise ValueError("rescaled method needs lam and norm")
        t = v0 * v0 / criterion_lhs(Z, w, norm, lam)
    else:
        raise ValueError("use oracle_t_star for the numerical boundary")
    return BoundarySample(ray.direction, float(t), method)


# ---------------------------------------------------------------------- oracle


def _solve_rows(Z, v0, S, F0, max_iter):
    """Undamped attempt, then a damped retry for the rows that failed."""
    res = iterate_batch(Z, S, v0, F0, tol=DEFAULT_TOL, max_iter=max_iter)
    ok, F = res.converged.copy(), res.f
    bad = np.flatnonzero(~ok)
    if bad.size:
        retry = iterate_batch(Z, S[bad], v0, F0[bad], tol=DEFAULT_TOL, max_iter=max_iter, alpha=DAMPING)
        ok[bad] = retry.converged
        F[bad] = retry.f
    return ok, F


def _oracle_rows(Z, v0, W, t_hi, tol, steps, max_iter):
    """Lockstep continuation + bisection for each row of ``W`` (consumption loads at t=1).

    Each row follows its own state machine; rows never influence each other,
    so results do not depend on how rays are grouped into batches.
    """
    K, n = W.shape
    S_unit = -W  # injection convention
    lo = np.zeros(K)
    hi = np.full(K, np.nan)
    f_lo = np.zeros((K, n), dtype=complex)
    cap = np.asarray(t_hi, dtype=float).copy()
    step = cap / steps
    doublings = np.zeros(K, dtype=int)
    unbounded = np.zeros(K, dtype=bool)
    done = np.zeros(K, dtype=bool)

    while not done.all():
        active = np.flatnonzero(~done)
        bisecting = ~np.isnan(hi[active])
        cand = np.empty(active.size)
        for j, k in enumerate(active):
            if bisecting[j]:
                cand[j] = 0.5 * (lo[k] + hi[k])
                continue
            while lo[k] + step[k] > cap[k] * (1 + 1e-12) and doublings[k] < MAX_DOUBLINGS:
                cap[k] *= 2
                step[k] = cap[k] / steps
                doublings[k] += 1
            cand[j] = lo[k] + step[k]
        ok, F = _solve_rows(Z, v0, cand[:, None] * S_unit[active], f_lo[active], max_iter)
        for j, k in enumerate(active):
            if ok[j]:
                lo[k] = cand[j]
                f_lo[k] = F[j]
            else:
                hi[k] = cand[j]
            if not np.isnan(hi[k]):
                done[k] = hi[k] - lo[k] < tol
            elif lo[k] + step[k] > cap[k] * (1 + 1e-12) and doublings[k] >= MAX_DOUBLINGS:
                unbounded[k] = done[k] = True

    # probe past the first failure; a success there means solvability is not monotone in t
    non_monotone = np.zeros(K, dtype=bool)
    probe = np.flatnonzero(~unbounded)
    for mult in (1.0, 2.0):
        if not probe.size:
            break
        t_probe = hi[probe] + mult * step[probe]
        ok, _ = _solve_rows(Z, v0, t_probe[:, None] * S_unit[probe], f_lo[probe], max_iter)
        non_monotone[probe[ok]] = True
    return lo, hi, unbounded, non_monotone


def _default_t_hi(Z, v0, W):
    rh = rhombus(Z, v0)
    return np.array([2.0 / hull_ratio(rh, w) for w in W])


def oracle_batch(Z, v0, rays, t_hi=None, tol=DEFAULT_BISECTION_TOL, *, steps=DEFAULT_STEPS,
                 max_iter=ORACLE_MAX_ITER, n_jobs=None) -> list[BoundarySample]:
    """Numerical boundary along several rays; see :func:`oracle_t_star`."""
    Z = check_impedance(Z)
    v0 = check_v0(v0)
    if tol <= 0:
        raise ValueError("bisection tol must be positive")
    rays = list(rays)
    if not rays:
        return []
    for ray in rays:
        _check_pattern(Z, ray.pattern)
    W = np.array([ray.unit_load() for ray in rays])
    if np.any(~W.any(axis=1)):
        raise ValueError("a ray projects to an all-zero load")
    if t_hi is None:
        t_hi = _default_t_hi(Z, v0, W)
    else:
        t_hi = np.broadcast_to(np.asarray(t_hi, dtype=float), (len(rays),)).copy()
        if np.any(t_hi <= 0):
            raise ValueError("t_hi must be positive")

    workers = min(resolve_n_jobs(n_jobs), len(rays))
    chunks = np.array_split(np.arange(len(rays)), workers)

    def run(idx):
        return _oracle_rows(Z, v0, W[idx], t_hi[idx], tol, steps, max_iter)

    if workers == 1:
        parts = [run(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    lo, hi, unbounded, non_monotone = (np.concatenate(p) for p in zip(*parts))
    return [
        BoundarySample(ray.direction, float(lo[k]), "oracle", bool(unbounded[k]),
                       bool(non_monotone[k]), (float(lo[k]), float(hi[k])))
        for k, ray in enumerate(rays)
    ]


def oracle_t_star(Z, v0, ray: RaySpec, t_hi=None, tol=DEFAULT_BISECTION_TOL, **kwargs) -> BoundarySample:
    """Largest ``t`` the continuation procedure can solve along ``ray``.

    ``t`` is marched upward in steps of ``t_hi / steps`` (``t_hi`` doubles
    whenever it is reached, at most 20 times), each solve warm-started from
    the previous fixed point and retried with damping ``0.5`` on failure. The
    first failing step is bisected down to ``tol``. The returned ``t_star``
    is the solvable end of the final bracket.
    """
    return oracle_batch(Z, v0, [ray], t_hi, tol, **kwargs)[0]


# ---------------------------------------------------------------------- sweeps


def sweep_boundary(Z, v0, pattern: LoadPattern, n_rays, method="hull", *, full=False,
                   lam=None, norm=None, **oracle_kwargs) -> list[BoundarySample]:
    """Boundary samples for ``method`` on uniformly spaced rays, in angle order."""
    Z = check_impedance(Z)
    method = canonical_method(method)
    rays = [RaySpec.from_angle(pattern, a) for a in ray_angles(n_rays, full)]
    if method == "oracle":
        return oracle_batch(Z, v0, rays, **oracle_kwargs)
    return [certificate_t_star(Z, v0, ray, method, lam=lam, norm=norm) for ray in rays]


@dataclass(frozen=True, eq=False)
class LambdaUnion:
    """Rescaled-criterion boundaries, one row of ``t_star`` per rescaling."""

    angles: np.ndarray
    lambdas: np.ndarray
    t_star: np.ndarray
    norm: str

    @property
    def envelope(self) -> np.ndarray:
        return self.t_star.max(axis=0)

    def polylines(self) -> np.ndarray:
        """Boundary points, shape ``(n_lambda, n_rays, 2)`` as ``(P, Q)``."""
        return self.t_star[..., None] * np.stack([np.cos(self.angles), np.sin(self.angles)], axis=-1)


def lambda_union_samples(Z, v0, pattern: LoadPattern, grid, norm, n_rays, *, full=False) -> LambdaUnion:
    """Closed-form rescaled boundary for every rescaling in ``grid`` on shared rays."""
    Z = check_impedance(Z)
    v0 = check_v0(v0)
    _check_pattern(Z, pattern)
    key = norm_key(norm)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ValueError("rescaling grid is empty")
    grid = np.array([check_lambda(lam, Z.shape[0]) for lam in grid])
    angles = ray_angles(n_rays, full)
    W = np.abs(np.array([pattern.loads(np.cos(a), np.sin(a)) for a in angles]))
    if np.any(~W.any(axis=1)):
        raise ValueError("a ray projects to an all-zero load")

    scaled = np.abs(Z)[None, :, :] * grid[:, None, :]
    U = W[None, :, :] / grid[:, None, :]
    if key == "2":
        mat = np.sqrt((scaled**2).sum(axis=2)).max(axis=1)
        vec = np.sqrt((U**2).sum(axis=2))
    else:
        mat = scaled.max(axis=(1, 2))
        vec = U.sum(axis=2)
    t = v0 * v0 / (4.0 * mat[:, None] * vec)
    return LambdaUnion(angles, grid, t, key)


# ------------------------------------------------------------------- PV curves


@dataclass(frozen=True, eq=False)
class PVCurve:
    q: float
    P: np.ndarray
    v_mag: np.ndarray
    p_nose: float
    p_estimate: float
    completed: bool

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.P, self.v_mag])


def hull_p_limit(Z, v0, pattern: LoadPattern, q_fixed) -> float:
    """Largest ``P >= 0`` the rhombus certifies at fixed ``Q``; nan if none."""
    rh = rhombus(Z, v0)

    def excess(P):
        return hull_ratio(rh, pattern.loads(P, q_fixed)) - 1.0

    if excess(0.0) > 0:
        return float("nan")
    if not np.any(pattern.weights_p):
        return float("inf")
    upper = 1.0 / hull_ratio(rh, pattern.loads(1.0, 0.0))
    while excess(upper) <= 0:
        upper *= 2
    return float(brentq(excess, 0.0, upper, xtol=1e-14, rtol=4 * np.finfo(float).eps))


def pv_curve(Z, v0, pattern: LoadPattern, q_fixed, p_max_hint, n_points, watch_bus, *,
             tol=DEFAULT_TOL, max_iter=ORACLE_MAX_ITER) -> PVCurve:
    """Continuation in ``P`` at fixed ``Q`` until the solver first fails.

    ``watch_bus`` is a 0-based load-bus position. The last converged ``P`` is
    the empirical nose; ``p_estimate`` is the rhombus limit at the same ``Q``.
    """
    Z = check_impedance(Z)
    v0 = check_v0(v0)
    _check_pattern(Z, pattern)
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if not np.isfinite(q_fixed):
        raise ValueError("q_fixed must be finite")
    if not 0 <= watch_bus < Z.shape[0]:
        raise IndexError(f"watch_bus {watch_bus} out of range for {Z.shape[0]} load buses")
    grid = np.linspace(0.0, float(p_max_hint), n_points)
    f = np.zeros((1, Z.shape[0]), dtype=complex)
    P_done, v_done = [], []
    completed = True
    for P in grid:
        s = -pattern.loads(P, q_fixed)[None, :]
        res = iterate_batch(Z, s, v0, f, tol=tol, max_iter=max_iter)
        if not res.converged[0]:
            res = iterate_batch(Z, s, v0, f, tol=tol, max_iter=max_iter, alpha=DAMPING)
        if not res.converged[0]:
            completed = False
            break
        f = res.f
        v, _ = recover(Z, s[0], v0, f[0])
        P_done.append(P)
        v_done.append(abs(v[watch_bus]))
    p_nose = P_done[-1] if P_done else float("nan")
    return PVCurve(float(q_fixed), np.array(P_done), np.array(v_done), float(p_nose),
                   hull_p_limit(Z, v0, pattern, q_fixed), completed)
