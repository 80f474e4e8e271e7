"""Fixed-point power-flow solver built on the map

    G(f) = -(1 / v0^2) diag(f + s) Z conj(f + s),

whose fixed points ``f = v0 conj(i) - s`` are exactly the solutions of
``v = v0 1 + Z i`` and ``v_h conj(i_h) = s_h``. ``s`` and ``i`` are
injections.

Non-convergence is reported through :attr:`PFSolution.converged` rather than
raised, because the boundary tracer deliberately runs the iteration past the
region where it contracts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import DimensionError, check_impedance, check_load_vector, check_v0

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000
DIVERGENCE_FACTOR = 1e3


@dataclass(frozen=True, eq=False)
class FixedPointState:
    f: np.ndarray
    iteration: int
    last_step_norm: float


@dataclass(frozen=True, eq=False)
class PFSolution:
    v: np.ndarray
    i: np.ndarray
    residual: float
    converged: bool
    status: str
    state: FixedPointState

    @property
    def iterations(self) -> int:
        return self.state.iteration

    @property
    def f(self) -> np.ndarray:
        return self.state.f


@dataclass(frozen=True, eq=False)
class BatchResult:
    """Outcome of iterating several independent load vectors at once."""

    f: np.ndarray
    converged: np.ndarray
    diverged: np.ndarray
    iterations: np.ndarray
    last_step: np.ndarray


def _map_rows(Z, S, F, v0sq):
    # row-wise reduction keeps each row's arithmetic independent of the batch
    A = F + S
    return -(A * (np.conj(A)[:, None, :] * Z[None, :, :]).sum(axis=2)) / v0sq


def apply_map(Z, s, v0, f) -> np.ndarray:
    """Evaluate ``G(f)`` for one load vector."""
    Z = check_impedance(Z)
    v0 = check_v0(v0)
    n = Z.shape[0]
    s = check_load_vector(s, n)
    f = np.asarray(f, dtype=complex).reshape(-1)
    if f.shape != (n,):
        raise DimensionError(f"f has shape {f.shape}, expected ({n},)")
    return _map_rows(Z, s[None, :], f[None, :], v0 * v0)[0]


def divergence_bound(Z, v0) -> float:
    from .certificates import nuclear_norm_2

    return DIVERGENCE_FACTOR * v0 * v0 / max(nuclear_norm_2(Z), np.finfo(float).eps)


def iterate_batch(Z, S, v0, F0=None, *, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, alpha=1.0):
    """Run ``f <- (1 - alpha) f + alpha G(f)`` on every row of ``S``.

    A row stops as soon as ``||G(f) - f||_inf < tol`` (it is then reported
    converged, at the iterate ``f`` whose residual was measured) or once
    ``||f||_inf`` exceeds the divergence bound. Rows that run out of
    iterations are neither converged nor diverged.
    """
    Z = check_impedance(Z)
    v0 = check_v0(v0)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not 0 < alpha <= 1:
        raise ValueError("damping alpha must lie in (0, 1]")
    S = np.atleast_2d(np.asarray(S, dtype=complex))
    K, n = S.shape
    if n != Z.shape[0]:
        raise DimensionError(f"loads have {n} columns, Z is {Z.shape[0]}x{Z.shape[0]}")
    F = np.zeros((K, n), dtype=complex) if F0 is None else np.array(F0, dtype=complex).reshape(K, n)

    v0sq = v0 * v0
    bound = divergence_bound(Z, v0)
    converged = np.zeros(K, dtype=bool)
    diverged = np.zeros(K, dtype=bool)
    iterations = np.full(K, max_iter, dtype=int)
    last_step = np.full(K, np.inf)

    idx = np.arange(K)
    Fa, Sa = F.copy(), S
    for it in range(1, max_iter + 1):
        G = _map_rows(Z, Sa, Fa, v0sq)
        gap = np.abs(G - Fa).max(axis=1)
        Fn = G if alpha == 1.0 else Fa + alpha * (G - Fa)
        done = gap < tol
        blown = ~(np.abs(Fn).max(axis=1) <= bound) & ~done
        finished = done | blown
        if finished.any():
            rows = idx[finished]
            F[rows] = np.where(done[finished, None], Fa[finished], Fn[finished])
            converged[rows] = done[finished]
            diverged[rows] = blown[finished]
            iterations[rows] = it
            last_step[rows] = alpha * gap[finished]
            keep = ~finished
            idx, Fa, Sa, gap = idx[keep], Fn[keep], Sa[keep], gap[keep]
            if idx.size == 0:
                break
        else:
            Fa = Fn
    if idx.size:
        F[idx] = Fa
        last_step[idx] = alpha * gap
    return BatchResult(F, converged, diverged, iterations, last_step)


def recover(Z, s, v0, f):
    """Currents and voltages from ``f``: ``conj(i) = (f + s) / v0``, ``v = v0 + Z i``."""
    i = np.conj(f + s) / v0
    v = v0 + Z @ i
    return v, i


def solve_fixed_point(
    Z, s, v0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, *, f0=None, alpha=1.0
) -> PFSolution:
    """Solve the power flow by fixed-point iteration of ``G`` from ``f0`` (default 0).

    ``alpha < 1`` selects the damped step ``f <- (1 - alpha) f + alpha G(f)``.
    """
    Z = check_impedance(Z)
    v0 = check_v0(v0)
    s = check_load_vector(s, Z.shape[0])
    res = iterate_batch(Z, s[None, :], v0, None if f0 is None else np.asarray(f0)[None, :],
                        tol=tol, max_iter=max_iter, alpha=alpha)
    f = res.f[0]
    state = FixedPointState(f, int(res.iterations[0]), float(res.last_step[0]))
    if res.converged[0]:
        status = "converged"
    elif res.diverged[0]:
        status = "diverged"
    else:
        status = "max_iter"
    with np.errstate(all="ignore"):
        v, i = recover(Z, s, v0, f)
        residual = float(np.abs(v * np.conj(i) - s).max())
    if not np.isfinite(residual):
        residual = np.inf
    return PFSolution(v, i, residual, bool(res.converged[0]), status, state)


def pf_residual(v0, Z, s, v) -> float:
    """Mismatch ``max_h |v_h conj(i_h) - s_h|`` with ``i`` solved from ``Z i = v - v0``."""
    Z = check_impedance(Z)
    v0 = check_v0(v0)
    n = Z.shape[0]
    s = check_load_vector(s, n)
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape != (n,):
        raise DimensionError(f"voltage vector has shape {v.shape}, expected ({n},)")
    i = np.linalg.solve(Z, v - v0)
    return float(np.abs(v * np.conj(i) - s).max())


def contraction_ratio(Z, s, v0, f1, f2) -> float:
    """Empirical Lipschitz ratio ``||G(f2) - G(f1)|| / ||f2 - f1||`` in the inf-norm."""
    num = np.abs(apply_map(Z, s, v0, f2) - apply_map(Z, s, v0, f1)).max()
    den = np.abs(np.asarray(f2) - np.asarray(f1)).max()
    return float(num / den)
