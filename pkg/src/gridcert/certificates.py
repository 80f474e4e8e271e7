"""Sufficient solvability certificates and the matrix norms they rely on.

Three families are provided:

* the base fixed-point criteria ``4 ||Z||* ||s|| <= v0^2`` for the 2-norm
  pair and the (entrywise max, 1-norm) pair,
* the same criteria after a positive diagonal rescaling ``Z -> Z L``,
  ``s -> L^-1 s``,
* the rhombus (cross-polytope) criterion ``sum_k |s_k| / s_max_k <= 1``
  obtained from the rescaling ``1 / L_k = max_h |Z_hk|``.

All of them only see ``Z`` through entry moduli, so the sign convention of
``Z`` and ``s`` does not matter here as long as the two agree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._validation import (
    DimensionError,
    check_impedance,
    check_lambda,
    check_load_vector,
    check_matrix,
    check_v0,
)

CRITERIA = ("norm2", "norm_inf", "rescaled_norm2", "rescaled_norm_inf", "hull")
GRID_LIMIT = 10**6


@dataclass(frozen=True)
class CertificateVerdict:
    certified: bool
    criterion: str
    margin: float

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValueError(f"unknown criterion {self.criterion!r}")


@dataclass(frozen=True, eq=False)
class Rhombus:
    """Per-bus limits ``s_max``; the vertices of the hull are ``+-s_max_k e_k``."""

    s_max: np.ndarray
    v0: float = 1.0

    @property
    def n(self) -> int:
        return self.s_max.shape[0]

    def vertices(self) -> np.ndarray:
        """The ``2n`` vertices in ``|s|``-space, ordered ``+e_1, -e_1, +e_2, ...``."""
        out = np.zeros((2 * self.n, self.n))
        for k, limit in enumerate(self.s_max):
            out[2 * k, k] = limit
            out[2 * k + 1, k] = -limit
        return out


def norm_key(norm) -> str:
    """Normalise a norm selector to ``"2"`` or ``"inf"``."""
    if isinstance(norm, str):
        key = norm.strip().lower()
        if key in ("2", "two", "norm2"):
            return "2"
        if key in ("inf", "infinity", "norm_inf", "baseinf", "base_inf"):
            return "inf"
    elif norm == 2:
        return "2"
    elif norm == np.inf:
        return "inf"
    raise ValueError(f"norm must be 2 or inf, got {norm!r}")


def nuclear_norm_2(A) -> float:
    """Largest Euclidean row norm, ``max_h sqrt(sum_j |A_hj|^2)``."""
    A = check_matrix(A)
    return float(_scaled_row_norms(np.abs(A)).max())


def _scaled_row_norms(M):
    # divide out the row maximum so tiny or huge moduli neither under- nor overflow
    peak = M.max(axis=1, keepdims=True)
    safe = np.where(peak > 0, peak, 1.0)
    return np.sqrt(((M / safe) ** 2).sum(axis=1)) * safe[:, 0]


def nuclear_norm_inf(A) -> float:
    """Largest entry modulus, ``max_hk |A_hk|``."""
    A = check_matrix(A)
    return float(np.abs(A).max())


def _vector_norm(u, key):
    if key == "2":
        return float(_scaled_row_norms(np.abs(u)[None, :])[0])
    return float(np.sum(np.abs(u)))


def criterion_lhs(Z, s, norm, lam=None) -> float:
    """Left-hand side ``4 ||Z L||* ||L^-1 s||`` of a (rescaled) norm criterion.

    ``lam=None`` means no rescaling. The product is degree-one homogeneous in
    ``s``, which is what the closed-form boundary tracing relies on.
    """
    key = norm_key(norm)
    Z = check_impedance(Z)
    n = Z.shape[0]
    s = check_load_vector(s, n)
    if lam is None:
        A, u = Z, s
    else:
        lam = check_lambda(lam, n)
        A, u = Z * lam[None, :], s / lam
    mat = nuclear_norm_2(A) if key == "2" else nuclear_norm_inf(A)
    return 4.0 * mat * _vector_norm(u, key)


def _norm_verdict(lhs, v0, criterion):
    margin = v0 * v0 - lhs
    return CertificateVerdict(bool(margin >= 0), criterion, float(margin))


def certify_base(Z, s, v0, norm=2) -> CertificateVerdict:
    """Unrescaled fixed-point criterion for the chosen norm pair."""
    v0 = check_v0(v0)
    key = norm_key(norm)
    lhs = criterion_lhs(Z, s, key)
    return _norm_verdict(lhs, v0, "norm2" if key == "2" else "norm_inf")


def certify_rescaled(Z, s, v0, lam, norm=2) -> CertificateVerdict:
    """Fixed-point criterion after rescaling by ``diag(lam)``.

    With ``lam`` all ones this reproduces :func:`certify_base` bit for bit.
    """
    v0 = check_v0(v0)
    key = norm_key(norm)
    Z = check_impedance(Z)
    lam = check_lambda(lam, Z.shape[0])
    lhs = criterion_lhs(Z, s, key, lam)
    return _norm_verdict(lhs, v0, "rescaled_norm2" if key == "2" else "rescaled_norm_inf")


def rhombus(Z, v0) -> Rhombus:
    """Per-bus limits ``s_max_k = v0^2 / (4 max_h |Z_hk|)``."""
    v0 = check_v0(v0)
    Z = check_impedance(Z)
    col_max = np.abs(Z).max(axis=0)
    zero = np.flatnonzero(col_max == 0)
    if zero.size:
        raise ValueError(f"load bus column(s) {zero.tolist()} of Z are all zero; limit undefined")
    # the rescaling 1/lam_k = col_max_k normalises every column maximum to one
    scaled = nuclear_norm_inf(Z / col_max[None, :])
    assert abs(scaled - 1.0) <= 1e-12, scaled
    s_max = v0 * v0 / (4.0 * col_max)
    s_max.setflags(write=False)
    return Rhombus(s_max, v0)


def hull_ratio(rh: Rhombus, s) -> float:
    s = check_load_vector(s, rh.n)
    return float(np.sum(np.abs(s) / rh.s_max))


def certify_hull(rh: Rhombus, s) -> CertificateVerdict:
    margin = 1.0 - hull_ratio(rh, s)
    return CertificateVerdict(bool(margin >= 0), "hull", float(margin))


def certify_all(Z, s, v0) -> dict[str, CertificateVerdict]:
    """Base criteria for both norms plus the hull criterion."""
    return {
        "norm2": certify_base(Z, s, v0, 2),
        "norm_inf": certify_base(Z, s, v0, "inf"),
        "hull": certify_hull(rhombus(Z, v0), s),
    }


def lambda_grid(range_lo, range_hi, points_per_axis, n) -> np.ndarray:
    """Log-spaced Cartesian grid of rescaling diagonals.

    Returns an array of shape ``(points_per_axis ** n, n)``; row ``i`` is the
    diagonal of the ``i``-th matrix, first coordinate varying slowest.
    """
    if n < 1:
        raise ValueError("rescaling grid needs n >= 1")
    if points_per_axis < 1:
        raise ValueError("points_per_axis must be >= 1")
    if not (0 < range_lo < range_hi) or not np.isfinite(range_hi):
        raise ValueError(f"need 0 < lo < hi, got [{range_lo}, {range_hi}]")
    if points_per_axis**n > GRID_LIMIT:
        raise OverflowError(f"grid of {points_per_axis}^{n} matrices exceeds {GRID_LIMIT}")
    if points_per_axis == 1:
        axis = np.array([float(range_lo)])
    else:
        axis = np.geomspace(range_lo, range_hi, points_per_axis)
    return np.array(list(itertools.product(axis, repeat=n)), dtype=float)


__all__ = [
    "CRITERIA",
    "CertificateVerdict",
    "DimensionError",
    "Rhombus",
    "certify_all",
    "certify_base",
    "certify_hull",
    "certify_rescaled",
    "criterion_lhs",
    "hull_ratio",
    "lambda_grid",
    "norm_key",
    "nuclear_norm_2",
    "nuclear_norm_inf",
    "rhombus",
]
