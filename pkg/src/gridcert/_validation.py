"""Input validation helpers shared by the public functions and estimators."""

import numpy as np


class DimensionError(ValueError):
    """Raised when vector and matrix sizes do not agree."""


def check_impedance(Z):
    """Return ``Z`` as a finite, square, non-empty complex 2-D array."""
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise DimensionError(f"impedance matrix must be square, got shape {Z.shape}")
    if Z.shape[0] == 0:
        raise DimensionError("impedance matrix is empty")
    if not np.all(np.isfinite(Z)):
        raise ValueError("impedance matrix has non-finite entries")
    return Z


def check_matrix(A):
    A = np.asarray(A, dtype=complex)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.size == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    return A


def check_v0(v0):
    v0 = float(v0)
    if not np.isfinite(v0) or v0 <= 0:
        raise ValueError(f"slack voltage must be positive and finite, got {v0}")
    return v0


def check_load_vector(s, n):
    """Return ``s`` as a finite complex vector of length ``n``."""
    s = np.asarray(s, dtype=complex)
    if s.ndim == 0:
        s = s.reshape(1)
    if s.ndim != 1 or s.shape[0] != n:
        raise DimensionError(f"load vector has shape {s.shape}, expected ({n},)")
    if not np.all(np.isfinite(s)):
        raise ValueError("load vector has non-finite entries")
    return s


def check_lambda(lam, n):
    """Diagonal of a rescaling matrix: real, positive, finite, length ``n``."""
    lam = np.asarray(lam)
    if np.iscomplexobj(lam):
        raise ValueError("rescaling entries must be real")
    lam = lam.astype(float)
    if lam.ndim == 2:
        if lam.shape != (n, n) or np.count_nonzero(lam - np.diag(np.diag(lam))):
            raise ValueError("rescaling matrix must be diagonal")
        lam = np.diag(lam).copy()
    if lam.ndim == 0:
        lam = lam.reshape(1)
    if lam.shape != (n,):
        raise DimensionError(f"rescaling has shape {lam.shape}, expected ({n},)")
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise ValueError("rescaling entries must be positive and finite")
    return lam


def check_loads(X, n):
    """Coerce a batch of load vectors to a complex ``(n_samples, n)`` array.

    Accepts either complex input of shape ``(n_samples, n)`` or real input of
    shape ``(n_samples, 2 * n)`` laid out as ``[P_1..P_n, Q_1..Q_n]``. Both
    are taken as given; no sign convention is applied here.
    """
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise DimensionError(f"expected 2-D load array, got {X.ndim}-D")
    if np.iscomplexobj(X):
        if X.shape[1] != n:
            raise DimensionError(f"complex loads need {n} columns, got {X.shape[1]}")
        out = X.astype(complex)
    else:
        if X.shape[1] != 2 * n:
            raise DimensionError(f"real loads need {2 * n} columns (P then Q), got {X.shape[1]}")
        X = X.astype(float)
        out = X[:, :n] + 1j * X[:, n:]
    if not np.all(np.isfinite(out)):
        raise ValueError("loads contain non-finite entries")
    return out
