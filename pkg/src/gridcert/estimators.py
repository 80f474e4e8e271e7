"""scikit-learn style wrappers.

Load batches are rows of ``X``: either complex ``(n_samples, n)`` or real
``(n_samples, 2n)`` laid out as ``[P_1..P_n, Q_1..Q_n]``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_impedance, check_lambda, check_loads, check_v0
from .certificates import criterion_lhs, hull_ratio, norm_key, rhombus
from .netmodel import Network
from .pfsolver import DEFAULT_MAX_ITER, DEFAULT_TOL, iterate_batch, recover

_CRITERIA = ("hull", "norm2", "norm_inf", "rescaled_norm2", "rescaled_norm_inf")


class SolvabilityCertifier(ClassifierMixin, BaseEstimator):
    """Classify load vectors as certified-solvable (True) or not certified (False).

    Parameters
    ----------
    impedance : array-like of shape (n, n)
        Load-bus impedance matrix. Only entry moduli matter, so either sign
        convention works.
    v0 : float
        Slack voltage magnitude.
    criterion : {"hull", "norm2", "norm_inf", "rescaled_norm2", "rescaled_norm_inf"}
    lam : array-like of shape (n,), optional
        Rescaling diagonal, required by the ``rescaled_*`` criteria.

    ``decision_function`` returns the criterion margin, so ``predict`` is
    ``decision_function(X) >= 0``.
    """

    def __init__(self, impedance=None, v0=1.0, criterion="hull", lam=None):
        self.impedance = impedance
        self.v0 = v0
        self.criterion = criterion
        self.lam = lam

    @classmethod
    def from_network(cls, net: Network, **params):
        return cls(impedance=net.impedance().entries, v0=net.v0, **params)

    def fit(self, X=None, y=None):
        if self.impedance is None:
            raise ValueError("impedance must be set before fit")
        if self.criterion not in _CRITERIA:
            raise ValueError(f"criterion must be one of {_CRITERIA}, got {self.criterion!r}")
        self.impedance_ = check_impedance(self.impedance)
        self.v0_ = check_v0(self.v0)
        n = self.impedance_.shape[0]
        self.lam_ = None
        if self.criterion.startswith("rescaled"):
            if self.lam is None:
                raise ValueError(f"criterion {self.criterion!r} needs lam")
            self.lam_ = check_lambda(self.lam, n)
        if self.criterion == "hull":
            self.rhombus_ = rhombus(self.impedance_, self.v0_)
        self.n_buses_ = n
        self.classes_ = np.array([False, True])
        if X is not None:
            check_loads(X, n)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "n_buses_")
        S = check_loads(X, self.n_buses_)
        if self.criterion == "hull":
            return np.array([1.0 - hull_ratio(self.rhombus_, s) for s in S])
        norm = norm_key(self.criterion.rsplit("norm", 1)[1].lstrip("_"))
        v0sq = self.v0_ * self.v0_
        return np.array([v0sq - criterion_lhs(self.impedance_, s, norm, self.lam_) for s in S])

    def predict(self, X):
        return self.decision_function(X) >= 0


class FixedPointPowerFlow(TransformerMixin, BaseEstimator):
    """Map load vectors to load-bus voltages by fixed-point iteration.

    ``convention="consumption"`` (default) treats ``X`` as consumed power and
    ``impedance`` as ``Y_LL^-1``; pass ``"injection"`` when ``X`` already holds
    injections. Rows that fail to converge come back as NaN; ``converged_``
    is not stored, use :meth:`converged` instead.
    """

    def __init__(self, impedance=None, v0=1.0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                 convention="consumption"):
        self.impedance = impedance
        self.v0 = v0
        self.tol = tol
        self.max_iter = max_iter
        self.convention = convention

    @classmethod
    def from_network(cls, net: Network, **params):
        return cls(impedance=net.impedance().entries, v0=net.v0, **params)

    def fit(self, X=None, y=None):
        if self.impedance is None:
            raise ValueError("impedance must be set before fit")
        if self.convention not in ("consumption", "injection"):
            raise ValueError("convention must be 'consumption' or 'injection'")
        self.impedance_ = check_impedance(self.impedance)
        self.v0_ = check_v0(self.v0)
        self.n_buses_ = self.impedance_.shape[0]
        return self

    def _injections(self, X):
        S = check_loads(X, self.n_buses_)
        return -S if self.convention == "consumption" else S

    def _iterate(self, X):
        check_is_fitted(self, "n_buses_")
        S = self._injections(X)
        return S, iterate_batch(self.impedance_, S, self.v0_, tol=self.tol, max_iter=self.max_iter)

    def transform(self, X):
        S, res = self._iterate(X)
        V = np.full(S.shape, np.nan + 0j)
        for k in np.flatnonzero(res.converged):
            V[k], _ = recover(self.impedance_, S[k], self.v0_, res.f[k])
        return V

    def converged(self, X):
        return self._iterate(X)[1].converged
