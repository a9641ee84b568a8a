"""Estimator-style wrappers around the solvers and the asymptotic analysis.

The wrappers follow the scikit-learn conventions: hyperparameters are
constructor arguments, ``fit`` returns ``self`` and learned state ends with an
underscore.  Inputs may be the package's own types or plain arrays; the
``check_*`` helpers do the conversion.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .analysis import estimate_sqrt_asymptote, measure_tail_geometry, regularity
from .core import DrivingTerm, Trace
from .errors import ArgumentError
from .forward import SolverConfig, build_chain, solve_trace
from .inverse import CurveSamples, drive_curve

__all__ = ["check_driving", "check_curve", "check_trace", "ForwardLoewner", "Unzipper",
           "SqrtAsymptote", "TailGeometryEstimator"]


def check_driving(X):
    """DrivingTerm from a DrivingTerm or an ``(n, 2)`` array of ``(t, lambda)`` rows.

    >>> check_driving([[0.0, 1.0], [1.0, 1.0]]).total_capacity
    1.0
    """
    if isinstance(X, DrivingTerm):
        return X
    a = np.asarray(X, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2:
        raise ArgumentError("driving data must have shape (n, 2)")
    return DrivingTerm(a[:, 0], a[:, 1])


def check_curve(X):
    """CurveSamples from samples, complex points or an ``(n, 2)`` array of ``(x, y)``."""
    if isinstance(X, CurveSamples):
        return X
    a = np.asarray(X)
    if np.iscomplexobj(a):
        return CurveSamples(a.ravel())
    a = a.astype(float)
    if a.ndim != 2 or a.shape[1] != 2:
        raise ArgumentError("curve data must be complex or have shape (n, 2)")
    return CurveSamples(a[:, 0] + 1j * a[:, 1])


def check_trace(X):
    """Trace from a Trace or an ``(n, 3)`` array of ``(t, x, y)`` rows."""
    if isinstance(X, Trace):
        return X
    a = np.asarray(X, dtype=float)
    if a.ndim != 2 or a.shape[1] != 3:
        raise ArgumentError("trace data must have shape (n, 3)")
    return Trace(a[:, 0], a[:, 1] + 1j * a[:, 2])


class ForwardLoewner(TransformerMixin, BaseEstimator):
    """Map chain and trace of a driving term.

    ``transform`` applies the conformal map ``g_T`` to points,
    ``inverse_transform`` its inverse, ``predict`` returns trace points.

    >>> est = ForwardLoewner(n_steps=256).fit(DrivingTerm.constant(0.0))
    >>> bool(abs(est.predict([1.0])[0] - 2j) < 1e-12)
    True
    """

    def __init__(self, n_steps=1024, grid="uniform_t", tail_fraction=0.5):
        self.n_steps = n_steps
        self.grid = grid
        self.tail_fraction = tail_fraction

    def fit(self, X, y=None):
        lam = check_driving(X)
        cfg = SolverConfig(self.n_steps, self.grid, self.tail_fraction)
        self.driving_ = lam
        self.chain_ = build_chain(lam, cfg)
        self.trace_ = solve_trace(lam, cfg)
        return self

    def transform(self, X):
        check_is_fitted(self, "chain_")
        return self.chain_.forward(np.asarray(X, dtype=complex))

    def inverse_transform(self, X):
        check_is_fitted(self, "chain_")
        return self.chain_.inverse(np.asarray(X, dtype=complex))

    def predict(self, t):
        check_is_fitted(self, "trace_")
        return self.trace_.at(np.asarray(t, dtype=float))


class Unzipper(BaseEstimator):
    """Driving term of a sampled curve; ``predict`` evaluates it at capacity times."""

    def __init__(self, tol=1e-10):
        self.tol = tol

    def fit(self, X, y=None):
        self.curve_ = check_curve(X)
        self.driving_ = drive_curve(self.curve_, self.tol)
        self.total_capacity_ = self.driving_.total_capacity
        return self

    def predict(self, t):
        check_is_fitted(self, "driving_")
        return self.driving_(np.asarray(t, dtype=float))


class SqrtAsymptote(BaseEstimator):
    """Fits ``lam(t) ~ lam(1) + kappa*sqrt(1 - t)`` near ``t = 1``.

    ``kappa_`` is the unsigned limit, ``sign_`` the side from which the
    driving term approaches ``lambda_at_1_``.
    """

    def __init__(self, a=0.5, levels=40, horizon=1.0, deltas=(0.04, 0.01, 0.0025)):
        self.a = a
        self.levels = levels
        self.horizon = horizon
        self.deltas = deltas

    def fit(self, X, y=None):
        lam = check_driving(X)
        rep = estimate_sqrt_asymptote(lam, self.a, self.levels, self.horizon)
        self.report_ = rep
        self.regularity_ = regularity(lam, self.deltas, self.horizon)
        self.lambda_at_1_ = rep.lambda_at_1
        self.kappa_ = rep.kappa_limit
        t_last = rep.kappa_hats[-1][0]
        self.sign_ = 1.0 if float(lam(t_last)) >= rep.lambda_at_1 else -1.0
        return self

    def predict(self, t):
        check_is_fitted(self, "report_")
        gap = np.maximum(self.horizon - np.asarray(t, dtype=float), 0.0)
        return self.lambda_at_1_ + self.sign_ * self.kappa_ * np.sqrt(gap / self.horizon)


class TailGeometryEstimator(BaseEstimator):
    """Endpoint regime and geometry of a trace; ``kappa`` is the asymptotic ratio."""

    def __init__(self, kappa=None, shells=3, horizon=None):
        self.kappa = kappa
        self.shells = shells
        self.horizon = horizon

    def fit(self, X, y=None):
        if self.kappa is None:
            raise ArgumentError("kappa must be set before fitting")
        tr = check_trace(X)
        self.geometry_ = measure_tail_geometry(tr, self.kappa, self.shells,
                                               horizon=self.horizon)
        self.regime_ = self.geometry_.regime
        self.endpoint_ = self.geometry_.endpoint
        return self
