"""Closed-form maps and traces for the driving terms ``kappa*sqrt(1 - t)``.

Three regimes, chosen by exact comparison of ``|kappa|`` with 4:

collision (``|kappa| > 4``)
    ``k(z) = exp(i*pi*theta) * (z - A)**(1 - theta) / (z - B)``; the trace is
    the preimage of the ray ``arg k = pi*theta`` and lands on ``B`` at angle
    ``pi*(1 - theta)`` against ``[B, +inf)``.
spiral (``|kappa| < 4``)
    ``k(z) = k1(z) / k1(kappa)`` with ``k1(z) = (z - beta) * (z - conj(beta))**exp(2i*theta)``;
    the trace spirals into ``beta = 2i*exp(i*theta)``.
tangential (``|kappa| = 4``)
    ``k(z) = (4 - z)/(2 - z) + log(2/(2 - z))``; the trace ends at 2, tangent to R.

``kappa = 0`` is reported as the ``"trivial"`` regime but shares the spiral
formulas (they reduce to the vertical slit ``2i*sqrt(t)``).  Negative
``kappa`` is handled by the reflection ``z -> -conj(z)``.

Powers and logarithms use the principal branch on the closed upper
half-plane: every log argument below lies in closed H, where ``arg`` is
continuous, lies in ``[0, pi]`` and tends to 0 at ``+inf``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import Trace
from .errors import ArgumentError, ConvergenceError, DomainError

__all__ = ["FamilyParams", "params_from_kappa", "k_map", "k_derivative", "k_inverse",
           "flow_value", "trace_explicit", "G_explicit", "F_explicit", "g_explicit"]


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of the self-similar family driven by ``kappa*sqrt(1 - t)``.

    For ``sign = -1`` the geometric fields (``A``, ``B``, ``beta``,
    ``endpoint``) are already reflected; ``theta`` is that of ``|kappa|``.
    """

    kappa: float
    regime: str
    theta: float
    A: float
    B: float
    beta: complex | None
    endpoint: complex
    sign: int = 1

    @property
    def angle(self):
        """Landing angle ``pi*(1 - theta)`` against the outward real ray at the endpoint.

        The ray is ``[B, +inf)`` for ``sign = +1`` and ``(-inf, B]`` for ``sign = -1``.
        Zero for the tangential regime, ``None`` for spirals.
        """
        if self.regime == "collision":
            return math.pi * (1.0 - self.theta)
        if self.regime == "tangential":
            return 0.0
        return None

    def positive(self):
        """Parameters of ``|kappa|``."""
        return self if self.sign > 0 else params_from_kappa(-self.kappa)

    def as_dict(self):
        def cplx(w):
            return None if w is None else [float(w.real), float(w.imag)]
        return {"kappa": self.kappa, "regime": self.regime, "theta": self.theta,
                "A": self.A, "B": self.B, "beta": cplx(self.beta),
                "endpoint": cplx(self.endpoint), "sign": self.sign, "angle": self.angle}


def params_from_kappa(kappa):
    """Family parameters for ``lambda(t) = kappa*sqrt(1 - t)``.

    >>> p = params_from_kappa(5.0)
    >>> (p.regime, p.theta, p.A, p.B)
    ('collision', 0.75, 4.0, 1.0)
    >>> params_from_kappa(4.0).endpoint
    (2+0j)
    """
    kappa = float(kappa)
    if not math.isfinite(kappa):
        raise ArgumentError("kappa must be finite")
    k = abs(kappa)
    if k > 4.0:
        # u = sqrt(1 - theta), written without cancellation for large kappa
        w = k + math.sqrt((k - 4.0) * (k + 4.0))
        u = 4.0 / w
        theta = 1.0 - u * u
        A, B = 0.5 * w, 8.0 / w
        p = FamilyParams(k, "collision", theta, A, B, None, complex(B, 0.0))
    elif k == 4.0:
        p = FamilyParams(k, "tangential", 0.0, 2.0, 2.0, None, complex(2.0, 0.0))
    else:
        theta = -math.asin(k / 4.0)
        beta = 2j * complex(math.cos(theta), math.sin(theta))
        regime = "trivial" if k == 0.0 else "spiral"
        p = FamilyParams(k, regime, theta, 0.0, 0.0, beta, beta)
    if kappa >= 0.0:
        return p

    def mirror(w):
        return None if w is None else complex(-w.real, w.imag)

    return FamilyParams(kappa, p.regime, p.theta, -p.A, -p.B, mirror(p.beta),
                        mirror(p.endpoint), -1)


# --------------------------------------------------------------- the maps

def _log_up(w):
    """Principal log for arguments in closed H (a stray ``-0.0`` imaginary part is lifted)."""
    w = np.asarray(w, dtype=complex)
    return np.log(np.where(w.imag > 0.0, w, w.real + 0j))


def _unit(x):
    return complex(math.cos(x), math.sin(x))


def _check_singular(p, z):
    z = np.asarray(z, dtype=complex)
    if p.regime == "collision":
        bad = (z == p.A) | (z == p.B)
    elif p.regime == "tangential":
        bad = z == 2.0
    else:
        bad = np.zeros(z.shape, dtype=bool)
    if np.any(bad):
        raise DomainError("evaluation at a singular point of k")


def _log_k(p, z):
    """``log k`` for the collision regime (single-valued on closed H)."""
    th = p.theta
    return 1j * math.pi * th + (1.0 - th) * _log_up(z - p.A) - _log_up(z - p.B)


def _dlog_k(p, z):
    return (1.0 - p.theta) / (z - p.A) - 1.0 / (z - p.B)


def _d2log_k(p, z):
    return -(1.0 - p.theta) / (z - p.A) ** 2 + 1.0 / (z - p.B) ** 2


def _spiral_consts(p):
    beta = p.beta
    e2 = _unit(2.0 * p.theta)
    k1k = (p.kappa - beta) * np.exp(e2 * _log_up(p.kappa - np.conj(beta)))
    return beta, e2, k1k


def _k_pos(p, z):
    z = np.asarray(z, dtype=complex)
    if p.regime == "collision":
        return np.exp(_log_k(p, z))
    if p.regime == "tangential":
        w = 2.0 / (2.0 - z)
        return 1.0 + w + _log_up(w)
    beta, e2, k1k = _spiral_consts(p)
    return (z - beta) * np.exp(e2 * _log_up(z - np.conj(beta))) / k1k


def _dk_pos(p, z):
    z = np.asarray(z, dtype=complex)
    if p.regime == "collision":
        return _k_pos(p, z) * _dlog_k(p, z)
    if p.regime == "tangential":
        return (4.0 - z) / (2.0 - z) ** 2
    beta, e2, k1k = _spiral_consts(p)
    return np.exp(e2 * _log_up(z - np.conj(beta))) / k1k * (1.0 + e2 * (z - beta) / (z - np.conj(beta)))


def _d2k_pos(p, z):
    if p.regime == "tangential":
        return (6.0 - z) / (2.0 - z) ** 3
    h = 1e-4 * (1.0 + abs(z))
    return (_dk_pos(p, z + h) - _dk_pos(p, z - h)) / (2.0 * h)


def _refl(z):
    return -np.conj(z)


def k_map(p, z):
    """Uniformizing map ``k`` of the family (vectorized).

    >>> bool(abs(k_map(params_from_kappa(4.0), 4.0) - 1j * math.pi) < 1e-15)
    True
    """
    _check_singular(p, z)
    if p.sign > 0:
        return _k_pos(p, z)
    return np.conj(_k_pos(p.positive(), _refl(np.asarray(z, dtype=complex))))


def k_derivative(p, z):
    _check_singular(p, z)
    if p.sign > 0:
        return _dk_pos(p, z)
    return -np.conj(_dk_pos(p.positive(), _refl(np.asarray(z, dtype=complex))))


# ------------------------------------------------------------------ Newton

_EPS = np.finfo(float).eps


def _newton(F, dF, z, tol, maxit=50):
    # The attainable residual is limited by rounding in z itself.
    z = complex(z)
    r = complex(F(z))
    for _ in range(maxit):
        d = complex(dF(z))
        floor = 8.0 * _EPS * abs(z) * abs(d) if math.isfinite(abs(d)) else 0.0
        if abs(r) <= max(tol, floor):
            return z, abs(r)
        if d == 0.0 or not math.isfinite(abs(d)):
            raise ConvergenceError("vanishing derivative in Newton iteration", z, abs(r))
        step = r / d
        lam = 1.0
        for _ in range(40):
            zn = z - lam * step
            if zn.imag < 0.0:
                if zn.imag > -1e-13 * (1.0 + abs(zn)):
                    zn = complex(zn.real, 0.0)
                else:
                    lam *= 0.5
                    continue
            try:
                rn = complex(F(zn))
            except DomainError:
                lam *= 0.5
                continue
            if math.isfinite(abs(rn)) and (abs(rn) < abs(r) or abs(rn) <= max(tol, floor)):
                break
            lam *= 0.5
        else:
            raise ConvergenceError("Newton line search failed", z, abs(r))
        z, r = zn, rn
    d = complex(dF(z))
    if abs(r) <= max(tol, 8.0 * _EPS * abs(z) * abs(d)):
        return z, abs(r)
    raise ConvergenceError("Newton iteration did not converge", z, abs(r))


def _solve_pos(p, target, seed, logform, tol=1e-12, log_tol=None):
    """Solve ``k(z) = target`` (or ``log k(z) = target`` in log form) for ``|kappa|`` params.

    ``log_tol`` replaces the residual bound on ``k`` by an absolute bound on
    ``log k``, i.e. a relative bound on ``k``.
    """
    if logform:
        w_abs = math.exp(min(target.real, 700.0))
        tol_l = tol * (1.0 + w_abs) / max(w_abs, 1e-300)
        if log_tol is not None:
            tol_l = log_tol
        with np.errstate(all="ignore"):
            return _newton(lambda z: complex(_log_k(p, z)) - target,
                           lambda z: complex(_dlog_k(p, z)), seed, min(tol_l, 1e-2))
    with np.errstate(all="ignore"):
        return _newton(lambda z: complex(_k_pos(p, z)) - target,
                       lambda z: complex(_dk_pos(p, z)), seed, tol * (1.0 + abs(target)))


def k_inverse(p, w, seed, tol=1e-12):
    """Solve ``k_map(p, z) = w`` by damped Newton from ``seed``.

    The returned ``z`` satisfies ``|k(z) - w| <= tol*(1 + |w|)``.

    Raises
    ------
    ConvergenceError
        Carries the last iterate and residual.
    """
    w = complex(w)
    seed = complex(seed)
    q = p.positive()
    if p.sign < 0:
        w, seed = w.conjugate(), _refl(seed)
    if q.regime == "collision":
        z, _ = _solve_pos(q, complex(_log_up(w)), seed, True, tol)
    else:
        z, _ = _solve_pos(q, w, seed, False, tol)
    return z if p.sign > 0 else complex(_refl(z))


# ------------------------------------------------------------ flow & trace

def flow_value(p, s):
    """Value of ``k`` along the trace at log-time ``s`` (for ``|kappa|``)."""
    q = p.positive()
    if q.regime == "collision":
        return complex(np.exp(_log_k(q, q.kappa) + 0.5 * s * q.theta))
    if q.regime == "tangential":
        return complex(1j * math.pi + 0.5 * s)
    return complex(np.exp(-s * math.cos(q.theta) * _unit(q.theta)))


def _trace_target(q, s):
    """Equation target along the trace; log form for collisions."""
    if q.regime == "collision":
        return complex(_log_k(q, q.kappa)) + 0.5 * s * q.theta, True
    return flow_value(q, s), False


def _continue(q, targets, z0, s_nodes, z_start=None, quad_seed=None, h0=1e-3,
              h_max=0.25, what="trace", log_tol=None):
    """Newton continuation ``z(s)`` solving ``F(z) = target(s)`` through ``s_nodes``."""
    out = np.empty(len(s_nodes), dtype=complex)
    hist = [(0.0, complex(z0))]
    s_cur = 0.0
    h = h0
    for i, s_goal in enumerate(s_nodes):
        s_goal = float(s_goal)
        while s_cur < s_goal:
            s_try = min(s_cur + h, s_goal)
            if len(hist) >= 2:
                (s1, z1), (s2, z2) = hist[-2], hist[-1]
                seed = z2 + (z2 - z1) * (s_try - s2) / (s2 - s1)
            elif quad_seed is not None:
                seed = quad_seed(s_try)
            else:
                seed = hist[-1][1]
            target, logform = targets(s_try)
            try:
                z, _ = _solve_pos(q, target, seed, logform, log_tol=log_tol)
                z_prev = hist[-1][1]
                if abs(z - seed) > 2.0 * abs(seed - z_prev) + 1e-10 * (1.0 + abs(z)) and len(hist) >= 2:
                    raise ConvergenceError("continuation jumped branches", z, None)
            except ConvergenceError:
                h *= 0.5
                if h < 1e-13:
                    raise ConvergenceError(f"{what} continuation failed at s = {s_try!r}")
                continue
            hist.append((s_try, z))
            if len(hist) > 3:
                hist.pop(0)
            s_cur = s_try
            h = min(2.0 * h, h_max)
        out[i] = hist[-1][1]
    return out


def trace_explicit(p, s_grid):
    """Exact trace sampled at log-times ``s_grid`` (increasing from 0).

    Returns a :class:`Trace` whose ``t = 1 - exp(-s)`` and which stores ``s``.

    >>> tr = trace_explicit(params_from_kappa(3 * math.sqrt(2)), [0.0, 1.0, 5.0])
    >>> bool(np.all(abs(abs(tr.z - 2 * math.sqrt(2)) - math.sqrt(2)) < 1e-10))
    True
    """
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or s.size == 0 or s[0] != 0.0 or np.any(np.diff(s) <= 0.0):
        raise ArgumentError("s_grid must be increasing from 0")
    q = p.positive()
    kap = q.kappa
    if q.regime == "collision":
        c2 = complex(_d2log_k(q, kap))

        def quad_seed(ss):
            return kap + _upper_root(ss * q.theta / c2)
    else:
        c2 = complex(_d2k_pos(q, kap))
        k0 = flow_value(q, 0.0)

        def quad_seed(ss):
            return kap + _upper_root(2.0 * (flow_value(q, ss) - k0) / c2)

    z = _continue(q, lambda ss: _trace_target(q, ss), kap, s, quad_seed=quad_seed)
    z[0] = kap
    if p.sign < 0:
        z = _refl(z)
    return Trace(-np.expm1(-s), z, s=s)


def _upper_root(w):
    r = np.sqrt(complex(w))
    return r if r.imag >= 0.0 else -r


def _G_pos(q, s, z, inverse=False):
    """``G_s(z)`` (or ``F_s = G_s^{-1}``) for ``|kappa|`` params."""
    z = complex(z)
    sgn = -1.0 if inverse else 1.0
    if q.regime == "collision":
        L0 = complex(_log_k(q, z))

        def targets(ss):
            return L0 - sgn * 0.5 * ss * q.theta, True
    elif q.regime == "tangential":
        k0 = complex(_k_pos(q, z))

        def targets(ss):
            return k0 - sgn * 0.5 * ss, False
    else:
        k0 = complex(_k_pos(q, z))
        rate = math.cos(q.theta) * _unit(q.theta)

        def targets(ss):
            return k0 * np.exp(sgn * ss * rate), False
    try:
        return complex(_continue(q, targets, z, [s], what="map", log_tol=1e-14)[0])
    except ConvergenceError as exc:
        raise DomainError(f"point {z!r} lies on or inside the hull at s = {s!r}") from exc


def _vectorized(fn, p, s, z):
    q = p.positive()
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    if p.sign < 0:
        flat = _refl(flat)
    out = np.array([fn(q, s, w) for w in flat], dtype=complex)
    if p.sign < 0:
        out = _refl(out)
    return complex(out[0]) if z.ndim == 0 else out.reshape(z.shape)


def G_explicit(p, s, z):
    """Time-changed map ``G_s = g_t/sqrt(1 - t)`` with ``t = 1 - exp(-s)``."""
    _check_singular(p, z)
    if s == 0.0:
        return z
    return _vectorized(_G_pos, p, float(s), z)


def F_explicit(p, s, w):
    """``F_s = G_s^{-1}``."""
    if s == 0.0:
        return w
    return _vectorized(lambda q, ss, ww: _G_pos(q, ss, ww, inverse=True), p, float(s), w)


def g_explicit(p, t, z):
    """Normalized conformal map ``g_t`` of the family at capacity ``t`` in ``[0, 1)``.

    >>> g = g_explicit(params_from_kappa(2.0), 0.3, 1e4j)
    >>> abs(g - 1e4j - 0.6 / 1e4j) < 1e-6
    True
    """
    if not 0.0 <= t < 1.0:
        raise DomainError("t must lie in [0, 1)")
    if t == 0.0:
        return z
    s = -math.log1p(-t)
    return math.sqrt(1.0 - t) * G_explicit(p, s, z)
