"""Renormalization, square-root asymptotes, local regularity and tail geometry."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import _kernels
from .core import Affine, Constant, DrivingTerm, SigmaTerm, SqrtFamily, Trace, _affine
from .errors import ArgumentError, ContractError, DomainError
from .forward import SolverConfig, sigma_chain, solve_on_nodes, split_nodes

__all__ = ["AsymptoteReport", "RegularityReport", "TailGeometry", "renormalize_driving",
           "renormalized_trace", "estimate_sqrt_asymptote", "local_lip_half",
           "regularity", "measure_tail_geometry", "shell_diameters",
           "interval_lemma_check", "collision_angle", "analyze_driving"]

# |kappa - 4| below this leaves the regime to the tangential model.
TANGENTIAL_BAND = 0.1


# ---------------------------------------------------------------- reports

@dataclass(frozen=True)
class AsymptoteReport:
    """Square-root asymptote ``lam(t) ~ lam(1) + kappa*sqrt(1 - t)``.

    ``kappa_hats`` pairs ``t_n = 1 - a**n`` with the ratio estimate at
    that time.  ``truncated`` is set when the data ran out before the
    requested number of levels.
    """

    lambda_at_1: float
    lambda_at_1_error: float
    kappa_hats: tuple
    kappa_limit: float
    a: float
    last_reliable_n: int
    truncated: bool

    @property
    def kappa_tail(self):
        return self.kappa_hats[-1][1]

    def as_dict(self):
        return {"lambda_at_1": self.lambda_at_1, "lambda_at_1_error": self.lambda_at_1_error,
                "kappa_limit": self.kappa_limit,
                "kappa_hats": [[t, k] for t, k in self.kappa_hats],
                "a": self.a, "last_reliable_n": self.last_reliable_n,
                "truncated": self.truncated}


@dataclass(frozen=True)
class RegularityReport:
    deltas: tuple
    local_lip_norms: tuple

    def as_dict(self):
        return {"deltas": list(self.deltas), "local_lip_norms": list(self.local_lip_norms)}


@dataclass(frozen=True)
class TailGeometry:
    """Endpoint geometry of a trace.

    ``angle`` (collision and tangential regimes) is measured at the endpoint
    from the positive real direction; for the tangential regime it is the
    deviation from the real line.  ``center`` and ``pitch`` describe the
    limiting logarithmic spiral.
    """

    regime: str
    endpoint: complex = None
    angle: float = None
    center: complex = None
    pitch: float = None
    expected_angle: float = None
    expected_pitch: float = None
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self):
        def cx(z):
            return None if z is None else [z.real, z.imag]
        return {"regime": self.regime, "endpoint": cx(self.endpoint), "angle": self.angle,
                "center": cx(self.center), "pitch": self.pitch,
                "expected_angle": self.expected_angle, "expected_pitch": self.expected_pitch,
                "diagnostics": self.diagnostics}


# ---------------------------------------------------------- renormalization

def renormalize_driving(lam, T):
    """``lam_T(t) = lam(T + t*(1 - T)) / sqrt(1 - T)`` on ``[0, 1]``.

    Square-root families stay in their family with the offset divided by
    ``sqrt(1 - T)``.  A term that stops short of capacity 1 (a truncated
    normalized term) renormalizes onto ``[0, (T_end - T)/(1 - T)]``.

    >>> lam = renormalize_driving(DrivingTerm.sqrt_family(3.0, 1.0), 0.75)
    >>> lam.form
    SqrtFamily(kappa=3.0, offset=2.0, horizon=1.0)
    """
    T_end = _check_renormalizable(lam, T)
    T = float(T)
    if T == 0.0:
        return lam
    r = math.sqrt(1.0 - T)
    keep = lam.t > T
    t = np.concatenate([[0.0], (lam.t[keep] - T) / (1.0 - T)])
    t[-1] = 1.0 if T_end == 1.0 else (T_end - T) / (1.0 - T)
    v = np.concatenate([[float(lam(T))], lam.values[keep]]) / r
    f = lam.form
    if isinstance(f, Constant):
        form = Constant(f.value / r)
    elif isinstance(f, SqrtFamily) and f.horizon == 1.0:
        form = SqrtFamily(f.kappa, f.offset / r, 1.0)
    elif f is not None:
        form = _affine(f, gain=1.0 / r, time_gain=1.0 - T, time_shift=T)
    else:
        form = None
    if np.any(np.diff(t) <= 0.0):
        t, idx = np.unique(t, return_index=True)
        v = v[idx]
    return DrivingTerm(t, v, form)


def renormalized_trace(lam, T, cfg=None):
    """Trace of the renormalized driving term obtained by pulling down ``gamma[0, T]``.

    The trace of ``lam`` is computed on a grid with a node at ``T``; the
    samples after ``T`` are mapped by the chain of ``[0, T]`` and scaled by
    ``1/sqrt(1 - T)``.
    """
    cfg = cfg or SolverConfig()
    T_end = _check_renormalizable(lam, T)
    if T == 0.0:
        from .forward import solve_trace
        return solve_trace(lam, cfg)
    nodes = split_nodes(T_end, T, cfg)
    chain, tr = solve_on_nodes(lam, nodes)
    k = int(cfg.n_steps)
    r = math.sqrt(1.0 - T)
    head = chain.prefix(k)
    tail = tr.z[k + 1:]
    img = head.forward(tail)
    z = np.concatenate([[float(lam(T))], img]) / r
    t = (nodes[0][k:] - T) / (1.0 - T)
    t[0] = 0.0
    t[-1] = 1.0 if T_end == 1.0 else (T_end - T) / (1.0 - T)
    return Trace(t, z)


def _check_renormalizable(lam, T, tol=1e-12):
    """Total capacity, snapped to 1 when within ``tol``; must not exceed 1."""
    T_end = lam.total_capacity
    if T_end > 1.0 + tol:
        raise ContractError("renormalization needs total capacity at most 1; rescale first")
    if abs(T_end - 1.0) <= tol:
        T_end = 1.0
    if not 0.0 <= T < T_end:
        raise DomainError(f"renormalization time must lie in [0, {T_end!r})")
    return T_end


# ------------------------------------------------------------- asymptotes

def _value_at_gap(lam, gap, horizon):
    """``lam(horizon - gap)`` without cancellation for square-root data."""
    gap = np.asarray(gap, dtype=float)
    f = lam.form
    if isinstance(f, SqrtFamily) and f.horizon == horizon:
        return f.offset + f.kappa * np.sqrt(gap)
    if f is not None:
        return f(horizon - gap)
    # sampled: interpolate linearly in u = sqrt(horizon - t)
    g = horizon - lam.t
    ok = g >= 0.0
    u = np.sqrt(g[ok])[::-1]
    v = lam.values[ok][::-1]
    return np.interp(np.sqrt(gap), u, v)


def _richardson(u, x):
    """Value at ``u = 0`` of the quadratic through three points ``(u, x)``."""
    u0, u1, u2 = u
    x0, x1, x2 = x
    # weights sum to 1; correction form keeps constant data exact
    w0 = u1 * u2 / ((u0 - u1) * (u0 - u2))
    w1 = u0 * u2 / ((u1 - u0) * (u1 - u2))
    return x2 + w0 * (x0 - x2) + w1 * (x1 - x2)


def estimate_sqrt_asymptote(lam, a=0.5, levels=40, horizon=1.0, min_samples=3):
    """Estimate ``lam(1)`` and ``kappa = lim |lam(1) - lam(t)| / sqrt(1 - t)``.

    Evaluation times are ``t_n = horizon*(1 - a**n)``.  Tagged forms are
    evaluated exactly; sampled data is used only down to the level that still
    has ``min_samples`` samples in ``[t_n, horizon)``, and the report is
    flagged as truncated when that cuts the requested range.

    >>> rep = estimate_sqrt_asymptote(DrivingTerm.sqrt_family(4.0), levels=10)
    >>> rep.lambda_at_1, {k for _, k in rep.kappa_hats}, rep.kappa_limit
    (0.0, {4.0}, 4.0)
    """
    if not 0.0 < a < 1.0:
        raise DomainError("dyadic ratio must lie in (0, 1)")
    T = lam.total_capacity
    if T > horizon * (1.0 + 1e-12):
        raise ContractError("driving term extends beyond the horizon; normalize first")
    n_req = int(levels)
    if n_req < 3:
        raise ArgumentError("need at least three levels")
    gaps = horizon * a ** np.arange(1, n_req + 1)
    n_ok = n_req
    if lam.form is None:
        rem = horizon - lam.t
        counts = np.array([np.count_nonzero((rem > 0.0) & (rem <= g)) for g in gaps])
        inside = gaps > horizon - T
        ok = (counts >= min_samples) & inside
        n_ok = int(np.flatnonzero(~ok)[0]) if not np.all(ok) else n_req
    if n_ok < 3:
        raise ContractError("too few samples near the horizon for an asymptote")
    gaps = gaps[:n_ok]
    x = _value_at_gap(lam, gaps, horizon)

    reaches = abs(T - horizon) <= 1e-12 * horizon
    u = np.sqrt(gaps / horizon)
    ext = _richardson(u[-3:], x[-3:])
    if isinstance(lam.form, SqrtFamily) and lam.form.horizon == horizon:
        lam1, err = float(lam.form.offset), 0.0
    elif lam.form is not None and reaches:
        lam1 = float(lam.form(horizon))
        err = abs(ext - lam1)
    elif reaches:
        lam1 = float(lam.values[-1])
        err = abs(ext - lam1)
    else:
        lam1 = float(ext)
        err = abs(_richardson(u[-4:-1], x[-4:-1]) - ext) if n_ok >= 4 else abs(x[-1] - ext)
    k = np.abs(lam1 - x) / u
    t_n = horizon - gaps
    klim = float(_richardson(u[-3:], k[-3:]))
    return AsymptoteReport(lam1, float(err), tuple(zip(t_n.tolist(), k.tolist())), klim,
                           float(a), n_ok, n_ok < n_req)


def local_lip_half(lam, delta, horizon=None):
    """Sampled local Lip-1/2 norm with window ``|t - t'| < delta*(horizon - t)``.

    Pairs ``t < t' < horizon`` of sample times are scanned; the horizon
    defaults to the total capacity.

    >>> lam = DrivingTerm.sqrt_family(4.0, n=2001)
    >>> local_lip_half(lam, 0.01) <= 0.4
    True
    """
    if not delta > 0.0:
        raise DomainError("delta must be positive")
    H = lam.total_capacity if horizon is None else float(horizon)
    keep = lam.t < H
    t = lam.t[keep]
    v = lam.values[keep]
    if t.size < 2:
        return 0.0
    jmax = np.searchsorted(t, t + delta * (H - t), side="left") - 1
    span = jmax - np.arange(t.size)
    best = 0.0
    for off in range(1, int(span.max()) + 1 if span.size else 1):
        i = np.flatnonzero(span >= off)
        if i.size == 0:
            break
        r = np.abs(v[i + off] - v[i]) / np.sqrt(t[i + off] - t[i])
        best = max(best, float(r.max()))
    return best


def regularity(lam, deltas=(0.04, 0.01, 0.0025), horizon=None):
    return RegularityReport(tuple(float(d) for d in deltas),
                            tuple(local_lip_half(lam, d, horizon) for d in deltas))


# -------------------------------------------------------------- geometry

def collision_angle(kappa):
    """Interior angle ``pi*(1 - theta)`` at which a self-similar trace returns to R.

    >>> round(collision_angle(5.0) / math.pi, 12)
    0.25
    """
    k = abs(float(kappa))
    if k <= 4.0:
        raise DomainError("collision needs |kappa| > 4")
    q = math.sqrt(1.0 - 16.0 / (k * k))
    return math.pi * (1.0 - q) / (1.0 + q)


def _spiral_theta(kappa):
    return -math.asin(max(-1.0, min(1.0, kappa / 4.0)))


def _uniform_tail(trace, s_lo, s_hi, m, horizon=None):
    s = _log_time(trace, horizon)
    ok = np.isfinite(s)
    s, z = s[ok], trace.z[ok]
    grid = np.linspace(s_lo, s_hi, m)
    return grid, np.interp(grid, s, z.real) + 1j * np.interp(grid, s, z.imag)


def _log_time(trace, horizon=None):
    if trace.s is not None and horizon is None:
        return np.asarray(trace.s)
    H = trace.t[-1] if horizon is None else float(horizon)
    with np.errstate(divide="ignore"):
        return np.log(H / (H - trace.t))


def _recurrence_fit(z):
    """Least squares ``z[j+1] = q*z[j] + p``; returns ``(q, fixed point, residual)``."""
    M = np.column_stack([z[:-1], np.ones(z.size - 1)])
    (q, p), *_ = np.linalg.lstsq(M, z[1:], rcond=None)
    res = float(np.max(np.abs(M @ np.array([q, p]) - z[1:])))
    return complex(q), complex(p / (1.0 - q)), res


def _linear_extrapolate(x, y):
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def _solve_w(rhs):
    """Solve ``W + Log(W) = rhs`` for complex ``rhs`` with large real part."""
    w = rhs - np.log(np.where(np.abs(rhs) > 1.0, rhs, 1.0))
    for _ in range(60):
        step = (w + np.log(w) - rhs) / (1.0 + 1.0 / w)
        w = w - step
        if np.max(np.abs(step)) < 1e-15 * np.max(np.abs(w)):
            break
    return w


def _tangential_fit(s, z):
    """Fit ``z = e + c1/W + c2/W**2`` with ``W + Log(W) = s/2 + C``.

    ``C`` enters nonlinearly and is found by variable projection; the
    coefficients are then linear least squares.  Returns ``(e, c1, C, rms)``.
    """
    def design(C):
        v = 1.0 / _solve_w(0.5 * s + C)
        return np.column_stack([np.ones_like(v), v, v * v])

    def resid(p):
        B = design(complex(p[0], p[1]))
        coef, *_ = np.linalg.lstsq(B, z, rcond=None)
        r = B @ coef - z
        return np.concatenate([r.real, r.imag])

    best = None
    for c0 in (0.0, -1.0, 1.0):
        for c1 in (0.5 * math.pi, math.pi, 1.5 * math.pi):
            try:
                sol = least_squares(resid, [c0, c1], xtol=1e-14, ftol=1e-14, gtol=1e-14)
            except (FloatingPointError, ValueError, np.linalg.LinAlgError):
                continue
            if np.all(np.isfinite(sol.fun)) and (best is None or sol.cost < best.cost):
                best = sol
    C = complex(best.x[0], best.x[1])
    B = design(C)
    coef, *_ = np.linalg.lstsq(B, z, rcond=None)
    rms = float(np.sqrt(2.0 * best.cost / s.size))
    return complex(coef[0]), complex(coef[1]), C, rms


def _poly_intercept(v, y, degree):
    B = np.vander(v, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(B, y, rcond=None)
    return coef[0]


def measure_tail_geometry(trace, kappa, shells=3, per_shell=32, a=0.5, horizon=None):
    """Classify the end of ``trace`` and measure its endpoint geometry.

    Log-time is taken relative to ``horizon`` (default: the final trace
    time).  The fit window is
    the ``shells`` dyadic shells before the last one; the last shell is
    left out because it touches the solver resolution.  Collision and
    spiral tails are fitted by a geometric recurrence in log-time, whose
    fixed point is the endpoint or spiral center.  Near ``|kappa| = 4`` the
    approach is algebraic in log-time and a ``1/s`` expansion over the whole
    tail is used instead.
    """
    kappa = float(kappa)
    s_all = _log_time(trace, horizon)
    finite = np.isfinite(s_all)
    if np.count_nonzero(finite) < 8:
        return TailGeometry("undetermined", diagnostics={"reason": "too few samples"})
    s_end = float(s_all[finite][-2])
    shell = -math.log(a)
    s_hi = s_end - shell
    s_lo = s_hi - shells * shell
    if s_lo < shell:
        return TailGeometry("undetermined",
                            diagnostics={"reason": "tail not resolved", "s_end": s_end})
    diag = {"s_window": [s_lo, s_hi]}
    k = abs(kappa)

    if abs(k - 4.0) <= TANGENTIAL_BAND:
        sel = finite & (s_all >= 0.25 * s_hi) & (s_all <= s_hi)
        s, z = s_all[sel], trace.z[sel]
        if s.size < 8:
            return TailGeometry("undetermined", diagnostics={"reason": "tail not resolved"})
        with np.errstate(all="ignore"):
            e, c1, C, rms = _tangential_fit(s, z.astype(complex))
        alpha = math.atan2(c1.imag, c1.real) % math.pi
        dev = min(alpha, math.pi - alpha)
        diag.update(log_shift=[C.real, C.imag], rms=rms)
        diag["fit_window"] = [float(s[0]), float(s[-1])]
        scale = float(np.max(np.abs(z - z[-1])))
        if not rms <= 1e-5 * scale:
            diag["reason"] = "tangential model does not fit"
            return TailGeometry("undetermined", endpoint=e, angle=dev, expected_angle=0.0,
                                diagnostics=diag)
        return TailGeometry("tangential", endpoint=e, angle=dev, expected_angle=0.0,
                            diagnostics=diag)

    grid, z = _uniform_tail(trace, s_lo, s_hi, shells * per_shell + 1, horizon)
    q, fix, res = _recurrence_fit(z)
    ds = grid[1] - grid[0]
    rate = np.log(q) / ds
    diag.update(rate=[rate.real, rate.imag], residual=res)
    if not abs(q) < 1.0:
        diag["reason"] = "tail does not contract"
        return TailGeometry("undetermined", diagnostics=diag)

    if k > 4.0:
        e = complex(fix.real, fix.imag)
        w = z - e.real
        ang = np.unwrap(np.angle(w))
        alpha = _linear_extrapolate(np.abs(w), ang)
        return TailGeometry("collision", endpoint=e, angle=alpha,
                            expected_angle=collision_angle(k), diagnostics=diag)
    theta = _spiral_theta(kappa)
    pitch = float(rate.imag / rate.real) if rate.real != 0.0 else math.inf
    return TailGeometry("spiral", endpoint=fix, center=fix, pitch=pitch,
                        expected_pitch=math.tan(theta), diagnostics=diag)


def shell_diameters(trace, a=0.5, horizon=None):
    """Diameters of the trace pieces between consecutive dyadic log-times.

    Returns ``(levels, diameters, ratio)`` where ``ratio`` is the fitted
    geometric decay per shell.  The last (partially resolved) shell is
    omitted.
    """
    s = _log_time(trace, horizon)
    shell = -math.log(a)
    s_end = float(s[np.isfinite(s)][-2])
    n_shells = int(s_end // shell) - 1
    levels, diam = [], []
    for j in range(1, n_shells):
        sel = (s >= j * shell) & (s <= (j + 1) * shell)
        if np.count_nonzero(sel) < 2:
            continue
        z = trace.z[sel]
        levels.append(j)
        diam.append(float(np.max(np.abs(z[:, None] - z[None, :]))))
    levels = np.array(levels, dtype=float)
    diam = np.array(diam)
    if levels.size < 2:
        return levels, diam, math.nan
    slope = np.polyfit(levels, np.log(diam), 1)[0]
    return levels, diam, float(math.exp(slope))


# ---------------------------------------------------------- interval lemma

def interval_lemma_check(kappa, perturbation=0.0, s_max=3.0, n=3001):
    """Track the left end ``x1(s)`` of ``G_s(Gamma[0, s]) cap R``.

    The driving function in log-time is ``kappa + perturbation*sin(s)``.
    The check passes when ``x1(s) > A - (A - B)/4`` at every node, where
    ``A > B`` are the roots of ``x**2 - kappa*x + 4``.
    """
    if not kappa > 4.0:
        raise DomainError("interval check needs kappa > 4")
    q = math.sqrt(kappa * kappa - 16.0)
    A, B = 0.5 * (kappa + q), 0.5 * (kappa - q)
    thr = A - 0.25 * (A - B)
    sigma = SigmaTerm.from_callable(lambda s: kappa + perturbation * np.sin(s), s_max,
                                    n=n, label="kappa + p*sin(s)")
    s = sigma.s
    chain = sigma_chain(sigma, s)
    base = float(chain.centers[0])
    eps = 1e-8 * 4.0 * math.sqrt(chain.total_capacity)
    xr, _ = _kernels.forward_path(base - eps, 0.0, np.ascontiguousarray(chain.centers),
                                  np.ascontiguousarray(chain.capacities))
    x1 = xr * np.exp(0.5 * s)
    x1[0] = float(sigma(0.0))
    margin = float(np.min(x1 - thr))
    return {"ok": bool(margin > 0.0), "kappa": kappa, "perturbation": perturbation,
            "A": A, "B": B, "threshold": thr, "min_margin": margin,
            "s": s.tolist(), "x1": x1.tolist()}


# ------------------------------------------------------------ full report

def analyze_driving(lam, a=0.5, deltas=(0.04, 0.01, 0.0025), cfg=None, levels=40):
    """Asymptote, regularity and tail geometry of a driving term on ``[0, 1]``."""
    asym = estimate_sqrt_asymptote(lam, a, levels)
    reg = regularity(lam, deltas, horizon=1.0)
    out = {**asym.as_dict(), **reg.as_dict()}
    if cfg is not None:
        from .forward import solve_trace
        geo = measure_tail_geometry(solve_trace(lam, cfg), asym.kappa_limit)
        out.update(geo.as_dict())
    return out
