"""Half-plane primitives.

Vertical-slit maps, map chains, half-plane capacity, driving-term algebra,
the logarithmic time change and hyperbolic-distance helpers.

Conventions
-----------
A vertical slit step with center ``c`` and capacity ``D`` is the map

    g(z) = c + sqrt((z - c)**2 + 4*D)

which removes the segment ``[c, c + 2i*sqrt(D)]`` and has the expansion
``z + 2D/z + ...``.  Both the step and its inverse are applied on the closed
upper half-plane only; points below the real axis are handled through the
reflection ``g(conj(z)) = conj(g(z))``.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels
from .errors import AccuracyWarning, ArgumentError, ContractError, DomainError, NumericError
from .quadrature import cosine_substituted, gauss_legendre

__all__ = [
    "Constant", "SqrtFamily", "Scaled", "Affine", "Formula",
    "DrivingTerm", "Trace", "SigmaTerm", "SlitStep", "MapChain",
    "vertical_slit_map", "chain_eval", "hull_interval", "hcap_estimate",
    "transform_driving", "time_change", "inverse_time_change",
    "disk_rho", "interval_rho", "interval_integral", "hyperbolic_tools",
    "HyperbolicReport", "capacity_grid",
]


def _as_points(z):
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr).ravel()
    if not np.all(np.isfinite(flat)):
        raise ArgumentError("non-finite point")
    return flat, scalar, arr.shape


def _readonly(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------- closed forms

class Form:
    """A closed-form real function of one variable used as an exact tag."""

    kind = "form"

    def __call__(self, t):
        raise NotImplementedError

    def describe(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Constant(Form):
    value: float
    kind = "constant"

    def __call__(self, t):
        return np.full(np.shape(t), float(self.value))

    def describe(self):
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class SqrtFamily(Form):
    """``offset + kappa*sqrt(horizon - t)``."""

    kappa: float
    offset: float = 0.0
    horizon: float = 1.0
    kind = "sqrt_family"

    def __call__(self, t):
        gap = np.maximum(self.horizon - np.asarray(t, dtype=float), 0.0)
        return self.offset + self.kappa * np.sqrt(gap)

    def describe(self):
        return {"kind": self.kind, "kappa": self.kappa, "offset": self.offset,
                "horizon": self.horizon}


@dataclass(frozen=True)
class Scaled(Form):
    """``t -> inner(r**2 * t) / r``."""

    r: float
    inner: Form
    kind = "scaled"

    def __call__(self, t):
        return self.inner(self.r ** 2 * np.asarray(t, dtype=float)) / self.r

    def describe(self):
        return {"kind": self.kind, "r": self.r, "inner": self.inner.describe()}


@dataclass(frozen=True)
class Affine(Form):
    """``t -> gain * inner(time_gain*t + time_shift) + shift``."""

    inner: Form
    gain: float = 1.0
    shift: float = 0.0
    time_gain: float = 1.0
    time_shift: float = 0.0
    kind = "affine"

    def __call__(self, t):
        tt = self.time_gain * np.asarray(t, dtype=float) + self.time_shift
        return self.gain * self.inner(tt) + self.shift

    def describe(self):
        return {"kind": self.kind, "gain": self.gain, "shift": self.shift,
                "time_gain": self.time_gain, "time_shift": self.time_shift,
                "inner": self.inner.describe()}


@dataclass(frozen=True)
class Formula(Form):
    """Wraps an arbitrary vectorized callable."""

    func: Callable = field(compare=False)
    label: str = ""
    kind = "formula"

    def __call__(self, t):
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float)

    def describe(self):
        return {"kind": self.kind, "label": self.label}


def _affine(form, gain=1.0, shift=0.0, time_gain=1.0, time_shift=0.0):
    if isinstance(form, Affine):
        return Affine(form.inner, gain * form.gain, gain * form.shift + shift,
                      form.time_gain * time_gain,
                      form.time_gain * time_shift + form.time_shift)
    return Affine(form, gain, shift, time_gain, time_shift)


def capacity_grid(T, n):
    """Sample nodes on ``[0, T]``: uniform on the first half, geometric toward ``T``.

    Useful for functions with square-root behaviour at ``T``.
    """
    n = max(int(n), 3)
    n_u = n // 2
    n_g = n - n_u - 1
    uniform = np.linspace(0.0, 0.5 * T, n_u, endpoint=False)
    gaps = 0.5 * T * np.logspace(0.0, -11.0, n_g)
    return np.concatenate([uniform, T - gaps, [T]])


# ------------------------------------------------------------------ data types

class DrivingTerm:
    """Real driving function sampled on ``[0, T]``.

    Parameters
    ----------
    t, values : array_like
        Capacity times (strictly increasing, starting at 0) and the driving
        values there.
    form : Form, optional
        Closed form used for evaluation between samples.  Without it values
        are interpolated linearly in ``t``.
    """

    __slots__ = ("t", "values", "form")

    def __init__(self, t, values, form=None):
        t = _readonly(t)
        values = _readonly(values)
        if t.ndim != 1 or t.shape != values.shape or t.size < 1:
            raise ArgumentError("t and values must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(values))):
            raise ArgumentError("driving samples must be finite")
        if t[0] != 0.0:
            raise ArgumentError("driving samples must start at t = 0")
        if np.any(np.diff(t) <= 0.0):
            raise ArgumentError("driving sample times must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "form", form)

    def __setattr__(self, name, value):
        raise AttributeError("DrivingTerm is immutable")

    def __repr__(self):
        tag = self.form.kind if self.form is not None else "sampled"
        return f"DrivingTerm(n={self.t.size}, T={self.total_capacity:.6g}, form={tag})"

    def __len__(self):
        return self.t.size

    @property
    def total_capacity(self):
        return float(self.t[-1])

    @property
    def form_tag(self):
        return "sampled" if self.form is None else self.form.kind

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.form is not None:
            return self.form(t)
        return np.interp(t, self.t, self.values)

    @classmethod
    def from_form(cls, form, T=1.0, n=1025, t=None):
        t = capacity_grid(T, n) if t is None else np.asarray(t, dtype=float)
        return cls(t, form(t), form)

    @classmethod
    def constant(cls, c, T=1.0, n=2):
        return cls.from_form(Constant(float(c)), T, t=np.linspace(0.0, T, max(n, 2)))

    @classmethod
    def sqrt_family(cls, kappa, offset=0.0, T=1.0, n=1025):
        """``offset + kappa*sqrt(T - t)`` on ``[0, T]``."""
        return cls.from_form(SqrtFamily(float(kappa), float(offset), float(T)), T, n)

    @classmethod
    def from_callable(cls, func, T=1.0, n=1025, label="", t=None):
        return cls.from_form(Formula(func, label), T, n, t)

    # algebra --------------------------------------------------------------
    def scaled(self, r):
        """Driving term of the scaled hull ``K/r``: ``t -> lam(r^2 t)/r`` on ``[0, T/r^2]``."""
        r = float(r)
        if not r > 0.0:
            raise DomainError("scale factor must be positive")
        f = self.form
        if isinstance(f, Constant):
            form = Constant(f.value / r)
        elif isinstance(f, SqrtFamily):
            form = SqrtFamily(f.kappa, f.offset / r, f.horizon / r ** 2)
        elif f is not None:
            form = Scaled(r, f)
        else:
            form = None
        return DrivingTerm(self.t / r ** 2, self.values / r, form)

    def translated(self, x):
        x = float(x)
        f = self.form
        if isinstance(f, Constant):
            form = Constant(f.value + x)
        elif isinstance(f, SqrtFamily):
            form = SqrtFamily(f.kappa, f.offset + x, f.horizon)
        elif f is not None:
            form = _affine(f, shift=x)
        else:
            form = None
        return DrivingTerm(self.t, self.values + x, form)

    def reflected(self):
        f = self.form
        if isinstance(f, Constant):
            form = Constant(-f.value)
        elif isinstance(f, SqrtFamily):
            form = SqrtFamily(-f.kappa, -f.offset, f.horizon)
        elif f is not None:
            form = _affine(f, gain=-1.0)
        else:
            form = None
        return DrivingTerm(self.t, -self.values, form)

    def concat(self, other, tol=1e-9):
        a = float(self.values[-1])
        b = float(other.values[0])
        if abs(a - b) > tol * (1.0 + abs(a)):
            raise ContractError(f"concat endpoint mismatch: {a!r} != {b!r}")
        T = self.total_capacity
        t = np.concatenate([self.t, T + other.t[1:]])
        v = np.concatenate([self.values, other.values[1:]])
        form = None
        if (isinstance(self.form, Constant) and isinstance(other.form, Constant)
                and self.form.value == other.form.value):
            form = self.form
        return DrivingTerm(t, v, form)

    def restricted(self, T):
        """Restriction to ``[0, T]`` (a sample is inserted at ``T``)."""
        if not 0.0 < T <= self.total_capacity:
            raise DomainError("restriction time out of range")
        keep = self.t < T
        t = np.append(self.t[keep], T)
        return DrivingTerm(t, np.append(self.values[keep], self(T)), self.form)


class Trace:
    """Capacity-parametrized polyline in the closed upper half-plane.

    ``s`` (log-time, ``t = 1 - exp(-s)``) may be given for traces that reach
    capacities indistinguishable from 1 in floating point; it then carries
    the strict ordering instead of ``t``.
    """

    __slots__ = ("t", "z", "s")

    def __init__(self, t, z, s=None, imag_tol=1e-9):
        t = np.array(t, dtype=float)
        z = np.array(z, dtype=complex)
        if t.ndim != 1 or t.shape != z.shape or t.size < 1:
            raise ArgumentError("t and z must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(z))):
            raise ArgumentError("trace samples must be finite")
        if t[0] != 0.0:
            raise ArgumentError("trace must start at t = 0")
        if s is None:
            if np.any(np.diff(t) <= 0.0):
                raise ArgumentError("trace times must be strictly increasing")
        else:
            s = _readonly(s)
            if s.shape != t.shape or s[0] != 0.0 or np.any(np.diff(s) <= 0.0):
                raise ArgumentError("trace log-times must be strictly increasing from 0")
            if np.any(np.diff(t) < 0.0):
                raise ArgumentError("trace times must be nondecreasing")
        if np.any(z.imag < -imag_tol):
            k = int(np.argmin(z.imag))
            raise NumericError(f"trace sample {k} below the real axis", index=k)
        z.imag[z.imag < 0.0] = 0.0
        if abs(z[0].imag) > imag_tol * (1.0 + abs(z[0])):
            raise ArgumentError("trace must start on the real axis")
        z[0] = z[0].real
        t.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "s", s)

    def __setattr__(self, name, value):
        raise AttributeError("Trace is immutable")

    def __len__(self):
        return self.t.size

    def __repr__(self):
        return f"Trace(n={self.t.size}, t_end={self.t[-1]:.6g})"

    @property
    def log_time(self):
        """``s = log 1/(1-t)``; exact when stored, else computed from ``t``."""
        if self.s is not None:
            return self.s
        with np.errstate(divide="ignore"):
            return -np.log1p(-self.t)

    def reflected(self):
        return Trace(self.t, -np.conj(self.z), self.s)

    def at(self, t):
        """Linear interpolation of the polyline at capacity times ``t``."""
        return (np.interp(t, self.t, self.z.real)
                + 1j * np.interp(t, self.t, self.z.imag))


class SigmaTerm:
    """Time-changed driving function ``sigma(s)`` on ``[0, s_max]``.

    ``terminal`` optionally stores the value of the original driving term at
    capacity 1 so that the inverse time change can restore it.
    """

    __slots__ = ("s", "values", "form", "terminal")

    def __init__(self, s, values, form=None, terminal=None):
        s = _readonly(s)
        values = _readonly(values)
        if s.ndim != 1 or s.shape != values.shape or s.size < 1:
            raise ArgumentError("s and values must be 1-D arrays of equal length")
        if s[0] != 0.0 or np.any(np.diff(s) <= 0.0):
            raise ArgumentError("s must be strictly increasing from 0")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(values))):
            raise ArgumentError("sigma samples must be finite")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "form", form)
        object.__setattr__(self, "terminal", terminal)

    def __setattr__(self, name, value):
        raise AttributeError("SigmaTerm is immutable")

    def __repr__(self):
        return f"SigmaTerm(n={self.s.size}, s_max={self.s_max:.6g})"

    @property
    def s_max(self):
        return float(self.s[-1])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.form is not None:
            return self.form(s)
        return np.interp(s, self.s, self.values)

    @classmethod
    def from_callable(cls, func, s_max, n=1025, label=""):
        s = np.linspace(0.0, s_max, n)
        form = Formula(func, label)
        return cls(s, form(s), form)

    @classmethod
    def constant(cls, kappa, s_max, n=2):
        s = np.linspace(0.0, s_max, max(n, 2))
        form = Constant(float(kappa))
        return cls(s, form(s), form)

    def shifted(self, u):
        """``sigma_u(s) = sigma(u + s)`` on ``[0, s_max - u]``."""
        if not 0.0 <= u < self.s_max:
            raise DomainError("shift outside the sigma range")
        keep = self.s > u
        s = np.concatenate([[0.0], self.s[keep] - u])
        vals = np.concatenate([[float(self(u))], self.values[keep]])
        if np.any(np.diff(s) <= 0.0):
            s, idx = np.unique(s, return_index=True)
            vals = vals[idx]
        form = None
        if isinstance(self.form, Constant):
            form = self.form
        elif self.form is not None:
            form = _affine(self.form, time_shift=u)
        return SigmaTerm(s, vals, form)


@dataclass(frozen=True)
class SlitStep:
    """One vertical slit step: exact flow of constant driving ``center`` for time ``capacity``."""

    center: float
    capacity: float
    kind: str = "vertical"

    def __post_init__(self):
        if not self.capacity > 0.0:
            raise DomainError("slit capacity must be positive")


class MapChain:
    """Ordered vertical-slit steps representing ``g = g_n o ... o g_1``.

    Zero-capacity steps are dropped on construction.
    """

    __slots__ = ("centers", "capacities")

    def __init__(self, centers=(), capacities=()):
        c = np.asarray(centers, dtype=float).ravel()
        d = np.asarray(capacities, dtype=float).ravel()
        if c.shape != d.shape:
            raise ArgumentError("centers and capacities differ in length")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(d))):
            raise ArgumentError("chain parameters must be finite")
        if np.any(d < 0.0):
            raise DomainError("slit capacity must be nonnegative")
        keep = d > 0.0
        object.__setattr__(self, "centers", _readonly(c[keep]))
        object.__setattr__(self, "capacities", _readonly(d[keep]))

    def __setattr__(self, name, value):
        raise AttributeError("MapChain is immutable")

    @classmethod
    def from_steps(cls, steps):
        steps = list(steps)
        return cls([s.center for s in steps], [s.capacity for s in steps])

    def __len__(self):
        return self.centers.size

    def __repr__(self):
        return f"MapChain(n={len(self)}, capacity={self.total_capacity:.6g})"

    @property
    def steps(self):
        return tuple(SlitStep(float(c), float(d)) for c, d in zip(self.centers, self.capacities))

    @property
    def total_capacity(self):
        return math.fsum(self.capacities)

    def prefix(self, k):
        return MapChain(self.centers[:k], self.capacities[:k])

    def suffix(self, k):
        return MapChain(self.centers[k:], self.capacities[k:])

    def then(self, other):
        """Chain for ``other o self`` (``self`` applied first)."""
        return MapChain(np.concatenate([self.centers, other.centers]),
                        np.concatenate([self.capacities, other.capacities]))

    def scaled(self, a):
        """Chain of the hull scaled by ``a > 0``: ``a*g(z/a)``."""
        return MapChain(a * self.centers, a * a * self.capacities)

    def translated(self, x):
        return MapChain(self.centers + x, self.capacities)

    def reflected(self):
        return MapChain(-self.centers, self.capacities)

    def forward(self, z):
        return chain_eval(self, z, "forward")

    def inverse(self, z):
        return chain_eval(self, z, "inverse")


# ---------------------------------------------------------------- slit maps

def chain_eval(chain, z, direction="forward"):
    """Evaluate ``g = g_n o ... o g_1`` (forward) or ``f = f_1 o ... o f_n`` (inverse).

    Raises
    ------
    DomainError
        Forward evaluation of a point lying inside one of the slits; the
        message names the step index.
    """
    pts, scalar, shape = _as_points(z)
    lower = pts.imag < 0.0
    work = np.where(lower, np.conj(pts), pts)
    cen = np.ascontiguousarray(chain.centers)
    cap = np.ascontiguousarray(chain.capacities)
    if direction == "forward":
        re, im, fail = _kernels.chain_forward(work.real.copy(), work.imag.copy(), cen, cap)
        bad = np.flatnonzero(fail >= 0)
        if bad.size:
            k = int(fail[bad[0]])
            raise DomainError(f"point {pts[bad[0]]!r} enters the slit of step {k}")
    elif direction == "inverse":
        re, im = _kernels.chain_inverse(work.real.copy(), work.imag.copy(), cen, cap)
    else:
        raise ArgumentError(f"unknown direction {direction!r}")
    out = re + 1j * im
    out[lower] = np.conj(out[lower])
    if scalar:
        return complex(out[0])
    return out.reshape(shape)


def vertical_slit_map(z, c, capacity, direction="forward"):
    """One vertical slit step or its inverse.

    >>> vertical_slit_map(2j, 0.0, 1.0)
    0j
    >>> abs(vertical_slit_map(100j, 0.0, 1.0) - 1j * math.sqrt(9996)) < 1e-12
    True
    """
    if not np.isfinite(c) or not np.isfinite(capacity):
        raise ArgumentError("non-finite slit parameters")
    if capacity < 0.0:
        raise DomainError("slit capacity must be nonnegative")
    return chain_eval(MapChain([c], [capacity]), z, direction)


def hull_interval(chain, base=None, eps=None):
    """Real images ``(x1, x2)`` of the two sides of the hull base.

    The chain is evaluated at ``base -/+ eps``; by default ``base`` is the
    first slit center and ``eps = 1e-8`` times the hull size scale
    ``4*sqrt(total capacity)``.
    """
    if len(chain) == 0:
        raise ContractError("empty chain has no image interval")
    if base is None:
        base = float(chain.centers[0])
    if eps is None:
        eps = 1e-8 * 4.0 * math.sqrt(chain.total_capacity)
    x = chain_eval(chain, np.array([base - eps, base + eps], dtype=complex), "forward")
    if not np.all(np.isfinite(x)):
        raise NumericError("interval evaluation failed")
    return float(x[0].real), float(x[1].real)


def hcap_estimate(mapping, method="expansion", *, R=None, center=None, diameter=None,
                  interval=None, direction="forward", n_nodes=256, rtol=1e-10):
    """Half-plane capacity ``d`` of a hydrodynamically normalized map.

    Parameters
    ----------
    mapping : MapChain or callable
        A chain, or a vectorized evaluator of ``g`` (``direction="forward"``)
        or ``f = g^{-1}`` (``direction="inverse"``).
    method : {"expansion", "cauchy"}
        ``"expansion"`` averages ``(z - center)*(g(z) - z)`` over the circle
        ``|z - center| = R`` (upper half evaluated, lower half by reflection),
        which returns ``2d`` up to spectrally small error.  ``"cauchy"``
        integrates ``Im f`` over the image ``interval``: ``d = (1/2pi) int Im f``.
    diameter : float, optional
        Hull diameter; an :class:`AccuracyWarning` is issued when
        ``R <= 10*diameter``.

    >>> round(hcap_estimate(MapChain([0.0], [1.0]), R=100.0), 12)
    1.0
    """
    if isinstance(mapping, MapChain):
        chain = mapping
        if len(chain) == 0:
            return 0.0
        x1, x2 = hull_interval(chain)
        if center is None:
            center = float(chain.centers[0])
        if diameter is None:
            diameter = x2 - x1
        fwd = chain.forward
        inv = chain.inverse
        if interval is None:
            interval = (x1, x2)
        if R is None:
            R = 1e3 * 2.0 * diameter
    else:
        fwd = mapping if direction == "forward" else None
        inv = mapping if direction == "inverse" else None
        if center is None:
            center = 0.0

    if method == "expansion":
        if R is None:
            raise ContractError("expansion method needs a radius R")
        if diameter is not None and R <= 10.0 * diameter:
            warnings.warn(f"R = {R:g} does not exceed 10x the hull diameter {diameter:g}",
                          AccuracyWarning, stacklevel=2)
        func = fwd if fwd is not None else inv
        sgn = 1.0 if fwd is not None else -1.0

        def estimate(m):
            phi = np.pi * (np.arange(m) + 0.5) / m
            w = R * np.exp(1j * phi)
            z = center + w
            return sgn * 0.5 * float(np.mean((w * (np.asarray(func(z)) - z)).real))

        m = int(n_nodes)
        prev = estimate(m)
        for _ in range(8):
            m *= 2
            cur = estimate(m)
            if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
                return cur
            prev = cur
        warnings.warn("expansion estimate did not settle", AccuracyWarning, stacklevel=2)
        return prev
    if method == "cauchy":
        if interval is None or inv is None:
            raise ContractError("cauchy method needs the image interval and the inverse map")
        a, b = map(float, interval)

        def im_f(x):
            return np.asarray(inv(x.astype(complex))).imag

        return cosine_substituted(im_f, a, b, rtol=rtol) / (2.0 * math.pi)
    raise ArgumentError(f"unknown method {method!r}")


# ---------------------------------------------------------- driving algebra

def transform_driving(lam, op, arg=None):
    """Apply ``"scale"`` (r), ``"translate"`` (x), ``"reflect"`` or ``"concat"`` (mu)."""
    if op == "scale":
        return lam.scaled(arg)
    if op == "translate":
        return lam.translated(arg)
    if op == "reflect":
        return lam.reflected()
    if op == "concat":
        return lam.concat(arg)
    raise ArgumentError(f"unknown driving transform {op!r}")


def _sigma_form(form):
    if isinstance(form, SqrtFamily) and form.offset == 0.0 and form.horizon == 1.0:
        return Constant(form.kappa)
    if isinstance(form, Constant):
        c = form.value
        return Formula(lambda s: c * np.exp(0.5 * s), f"{c!r}*exp(s/2)")
    if form is not None:
        return Formula(lambda s: form(-np.expm1(-s)) * np.exp(0.5 * s), "time-changed")
    return None


def time_change(lam, tol=1e-12):
    """``sigma(s) = exp(s/2) * lam(1 - exp(-s))`` sampled at the nodes ``t < 1``.

    >>> sig = time_change(DrivingTerm.sqrt_family(3.0))
    >>> bool(np.allclose(sig.values, 3.0))
    True
    """
    T = lam.total_capacity
    if abs(T - 1.0) > tol:
        raise ContractError(f"total capacity is {T!r}; rescale to 1 with transform_driving first")
    keep = lam.t < 1.0
    t = lam.t[keep]
    s = -np.log1p(-t)
    vals = lam.values[keep] / np.sqrt(1.0 - t)
    return SigmaTerm(s, vals, _sigma_form(lam.form), terminal=float(lam.values[-1]))


def inverse_time_change(sigma):
    """Driving term ``lam(t) = sigma(s) * sqrt(1 - t)``.

    If ``sigma`` remembers the terminal value the result lives on ``[0, 1]``,
    otherwise on ``[0, 1 - exp(-s_max)]``.
    """
    t = -np.expm1(-sigma.s)
    vals = sigma.values * np.exp(-0.5 * sigma.s)
    form = None
    if isinstance(sigma.form, Constant):
        form = SqrtFamily(sigma.form.value)
    elif sigma.form is not None:
        sf = sigma.form

        def lam_of_t(tt):
            tt = np.asarray(tt, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = sf(-np.log1p(-tt)) * np.sqrt(1.0 - tt)
            return np.where(tt >= 1.0, 0.0 if sigma.terminal is None else sigma.terminal, out)

        form = Formula(lam_of_t, "inverse time change")
    if sigma.terminal is not None and t[-1] < 1.0:
        t = np.append(t, 1.0)
        vals = np.append(vals, sigma.terminal)
    return DrivingTerm(t, vals, form)


# --------------------------------------------------------- hyperbolic tools

class HyperbolicReport(NamedTuple):
    rho: float
    integral: float


def disk_rho(z):
    """Hyperbolic distance from ``z`` to infinity in the complement of the closed unit disk."""
    r = abs(complex(z))
    if not r > 1.0:
        raise DomainError("point must lie outside the closed unit disk")
    if math.isinf(r):
        return 0.0
    return math.log1p(2.0 / (r - 1.0))


def _joukowski_inverse(u):
    zeta = u + np.sqrt(u - 1.0) * np.sqrt(u + 1.0)
    if abs(zeta) < 1.0:
        zeta = 1.0 / zeta
    return zeta


def interval_rho(z, a, b):
    """Hyperbolic distance from ``z`` to infinity in the sphere minus ``[a, b]``."""
    z = complex(z)
    if z.imag == 0.0 and a <= z.real <= b:
        raise DomainError("point lies on the interval")
    u = (2.0 * z - a - b) / (b - a)
    return disk_rho(_joukowski_inverse(u))


def interval_integral(z, a, b, rtol=1e-14):
    """Quadrature of ``int_a^b dt / |t - z|``."""
    z = complex(z)
    if z.imag == 0.0 and a <= z.real <= b:
        raise DomainError("point lies on the interval")
    x, y = z.real, abs(z.imag)
    brk = [x]
    if y > 0.0:
        brk += [x + k * y for k in (-8, -2, -0.5, 0.5, 2, 8)]

    def integrand(t):
        return 1.0 / np.hypot(t - x, y)

    return gauss_legendre(integrand, a, b, breakpoints=brk, rtol=rtol)


def hyperbolic_tools(z, interval=None, *, check=True, rtol=1e-8):
    """Hyperbolic distance to infinity and the matching interval integral.

    Without ``interval`` the disk form is used and ``integral`` is NaN.  With
    an interval, the quadrature of ``int dt/|t - z|`` is returned together
    with ``rho``; when ``check`` is set their relation ``integral = 2 rho``
    is verified to ``rtol``.

    >>> r = hyperbolic_tools(1.25, (-1.0, 1.0))
    >>> bool(round(r.integral, 12) == round(math.log(9.0), 12))
    True
    """
    if interval is None:
        return HyperbolicReport(disk_rho(z), float("nan"))
    a, b = map(float, interval)
    if not a < b:
        raise ArgumentError("interval must satisfy a < b")
    rho = interval_rho(z, a, b)
    integral = interval_integral(z, a, b)
    if check and abs(integral - 2.0 * rho) > rtol * abs(integral):
        raise NumericError(f"integral {integral!r} differs from 2*rho {2.0 * rho!r}")
    return HyperbolicReport(rho, integral)
