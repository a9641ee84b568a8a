"""Infinite spirals accumulating on the boundary of a disk or a horizontal segment.

The model curve ``nu0(t) = t*exp(i/(t - 1))`` winds infinitely often toward
the unit circle.  Composed with the exterior map of a compact set ``A`` it
becomes a curve spiralling onto ``boundary(A)``; a rotation ``theta0`` is
chosen so that the curve starts on R and then stays in the upper half-plane.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import DrivingTerm
from .errors import ArgumentError, ContractError, DomainError
from .inverse import CurveSamples, unzip_curve

__all__ = ["CompactSet", "SpiralCurve", "nu0", "nu0_hat", "exterior_map",
           "build_spiral", "spiral_driving", "previous_turn_ratio"]

TWO_PI = 2.0 * math.pi
# Curve parameter beyond which further turns add no capacity visible in float64.
SATURATION_U = 10.5


@dataclass(frozen=True)
class CompactSet:
    """A closed disk or a horizontal segment in the upper half-plane."""

    kind: str
    center: complex
    size: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "size", float(self.size))
        if self.kind not in ("disk", "segment"):
            raise ArgumentError(f"unknown set kind {self.kind!r}")
        if not self.size > 0.0:
            raise DomainError("radius or half length must be positive")
        if self.kind == "disk" and not self.center.imag > self.size:
            raise DomainError("disk must lie in the open upper half-plane")
        if not self.center.imag > 0.0:
            raise DomainError("set must lie in the open upper half-plane")

    @classmethod
    def disk(cls, center, radius):
        return cls("disk", center, radius)

    @classmethod
    def segment(cls, center, half_length):
        return cls("segment", center, half_length)

    @classmethod
    def from_dict(cls, d):
        try:
            kind = d["kind"]
            cx, cy = d["center"]
            size = d["radius"] if kind == "disk" else d["half_length"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ArgumentError(f"bad set descriptor: {exc}") from None
        return cls(kind, complex(float(cx), float(cy)), float(size))

    def as_dict(self):
        key = "radius" if self.kind == "disk" else "half_length"
        return {"kind": self.kind, "center": [self.center.real, self.center.imag],
                key: self.size}

    def distance(self, z):
        """Euclidean distance from points to the set."""
        w = np.asarray(z, dtype=complex) - self.center
        if self.kind == "disk":
            return np.maximum(np.abs(w) - self.size, 0.0)
        dx = np.maximum(np.abs(w.real) - self.size, 0.0)
        return np.hypot(dx, w.imag)


def nu0(t):
    """Model spiral ``t*exp(i/(t - 1))`` for ``0 <= t < 1``.

    >>> z = nu0(0.5)
    >>> round(z.real, 5), round(z.imag, 5)
    (-0.20807, -0.45465)
    """
    t = np.asarray(t, dtype=float)
    if np.any(~(t >= 0.0)) or np.any(~(t < 1.0)):
        raise DomainError("nu0 needs 0 <= t < 1")
    out = t * np.exp(1j / (t - 1.0))
    return complex(out) if out.ndim == 0 else out


def _t_hat(t):
    return 1.0 + 1.0 / (TWO_PI + 1.0 / (t - 1.0))


def nu0_hat(t):
    """Point of the model spiral one full turn earlier than ``nu0(t)``.

    >>> round(float(_t_hat(0.9)), 5)
    0.73095
    """
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 1.0 - 1.0 / TWO_PI)) or np.any(~(t < 1.0)):
        raise DomainError("nu0_hat needs 1 - 1/(2*pi) < t < 1")
    return nu0(_t_hat(t))


def previous_turn_ratio(t):
    """``|nu0_hat(t) - nu0(t)| / (2*pi*(1 - t)**2)``; tends to 1 as ``t -> 1``.

    Both points have the same argument, so their distance is ``t - t_hat``.
    It is evaluated in that form: subtracting the complex points directly
    loses digits near ``t = 1``, where the phase ``1/(t - 1)`` is large.

    >>> float(np.round(previous_turn_ratio(0.99), 6))
    1.067044
    """
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 1.0 - 1.0 / TWO_PI)) or np.any(~(t < 1.0)):
        raise DomainError("previous turn needs 1 - 1/(2*pi) < t < 1")
    g = 1.0 - t
    # 1 - t_hat = g/(1 - 2*pi*g), hence t - t_hat = 2*pi*g**2/(1 - 2*pi*g)
    dist = TWO_PI * g * g / (1.0 - TWO_PI * g)
    return dist / (TWO_PI * g * g)


def exterior_map(A, z):
    """Conformal map of the punctured unit disk onto the exterior of ``A``.

    ``z = 0`` maps to ``inf`` (complex infinity).

    >>> exterior_map(CompactSet.disk(2j, 0.5), 0.5)
    (1+2j)
    >>> exterior_map(CompactSet.segment(2j, 1.0), -1.0)
    (-1+2j)
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > 1.0 + 1e-12):
        raise DomainError("exterior map needs |z| <= 1")
    with np.errstate(divide="ignore", invalid="ignore"):
        if A.kind == "disk":
            out = A.center + A.size / z
        else:
            out = A.center + 0.5 * A.size * (z + 1.0 / z)
    out = np.where(z == 0, complex(np.inf, np.inf), out)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class SpiralCurve:
    """Samples of ``f(exp(i*rotation)*nu0(t))`` for ``t`` from ``t0`` on."""

    samples: CurveSamples
    params: np.ndarray
    t0: float
    rotation: float
    A: CompactSet

    def winding(self):
        """Unwrapped argument about the set center, in turns, relative to the start."""
        arg = np.unwrap(np.angle(self.samples.points - self.A.center))
        return (arg - arg[0]) / TWO_PI


def _image(A, theta, t):
    return exterior_map(A, np.exp(1j * theta) * nu0(t))


def _last_crossing(A, theta, t_max, step=0.01):
    """Largest ``t < t_max`` with ``Im f = 0`` on the sampled curve, or ``None``.

    The curve is sampled uniformly in its angle ``1/(1 - t)``.
    """
    u = np.arange(1.0 + step, 1.0 / (1.0 - t_max), step)
    t = 1.0 - 1.0 / u
    im = _image(A, theta, t).imag
    below = np.flatnonzero(im <= 0.0)
    if below.size == 0 or below[-1] == t.size - 1:
        return None
    k = below[-1]
    return float(t[k]), float(t[k + 1])


def _bisect(A, theta, lo, hi, tol=1e-10):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _image(A, theta, mid).imag <= 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def _rotation(A, t_max, seeds=720):
    """Rotation with the latest transversal crossing of R among the seeds."""
    best = None
    for theta in TWO_PI * np.arange(seeds) / seeds:
        br = _last_crossing(A, theta, t_max)
        if br is not None and (best is None or br[0] > best[1][0]):
            best = (theta, br)
    if best is None:
        raise ContractError("no real crossing found for any rotation")
    theta, (lo, hi) = best
    return float(theta), _bisect(A, theta, lo, hi)


def build_spiral(A, t_max=1.0 - 2.0 ** -16, n=4000):
    """Spiral around ``A`` on ``[t0, t_max]`` in the model parameter.

    Samples are uniform in ``log 1/(1 - t)``.  The first sample is the real
    crossing (snapped onto R) and every later one lies in the open upper
    half-plane.

    >>> sp = build_spiral(CompactSet.disk(2j, 0.5), 0.99, 2000)
    >>> float(sp.samples.points[0].imag), bool(sp.winding()[-1] >= 3)
    (0.0, True)
    """
    if not 0.0 < t_max < 1.0:
        raise DomainError("t_max must lie in (0, 1)")
    if n < 2:
        raise ArgumentError("need at least two samples")
    theta, t0 = _rotation(A, t_max)
    if t0 >= t_max:
        raise ContractError("real crossing lies beyond t_max")
    s = np.linspace(-math.log1p(-t0), -math.log1p(-t_max), int(n))
    t = -np.expm1(-s)
    t[0] = t0
    z = _image(A, theta, t)
    z[0] = z[0].real
    if np.any(z[1:].imag <= 0.0):
        raise ContractError("spiral samples leave the upper half-plane after the crossing")
    return SpiralCurve(CurveSamples(z), t, t0, theta, A)


def spiral_driving(A, t_max=1.0 - 2.0 ** -16, n=8000, horizon="capacity"):
    """Driving term of the spiral around ``A``, rescaled to total capacity 1.

    With ``horizon="capacity"`` the value ``t_max`` is the normalized
    capacity at which the returned driving term stops; the curve itself is
    unzipped up to the parameter where its capacity saturates in float64,
    which fixes the normalization.  With ``horizon="curve"`` the curve is
    cut at the model parameter ``t_max`` and the capacity of that piece is
    normalized to 1.
    """
    if horizon not in ("capacity", "curve"):
        raise ArgumentError("horizon must be 'capacity' or 'curve'")
    if not 0.0 < t_max < 1.0:
        raise DomainError("t_max must lie in (0, 1)")
    t_curve = t_max if horizon == "curve" else 1.0 - 1.0 / SATURATION_U
    sp = build_spiral(A, t_curve, n)
    res = unzip_curve(sp.samples)
    total = float(res.remaining[0] + res.dt[0])
    t = np.cumsum(res.dt) / total
    t[0] = 0.0
    rem = res.remaining / total
    keep = np.ones(t.size, dtype=bool)
    keep[1:] = np.diff(t) > 0.0
    if horizon == "capacity":
        keep &= rem >= 1.0 - t_max
    t, lam = t[keep], res.lam[keep]
    # Rescale the curve by c = 1/sqrt(hcap): values scale by c, capacities by c^2.
    return DrivingTerm(t, lam / math.sqrt(total))
