"""Inverse Loewner solver: curve samples -> driving term by vertical-slit unzipping."""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from sklearn.metrics import pairwise_distances_argmin_min

from . import _kernels
from .core import DrivingTerm, hull_interval
from .errors import ArgumentError, DomainError, NumericError

__all__ = ["CurveSamples", "HullComparison", "UnzipResult", "unzip_step", "unzip_curve",
           "drive_curve", "preimage_interval", "compare_hulls", "hausdorff_distance",
           "hooked_pair"]


@dataclass(frozen=True, eq=False)
class CurveSamples:
    """Polyline starting on R and continuing in the open upper half-plane.

    A first point within ``real_tol`` of R is snapped onto it.
    """

    points: np.ndarray
    base: float

    def __init__(self, points, real_tol=1e-12):
        z = np.array(points, dtype=complex).ravel()
        if z.size < 2:
            raise ArgumentError("a curve needs at least two samples")
        if not np.all(np.isfinite(z)):
            raise ArgumentError("curve samples must be finite")
        if abs(z[0].imag) > real_tol * (1.0 + abs(z[0])):
            raise ArgumentError("the first curve sample must be real")
        z[0] = z[0].real
        if np.any(z[1:].imag <= 0.0):
            k = 1 + int(np.flatnonzero(z[1:].imag <= 0.0)[0])
            raise ArgumentError(f"curve sample {k} is not in the open upper half-plane")
        if np.any(np.diff(z) == 0):
            k = 1 + int(np.flatnonzero(np.diff(z) == 0)[0])
            raise ArgumentError(f"curve sample {k} repeats its predecessor")
        z.setflags(write=False)
        object.__setattr__(self, "points", z)
        object.__setattr__(self, "base", float(z[0].real))

    def __len__(self):
        return self.points.size

    def reflected(self):
        return CurveSamples(-np.conj(self.points))

    def translated(self, x):
        return CurveSamples(self.points + x)

    def scaled(self, r):
        return CurveSamples(self.points * r)

    def diameter(self):
        z = self.points
        return float(max(np.max(np.abs(z - w)) for w in z)) if z.size < 4096 else _diameter(z)


def _diameter(z):
    best = 0.0
    for chunk in np.array_split(z, max(1, z.size // 1024)):
        best = max(best, float(np.max(np.abs(chunk[:, None] - z[None, :]))))
    return best


class HullComparison(NamedTuple):
    sup_driving_gap: float
    hcap_gap: float
    epsilon: float


class UnzipResult(NamedTuple):
    """Raw unzipping output.

    ``remaining[k]`` is the capacity still to come after sample ``k``,
    accumulated from the end so that it stays accurate when tiny.
    """

    lam: np.ndarray
    dt: np.ndarray
    remaining: np.ndarray

    @property
    def t(self):
        return np.cumsum(self.dt)


def unzip_step(w):
    """Driving value and capacity of the slit step that sends ``w`` to R.

    >>> unzip_step(1 + 2j)
    (1.0, 1.0)
    """
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise ArgumentError("non-finite point")
    if not w.imag > 0.0:
        raise DomainError("unzipping needs Im w > 0")
    return w.real, 0.25 * w.imag * w.imag


def unzip_curve(c, tol=1e-10):
    """Unzip all samples; see :class:`UnzipResult`."""
    z = c.points
    scale = max(1.0, float(np.max(np.abs(z - z[0]))))
    lam, dt, fail = _kernels.unzip(np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag),
                                   tol * scale)
    if fail >= 0:
        raise NumericError(f"image of sample {fail} left the closed upper half-plane", index=int(fail))
    remaining = np.cumsum(dt[::-1])[::-1]
    remaining = np.append(remaining[1:], 0.0)
    return UnzipResult(lam, dt, remaining)


def drive_curve(c, tol=1e-10):
    """Driving term of a sampled curve.

    Samples whose capacity increment vanishes in floating point are dropped,
    so the output times are strictly increasing.

    >>> y = np.linspace(0.0, 2.0, 65)
    >>> lam = drive_curve(CurveSamples(1j * y))
    >>> round(lam.total_capacity, 12), float(np.max(np.abs(lam.values)))
    (1.0, 0.0)
    """
    res = unzip_curve(c, tol)
    t = np.cumsum(res.dt)
    t[0] = 0.0
    keep = np.ones(t.size, dtype=bool)
    keep[1:] = np.diff(t) > 0.0
    return DrivingTerm(t[keep], res.lam[keep])


def preimage_interval(chain, base=None):
    """Real image ``(x1, x2)`` of the hull generated by ``chain``.

    >>> from loewnerkit.core import MapChain
    >>> x1, x2 = preimage_interval(MapChain([0.0], [1.0]))
    >>> round(x1, 12), round(x2, 12)
    (-2.0, 2.0)
    """
    return hull_interval(chain, base)


def hausdorff_distance(z1, z2):
    """Symmetric Hausdorff distance between two point samples."""
    a = np.column_stack([np.real(z1), np.imag(z1)])
    b = np.column_stack([np.real(z2), np.imag(z2)])
    d12 = pairwise_distances_argmin_min(a, b)[1].max()
    d21 = pairwise_distances_argmin_min(b, a)[1].max()
    return float(max(d12, d21))


def compare_hulls(c1, c2):
    """Driving-term and capacity gaps between two sampled curves.

    The driving terms are compared on the common capacity range after
    piecewise-linear resampling on the union of both sample grids.
    """
    lam1 = drive_curve(c1)
    lam2 = drive_curve(c2)
    T = min(lam1.total_capacity, lam2.total_capacity)
    grid = np.union1d(lam1.t[lam1.t <= T], lam2.t[lam2.t <= T])
    gap = float(np.max(np.abs(lam1(grid) - lam2(grid))))
    hgap = abs(lam1.total_capacity - lam2.total_capacity)
    return HullComparison(gap, hgap, hausdorff_distance(c1.points, c2.points))


def hooked_pair(eps, n_slit=400, n_hook=400):
    """Two hooked curves that are uniformly close but have distant driving terms.

    Curve 1 is the slit ``[-eps, -eps + 2i]`` followed by the image of the
    segment ``{r*exp(i*eps) : 0 < r <= 1}`` under ``sqrt(z^2 - 4) - eps``,
    which runs back down along the right side of the slit.  Curve 2 is its
    mirror image.
    """
    if not 0.0 < eps < 0.5:
        raise DomainError("eps must lie in (0, 0.5)")
    y = np.linspace(0.0, 2.0, n_slit)
    slit = -eps + 1j * y
    r = np.linspace(0.0, 1.0, n_hook + 1)[1:]
    w = r * np.exp(1j * eps)
    hook = np.sqrt(w - 2.0) * np.sqrt(w + 2.0)
    hook = np.where(hook.imag < 0.0, -hook, hook) - eps
    c1 = CurveSamples(np.concatenate([slit, hook]))
    return c1, c1.reflected()
