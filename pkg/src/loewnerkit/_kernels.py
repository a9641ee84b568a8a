"""Compiled inner loops for vertical-slit maps.

All kernels work in real arithmetic on split (re, im) arrays.  A step with
center ``c`` and capacity ``D`` is handled in the shifted coordinate
``x + iy = z - c``; ``d4`` denotes ``4*D``.

Root selection: the square root is taken with nonnegative imaginary part.
When the root is real its sign follows the sign of ``x`` so that each side of
the slit (and of its image interval) maps to the matching side.  After the
root is chosen, one rearranged evaluation removes the cancellation in
``r - z`` that dominates far from the slit:

    forward:  r = z + 4D / (r + z)
    inverse:  r = w - 4D / (r + w)
"""

import math

import numba
import numpy as np

_JIT = dict(cache=True, nogil=True)


@numba.njit(inline="always", **_JIT)
def _sqrt_upper(a, b):
    if a == 0.0 and b == 0.0:
        return 0.0, 0.0
    m = math.hypot(a, b)
    if a >= 0.0:
        re = math.sqrt(0.5 * (m + a))
        im = 0.5 * b / re
        if im < 0.0:
            re = -re
            im = -im
    else:
        im = math.sqrt(0.5 * (m - a))
        re = 0.5 * b / im
    return re, im


@numba.njit(inline="always", **_JIT)
def _fwd(x, y, d4):
    re, im = _sqrt_upper((x - y) * (x + y) + d4, 2.0 * x * y)
    if im == 0.0 and re * x < 0.0:
        re = -re
    sr = re + x
    si = im + y
    den = sr * sr + si * si
    if den > 0.0:
        re = x + d4 * sr / den
        im = y - d4 * si / den
    if im < 0.0:
        im = 0.0
    return re, im


@numba.njit(inline="always", **_JIT)
def _inv(x, y, d4):
    re, im = _sqrt_upper((x - y) * (x + y) - d4, 2.0 * x * y)
    if im == 0.0 and re * x < 0.0:
        re = -re
    sr = re + x
    si = im + y
    den = sr * sr + si * si
    if den > 0.0:
        re = x - d4 * sr / den
        im = y + d4 * si / den
    if im < 0.0:
        im = 0.0
    return re, im


@numba.njit(**_JIT)
def chain_forward(zr, zi, cen, cap):
    """Apply g_n o ... o g_1 to every point.

    Returns the images and, per point, the index of the first step whose
    slit contains the point (``-1`` when none does).
    """
    m = zr.shape[0]
    n = cen.shape[0]
    out_r = np.empty(m)
    out_i = np.empty(m)
    fail = np.full(m, -1, dtype=np.int64)
    for p in range(m):
        w = zr[p]
        y = zi[p]
        for k in range(n):
            d4 = 4.0 * cap[k]
            x = w - cen[k]
            if x == 0.0 and y > 0.0 and y * y < d4:
                fail[p] = k
                break
            re, y = _fwd(x, y, d4)
            w = cen[k] + re
        out_r[p] = w
        out_i[p] = y
    return out_r, out_i, fail


@numba.njit(**_JIT)
def chain_inverse(zr, zi, cen, cap):
    """Apply f_1 o ... o f_n to every point (step inverses in reverse order)."""
    m = zr.shape[0]
    n = cen.shape[0]
    out_r = np.empty(m)
    out_i = np.empty(m)
    for p in range(m):
        w = zr[p]
        y = zi[p]
        for k in range(n - 1, -1, -1):
            re, y = _inv(w - cen[k], y, 4.0 * cap[k])
            w = cen[k] + re
        out_r[p] = w
        out_i[p] = y
    return out_r, out_i


@numba.njit(**_JIT)
def trace_points(cen, cap, lam):
    """Trace samples ``f_1 o ... o f_{k+1}(lam[k])`` for every k.

    Point k only sees the first k+1 steps, so sweeping the steps from the
    last to the first and updating the suffix of points costs n(n+1)/2
    step evaluations.
    """
    n = cen.shape[0]
    wr = lam.copy()
    wi = np.zeros(n)
    for j in range(n - 1, -1, -1):
        c = cen[j]
        d4 = 4.0 * cap[j]
        for k in range(j, n):
            re, im = _inv(wr[k] - c, wi[k], d4)
            wr[k] = c + re
            wi[k] = im
    return wr, wi


@numba.njit(**_JIT)
def unzip(zr, zi, tol):
    """Discrete vertical-slit unzipping of a polyline.

    Remaining points are stored relative to the current driving value, which
    keeps their offsets accurate however small the remaining hull becomes.
    Returns driving values, step capacities and a failure index (``-1`` when
    no image point dropped below ``-tol``).
    """
    n = zr.shape[0]
    lam = np.empty(n)
    dt = np.zeros(n)
    cur = zr[0]
    xr = zr - cur
    yi = zi.copy()
    lam[0] = cur
    for k in range(1, n):
        c = xr[k]
        y = yi[k]
        if y < -tol:
            return lam, dt, k
        if y < 0.0:
            y = 0.0
        d4 = y * y
        cur += c
        lam[k] = cur
        dt[k] = 0.25 * d4
        for j in range(k + 1, n):
            re, im = _fwd(xr[j] - c, yi[j], d4)
            xr[j] = re
            yi[j] = im
    return lam, dt, -1


@numba.njit(**_JIT)
def forward_path(x0, y0, cen, cap):
    """Images of one point after each prefix ``g_k o ... o g_1`` (k = 0..n)."""
    n = cen.shape[0]
    pr = np.empty(n + 1)
    pi = np.empty(n + 1)
    w = x0
    y = y0
    pr[0] = w
    pi[0] = y
    for k in range(n):
        re, y = _fwd(w - cen[k], y, 4.0 * cap[k])
        w = cen[k] + re
        pr[k + 1] = w
        pi[k + 1] = y
    return pr, pi
