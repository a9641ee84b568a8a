import math

import numpy as np
import pytest

from loewnerkit.analysis import estimate_sqrt_asymptote, regularity
from loewnerkit.errors import ArgumentError, DomainError
from loewnerkit.spiral import (CompactSet, build_spiral, exterior_map, nu0, nu0_hat,
                               previous_turn_ratio, spiral_driving)


def test_nu0_values():
    z = nu0(0.5)
    assert abs(z - 0.5 * np.exp(-2j)) < 1e-15
    assert abs(z - complex(-0.20807, -0.45465)) < 1e-5
    assert abs(abs(nu0(1 - 1e-9)) - 1.0) < 1e-8
    with pytest.raises(DomainError):
        nu0(1.0)
    with pytest.raises(DomainError):
        nu0(-0.1)


def test_previous_turn_point():
    t_hat = 1.0 + 1.0 / (2 * math.pi - 10.0)
    assert t_hat == pytest.approx(0.730952, abs=1e-6)
    assert abs(nu0_hat(0.9) - nu0(t_hat)) < 1e-15
    # same argument, one turn earlier
    assert abs(np.angle(nu0_hat(0.9) / nu0(0.9))) < 1e-9
    with pytest.raises(DomainError):
        nu0_hat(0.5)


def test_previous_turn_ratio_closed_form():
    t = np.array([0.9, 0.99, 0.999, 0.9999])
    exact = 1.0 / (1.0 - 2 * math.pi * (1 - t))
    assert np.allclose(previous_turn_ratio(t), exact, rtol=1e-12)
    # direct distance where the phase is still well resolved
    direct = abs(nu0_hat(0.9) - nu0(0.9)) / (2 * math.pi * 0.01)
    assert direct == pytest.approx(previous_turn_ratio(0.9), rel=1e-12)
    assert np.all(np.diff(np.abs(previous_turn_ratio(t) - 1.0)) < 0)


@pytest.mark.parametrize("t, tol", [(0.9, 0.20), (0.99, 0.05), (0.999, 0.005)])
def test_previous_turn_ratio_tolerances(t, tol):
    assert abs(previous_turn_ratio(t) - 1.0) <= tol


def test_compact_set_validation():
    with pytest.raises(DomainError):
        CompactSet.disk(0.5j, 1.0)
    with pytest.raises(DomainError):
        CompactSet.segment(-1j, 1.0)
    with pytest.raises(ArgumentError):
        CompactSet("star", 1j, 1.0)
    with pytest.raises(ArgumentError):
        CompactSet.from_dict({"kind": "disk", "center": [0, 2]})
    A = CompactSet.from_dict({"kind": "disk", "center": [0, 2], "radius": 0.5})
    assert A == CompactSet.disk(2j, 0.5)
    assert CompactSet.from_dict(A.as_dict()) == A


def test_exterior_map_values(disk):
    assert abs(exterior_map(disk, 0.5) - (1 + 2j)) < 1e-15
    seg = CompactSet.segment(2j, 1.0)
    assert abs(exterior_map(seg, -1.0) - (-1 + 2j)) < 1e-15
    assert np.isinf(exterior_map(disk, 0.0))
    with pytest.raises(DomainError):
        exterior_map(disk, 1.5)
    z = np.exp(1j * np.linspace(0, 2 * np.pi, 50))
    assert np.allclose(np.abs(exterior_map(disk, z) - 2j), 0.5, atol=1e-15)
    assert np.allclose(seg.distance(exterior_map(seg, z)), 0.0, atol=1e-15)


def _simple_closed(w):
    """No two non-adjacent edges of the closed polygon ``w`` intersect."""
    a = w
    b = np.roll(w, -1)
    n = a.size
    d = b - a

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    r = cross(d[:, None], d[None, :])
    qp = a[None, :] - a[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = cross(qp, d[None, :]) / r
        u = cross(qp, d[:, None]) / r
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    adjacent = (np.abs(i - j) <= 1) | (np.abs(i - j) == n - 1)
    hit = (r != 0) & (s > 0) & (s < 1) & (u > 0) & (u < 1) & ~adjacent
    return not hit.any()


@pytest.mark.parametrize("A", [CompactSet.disk(2j, 0.5), CompactSet.segment(1 + 2j, 1.0)])
@pytest.mark.parametrize("r", [1.0, 0.9, 0.5])
def test_exterior_map_injective_on_circles(A, r):
    z = r * np.exp(2j * np.pi * np.arange(1000) / 1000)
    w = exterior_map(A, z)
    assert _simple_closed(w)


def test_spiral_construction(disk):
    sp = build_spiral(disk, 0.99, 3000)
    z = sp.samples.points
    assert z[0].imag == 0.0
    assert np.all(z[1:].imag > 0.0)
    assert sp.winding()[-1] >= 3.0
    assert np.all(np.diff(sp.winding()) > 0)
    d = disk.distance(z)
    assert np.all(np.diff(d) < 0.0)
    assert d.min() > 0.0
    assert 0.0 <= sp.rotation < 2 * math.pi


def test_spiral_around_segment():
    A = CompactSet.segment(1 + 2j, 1.0)
    sp = build_spiral(A, 0.99, 3000)
    assert sp.samples.points[0].imag == 0.0
    assert abs(sp.winding()[-1]) >= 3.0
    assert A.distance(sp.samples.points).min() > 0.0
    t_max = 1 - 2.0 ** -10
    lam = spiral_driving(A, t_max, 3000)
    assert t_max - 1e-3 <= lam.total_capacity <= t_max


def test_spiral_is_deterministic(disk):
    a = build_spiral(disk, 0.95, 500).samples.points
    b = build_spiral(disk, 0.95, 500).samples.points
    assert np.array_equal(a, b)


def test_spiral_bad_arguments(disk):
    with pytest.raises(DomainError):
        build_spiral(disk, 1.0)
    with pytest.raises(ArgumentError):
        spiral_driving(disk, 0.9, 100, horizon="other")


def test_spiral_capacity_normalized(spiral_lam):
    assert abs(spiral_lam.total_capacity - 1.0) <= 1e-3
    assert spiral_lam.total_capacity <= 1.0


def test_curve_horizon(disk):
    lam = spiral_driving(disk, 0.9, 2000, horizon="curve")
    assert lam.total_capacity == pytest.approx(1.0, abs=1e-12)


def test_spiral_kappa_trend(spiral_lam):
    rep = estimate_sqrt_asymptote(spiral_lam)
    assert rep.truncated
    tail = [k for _, k in rep.kappa_hats[-4:]]
    assert abs(tail[-1] - 4.0) < abs(tail[0] - 4.0)
    assert 3.3 <= rep.kappa_tail <= 4.7


def test_spiral_lip_norms_decrease(spiral_lam):
    norms = regularity(spiral_lam, (0.04, 0.01, 0.0025), horizon=1.0).local_lip_norms
    assert all(b < a for a, b in zip(norms, norms[1:]))
