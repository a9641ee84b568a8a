import math

import numpy as np
import pytest

from loewnerkit.acceptance import semigroup_error
from loewnerkit.core import DrivingTerm, SigmaTerm
from loewnerkit.errors import ArgumentError
from loewnerkit.explicit import G_explicit, params_from_kappa, trace_explicit
from loewnerkit.forward import (SolverConfig, build_chain, capacity_nodes, refinement_sequence,
                                solve_G, solve_trace)


def test_config_validation():
    with pytest.raises(ArgumentError):
        SolverConfig(0)
    with pytest.raises(ArgumentError):
        SolverConfig(8, "chebyshev")
    with pytest.raises(ArgumentError):
        SolverConfig(8, "geometric_s", 1.0)


def test_chain_of_zero():
    ch = build_chain(DrivingTerm.constant(0.0), SolverConfig(4))
    assert len(ch) == 4
    assert np.all(ch.centers == 0.0)
    assert np.allclose(ch.capacities, 0.25, atol=0)
    assert ch.total_capacity == 1.0


def test_geometric_cells_decay():
    lam = DrivingTerm.sqrt_family(4.0)
    ch = build_chain(lam, SolverConfig(256, "geometric_s"))
    w = ch.capacities
    assert ch.total_capacity == pytest.approx(1.0, abs=1e-14)
    tail = w[128:-1]
    r = tail[1:] / tail[:-1]
    assert np.all(r < 1.0)
    assert np.ptp(r) < 1e-9
    t, gap, width = capacity_nodes(1.0, SolverConfig(256, "geometric_s"))
    assert gap[-1] == 0.0 and t[-1] == 1.0
    assert np.allclose(np.diff(t), width, rtol=1e-9, atol=1e-18)


def test_constant_is_translated_zero():
    cfg = SolverConfig(32)
    a = build_chain(DrivingTerm.constant(0.0), cfg)
    b = build_chain(DrivingTerm.constant(1.3), cfg)
    assert np.allclose(b.centers - 1.3, a.centers, atol=0)
    assert np.array_equal(b.capacities, a.capacities)


def test_zero_driving_trace():
    tr = solve_trace(DrivingTerm.constant(0.0), SolverConfig(4096))
    assert np.max(np.abs(tr.z - 2j * np.sqrt(tr.t))) <= 2e-3


def test_constant_driving_trace():
    tr = solve_trace(DrivingTerm.constant(-0.4), SolverConfig(1024))
    assert np.max(np.abs(tr.z - (-0.4 + 2j * np.sqrt(tr.t)))) <= 2e-3


def test_half_circle_solver():
    k = 3.0 * math.sqrt(2.0)
    tr = solve_trace(DrivingTerm.sqrt_family(k), SolverConfig(16384, "geometric_s"))
    dev = np.abs(np.abs(tr.z - 2.0 * math.sqrt(2.0)) - math.sqrt(2.0))
    assert dev.max() <= 5e-3


def test_concatenation_consistency():
    f = lambda t: np.sin(3.0 * t) + t  # noqa: E731
    lam = DrivingTerm.from_callable(f, T=1.0, n=2)
    mu1 = DrivingTerm.from_callable(f, T=0.5, n=2)
    mu2 = DrivingTerm.from_callable(lambda t: f(t + 0.5), T=0.5, n=2)
    whole = build_chain(lam, SolverConfig(64))
    split = build_chain(mu1, SolverConfig(32)).then(build_chain(mu2, SolverConfig(32)))
    z = np.array([0.3 + 2j, -1 + 0.5j, 4 + 0.01j])
    assert np.max(np.abs(whole.forward(z) - split.forward(z))) < 1e-13
    assert np.max(np.abs(whole.prefix(32).then(whole.suffix(32)).forward(z)
                         - whole.forward(z))) == 0.0


def _explicit_error(k, n):
    tr = solve_trace(DrivingTerm.sqrt_family(k), SolverConfig(n))
    sel = tr.t <= 0.9
    s = -np.log1p(-tr.t[sel])
    ex = trace_explicit(params_from_kappa(k), s).z
    return float(np.max(np.abs(tr.z[sel] - ex)))


@pytest.mark.parametrize("k", [2.0, 5.0])
def test_refinement_order(k):
    ns = (256, 512, 1024)
    errs = [_explicit_error(k, n) for n in ns]
    order = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert order >= 0.5


def test_refinement_sequence_levels():
    lam = DrivingTerm.constant(0.0)
    out = list(refinement_sequence(lam, SolverConfig(16, refinement_levels=3)))
    assert [n for n, _ in out] == [16, 32, 64]
    for _, tr in out:
        assert abs(tr.z[-1] - 2j) < 1e-12


def test_stability_in_sup_distance():
    base = lambda t: 1.5 * np.sin(2.0 * t)  # noqa: E731
    cfg = SolverConfig(2048)
    z0 = solve_trace(DrivingTerm.from_callable(base, n=2), cfg).z
    dists = []
    for d in (1e-2, 1e-3):
        lam = DrivingTerm.from_callable(lambda t: base(t) + d * np.cos(5.0 * t), n=2)
        dists.append(float(np.max(np.abs(solve_trace(lam, cfg).z - z0))))
    assert dists[1] < dists[0]


def test_trace_stays_in_closed_half_plane():
    rng = np.random.default_rng(8)
    for _ in range(5):
        vals = np.cumsum(rng.normal(0, 0.05, 257))
        vals -= vals[0]
        lam = DrivingTerm(np.linspace(0, 1, 257), vals)
        tr = solve_trace(lam, SolverConfig(512))
        assert tr.z.imag.min() >= -1e-9


def test_G_identity_at_zero():
    sigma = SigmaTerm.constant(3.0, 2.0)
    (s0, g0), *_ = solve_G(sigma, np.linspace(0.0, 1.0, 11))
    z = np.array([1 + 1j, -2 + 0.3j])
    assert s0 == 0.0 and np.array_equal(g0(z), z)


@pytest.mark.parametrize("k", [5.0, 2.0])
def test_G_matches_explicit(k):
    sigma = SigmaTerm.constant(k, 1.0)
    maps = solve_G(sigma, np.linspace(0.0, 1.0, 2001))
    s, G = maps[-1]
    p = params_from_kappa(k)
    for z in (0.5 + 3j, -2 + 4j, 6 + 2.5j):
        assert abs(G(z) - G_explicit(p, s, z)) < 1e-5


def test_semigroup():
    sigma = SigmaTerm.from_callable(lambda s: 2.0 + np.cos(3.0 * s), 1.0, n=1001)
    assert semigroup_error(sigma, 0.3, 0.3, 400) <= 1e-6
