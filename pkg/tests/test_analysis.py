import math

import numpy as np
import pytest

from loewnerkit.analysis import (collision_angle, estimate_sqrt_asymptote,
                                 interval_lemma_check, local_lip_half, measure_tail_geometry,
                                 regularity, renormalize_driving, renormalized_trace,
                                 shell_diameters)
from loewnerkit.core import Constant, DrivingTerm, SqrtFamily, Trace
from loewnerkit.errors import ContractError, DomainError
from loewnerkit.explicit import params_from_kappa, trace_explicit
from loewnerkit.forward import SolverConfig, solve_trace


# renormalization

@pytest.mark.parametrize("T", [0.1, 0.5, 0.99])
def test_sqrt_family_is_fixed(T):
    lam = renormalize_driving(DrivingTerm.sqrt_family(3.5), T)
    assert lam.form == SqrtFamily(3.5, 0.0, 1.0)
    t = np.linspace(0, 1, 11)
    assert np.allclose(lam(t), 3.5 * np.sqrt(1 - t), atol=1e-14)


def test_offset_family_closure():
    lam = renormalize_driving(DrivingTerm.sqrt_family(2.0, 0.6), 0.64)
    assert lam.form == SqrtFamily(2.0, 1.0, 1.0)


def test_constant_renormalized():
    lam = renormalize_driving(DrivingTerm.constant(0.3), 0.75)
    assert lam.form == Constant(0.6)
    assert np.allclose(lam.values, 0.6)


def test_renormalize_at_zero():
    lam = DrivingTerm.from_callable(np.sin, n=33)
    assert renormalize_driving(lam, 0.0) is lam


def test_renormalize_range():
    lam = DrivingTerm.constant(0.0)
    with pytest.raises(DomainError):
        renormalize_driving(lam, 1.0)
    with pytest.raises(ContractError):
        renormalize_driving(DrivingTerm.constant(0.0, T=2.0), 0.5)


def test_renormalization_semigroup_sampled():
    t = np.linspace(0.0, 1.0, 4097)
    lam = DrivingTerm(t, np.sin(7 * t) + t ** 2)
    T1, T2 = 0.25, 0.5
    a = renormalize_driving(renormalize_driving(lam, T1), T2)
    b = renormalize_driving(lam, T1 + T2 * (1 - T1))
    assert a.t.size == b.t.size
    assert np.allclose(a.t, b.t, rtol=0, atol=1e-14)
    assert np.allclose(a.values, b.values, rtol=1e-13, atol=1e-14)


def test_renormalization_semigroup_tagged():
    lam = DrivingTerm.sqrt_family(4.5, -1.0)
    a = renormalize_driving(renormalize_driving(lam, 0.3), 0.6)
    b = renormalize_driving(lam, 0.3 + 0.6 * 0.7)
    assert a.form.kappa == b.form.kappa
    assert a.form.offset == pytest.approx(b.form.offset, rel=1e-15)


def test_renormalize_truncated_term():
    lam = DrivingTerm.from_callable(lambda t: 4 * np.sqrt(1 - t), T=0.96, n=101)
    r = renormalize_driving(lam, 0.6)
    assert r.total_capacity == pytest.approx(0.9)


def test_renormalized_trace_fixed_point():
    lam = DrivingTerm.sqrt_family(5.0)
    cfg = SolverConfig(4096)
    base = solve_trace(lam, cfg)
    tr = renormalized_trace(lam, 0.75, cfg)
    sel = tr.t <= 0.9
    assert np.max(np.abs(tr.z[sel] - base.at(tr.t[sel]))) <= 1e-2


def test_renormalized_trace_matches_direct_solve():
    lam = DrivingTerm.from_callable(lambda t: np.sin(4 * t), n=2)
    cfg = SolverConfig(2048)
    a = renormalized_trace(lam, 0.5, cfg)
    b = solve_trace(renormalize_driving(lam, 0.5), cfg)
    sel = a.t <= 0.95
    assert np.max(np.abs(a.z[sel] - b.at(a.t[sel]))) <= 2e-2


def test_renormalized_trace_at_zero():
    lam = DrivingTerm.constant(0.0)
    cfg = SolverConfig(64)
    assert np.array_equal(renormalized_trace(lam, 0.0, cfg).z, solve_trace(lam, cfg).z)


def test_spiral_renormalizations_approach_tangential(spiral_lam):
    p = params_from_kappa(4.0)
    dists = []
    for T in (0.9, 0.99, 0.999):
        tr = renormalized_trace(spiral_lam, T, SolverConfig(1024))
        sel = tr.t <= 0.9
        ex = trace_explicit(p, -np.log1p(-tr.t[sel])).z
        dists.append(float(np.max(np.abs(tr.z[sel] - tr.z[0] + 4.0 - ex))))
    assert all(b < a for a, b in zip(dists, dists[1:]))


# asymptote

@pytest.mark.parametrize("k", [4.0, -2.5, 6.0])
def test_asymptote_exact_on_sqrt_family(k):
    rep = estimate_sqrt_asymptote(DrivingTerm.sqrt_family(k))
    assert rep.lambda_at_1 == 0.0
    assert all(kh == abs(k) for _, kh in rep.kappa_hats)
    assert rep.kappa_limit == abs(k)
    assert not rep.truncated


def test_asymptote_with_correction():
    lam = DrivingTerm.from_callable(lambda t: 4 * np.sqrt(1 - t) + (1 - t), n=2)
    rep = estimate_sqrt_asymptote(lam, a=0.5, levels=20)
    n = np.arange(1, 21)
    k = np.array([kh for _, kh in rep.kappa_hats])
    assert np.allclose(k, 4 + 0.5 ** (n / 2), atol=1e-12)
    assert rep.kappa_limit == pytest.approx(4.0, abs=1e-9)
    assert [tn for tn, _ in rep.kappa_hats] == pytest.approx(1 - 0.5 ** n)


def test_asymptote_sampled_data_truncates():
    t = np.linspace(0.0, 1.0, 1025)
    lam = DrivingTerm(t, 3 * np.sqrt(1 - t) + 0.25)
    rep = estimate_sqrt_asymptote(lam, levels=30)
    assert rep.truncated and rep.last_reliable_n < 30
    assert rep.lambda_at_1 == 0.25
    assert rep.kappa_limit == pytest.approx(3.0, abs=1e-9)


def test_asymptote_extrapolates_lambda_at_1():
    gap = np.geomspace(1.0, 1e-8, 400)
    t = np.concatenate([[0.0], 1.0 - gap[1:]])
    lam = DrivingTerm(t, 0.7 + 2.0 * np.sqrt(1 - t) + 0.3 * (1 - t))
    rep = estimate_sqrt_asymptote(lam)
    assert rep.lambda_at_1 == pytest.approx(0.7, abs=1e-6)
    assert rep.lambda_at_1_error < 1e-5
    assert rep.kappa_limit == pytest.approx(2.0, abs=1e-3)


def test_asymptote_needs_data():
    lam = DrivingTerm(np.linspace(0.0, 1.0, 3), [1.0, 0.5, 0.0])
    with pytest.raises(ContractError):
        estimate_sqrt_asymptote(lam)
    with pytest.raises(DomainError):
        estimate_sqrt_asymptote(DrivingTerm.sqrt_family(4.0), a=1.5)


def test_report_serializes():
    d = estimate_sqrt_asymptote(DrivingTerm.sqrt_family(4.0), levels=5).as_dict()
    assert {"lambda_at_1", "kappa_limit", "kappa_hats"} <= set(d)


# local Lip-1/2 norm

def test_lip_sqrt_family_bound():
    lam = DrivingTerm.sqrt_family(4.0, n=4001)
    assert local_lip_half(lam, 0.01) <= 0.4


def test_lip_constant_is_zero():
    assert local_lip_half(DrivingTerm.constant(2.0, n=101), 0.1) == 0.0


def test_lip_scales_with_root_delta():
    lam = DrivingTerm.sqrt_family(4.0, n=4001)
    v = {d: local_lip_half(lam, d) for d in (0.04, 0.01)}
    assert v[0.01] <= v[0.04] / 2 + 1e-6


@pytest.mark.parametrize("r", [0.5, 2.0, 3.0])
def test_lip_scale_invariant(r):
    rng = np.random.default_rng(4)
    t = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0, 1, 600)]))
    lam = DrivingTerm(t, np.cumsum(rng.normal(0, 0.02, t.size)))
    for d in (0.04, 0.01):
        v = local_lip_half(lam, d)
        # relative drift: only the rounding of the rescaled times enters
        assert abs(local_lip_half(lam.scaled(r), d) - v) <= 1e-9 * v
    tagged = DrivingTerm.sqrt_family(4.0, n=1025)
    assert local_lip_half(tagged.scaled(r), 0.01) == pytest.approx(
        local_lip_half(tagged, 0.01), rel=1e-12)


def test_lip_needs_positive_delta():
    with pytest.raises(DomainError):
        local_lip_half(DrivingTerm.constant(0.0), 0.0)


def test_regularity_report():
    rep = regularity(DrivingTerm.sqrt_family(4.0, n=2001), (0.04, 0.01))
    assert rep.deltas == (0.04, 0.01)
    assert len(rep.local_lip_norms) == 2
    assert set(rep.as_dict()) == {"deltas", "local_lip_norms"}


# tail geometry on exact traces

def _exact(k, s_max=24.0, n=3001):
    return trace_explicit(params_from_kappa(k), np.linspace(0.0, s_max, n))


@pytest.mark.parametrize("k", [4.5, 5.0, 6.0])
def test_collision_geometry_exact(k):
    p = params_from_kappa(k)
    g = measure_tail_geometry(_exact(k), k)
    assert g.regime == "collision"
    assert abs(g.endpoint - p.B) <= 1e-2
    assert abs(g.angle - collision_angle(k)) <= 0.05
    assert g.expected_angle == pytest.approx(p.angle)


@pytest.mark.parametrize("k", [1.0, 2.0, 3.0])
def test_spiral_geometry_exact(k):
    p = params_from_kappa(k)
    g = measure_tail_geometry(_exact(k), k)
    assert g.regime == "spiral"
    assert abs(g.center - p.beta) <= 5e-2
    assert g.pitch == pytest.approx(math.tan(p.theta), rel=0.05)


def test_tangential_geometry_exact():
    g = measure_tail_geometry(_exact(4.0, 60.0, 3001), 4.0)
    assert g.regime == "tangential"
    assert abs(g.endpoint - 2.0) <= 1e-2
    assert g.angle < 0.1


def test_geometry_undetermined_on_short_trace():
    tr = Trace([0.0, 0.5, 1.0], [0.0, 1j, 2j])
    assert measure_tail_geometry(tr, 5.0).regime == "undetermined"


def test_spiral_shells_shrink():
    _, diam, ratio = shell_diameters(_exact(2.0))
    assert ratio < 1.0
    assert diam[-1] < diam[0]


# interval lemma

@pytest.mark.parametrize("pert", [0.0, 0.05])
def test_interval_lemma(pert):
    rep = interval_lemma_check(5.0, pert, 3.0)
    assert rep["ok"]
    assert rep["threshold"] == pytest.approx(3.25)
    assert min(rep["x1"]) > 3.25
    assert rep["x1"][0] == pytest.approx(5.0)


def test_interval_lemma_needs_collision():
    with pytest.raises(DomainError):
        interval_lemma_check(3.0)
