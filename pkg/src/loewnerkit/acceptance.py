"""Acceptance checks shared by the test suite and ``loewnerkit selftest``.

Every check returns a :class:`CheckResult` with the measured numbers, so a
failure reports how far off it was.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .analysis import (estimate_sqrt_asymptote, interval_lemma_check, measure_tail_geometry,
                       regularity, renormalize_driving, shell_diameters)
from .core import (Constant, DrivingTerm, SigmaTerm, SqrtFamily, hull_interval,
                   hyperbolic_tools, time_change)
from .explicit import params_from_kappa, trace_explicit
from .forward import SolverConfig, build_chain, solve_G, solve_trace
from .inverse import CurveSamples, compare_hulls, drive_curve, hooked_pair
from .spiral import CompactSet, spiral_driving

__all__ = ["CheckResult", "CHECKS", "run_checks"]


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number}: {self.title} ({self.seconds:.1f} s)"


def _order(ns, errs):
    """Least-squares convergence order from errors at step counts ``ns``."""
    return float(-np.polyfit(np.log(ns), np.log(errs), 1)[0])


# ------------------------------------------------------------------ 1

def exact_identities():
    worst_ab = worst_theta = worst_sin = worst_beta = 0.0
    for k in (4.1, 4.5, 5.0, 6.0, 20.0):
        p = params_from_kappa(k)
        worst_ab = max(worst_ab, abs(p.A * p.B - 4.0), abs(p.A + p.B - k))
        r = math.sqrt(1.0 - p.theta)
        worst_theta = max(worst_theta, abs(2.0 * r + 2.0 / r - k))
    for k in (1.0, 2.0, 3.0, 3.9):
        p = params_from_kappa(k)
        worst_sin = max(worst_sin, abs(-4.0 * math.sin(p.theta) - k))
        worst_beta = max(worst_beta, abs(abs(p.beta) - 2.0))
    d = {"ab": worst_ab, "theta": worst_theta, "sin": worst_sin, "beta": worst_beta}
    return max(d.values()) <= 1e-12, d


# ------------------------------------------------------------------ 2

def half_circle():
    k = 3.0 * math.sqrt(2.0)
    c, r = 2.0 * math.sqrt(2.0), math.sqrt(2.0)
    ex = trace_explicit(params_from_kappa(k), np.linspace(0.0, 30.0, 1000))
    dev_ex = float(np.max(np.abs(np.abs(ex.z - c) - r)))
    tr = solve_trace(DrivingTerm.sqrt_family(k), SolverConfig(16384, "geometric_s"))
    dev_sol = float(np.max(np.abs(np.abs(tr.z - c) - r)))
    return dev_ex <= 1e-8 and dev_sol <= 5e-3, {"explicit": dev_ex, "solver": dev_sol}


# ------------------------------------------------------------------ 3

def endpoint_theorems(n=16384):
    cfg = SolverConfig(n, "geometric_s")
    d = {}
    ok = True
    for k in (5.0, 6.0):
        p = params_from_kappa(k)
        g = measure_tail_geometry(solve_trace(DrivingTerm.sqrt_family(k), cfg), k)
        e_err = abs(g.endpoint - p.B)
        a_err = abs(g.angle - p.angle)
        d[f"kappa={k:g}"] = {"regime": g.regime, "endpoint_error": e_err, "angle_error": a_err}
        ok &= g.regime == "collision" and e_err <= 1e-2 and a_err <= 0.05
    for k in (2.0, 3.0):
        p = params_from_kappa(k)
        g = measure_tail_geometry(solve_trace(DrivingTerm.sqrt_family(k), cfg), k)
        c_err = abs(g.center - p.beta) if g.center is not None else math.inf
        d[f"kappa={k:g}"] = {"regime": g.regime, "center_error": c_err}
        ok &= g.regime == "spiral" and c_err <= 5e-2
    g = measure_tail_geometry(solve_trace(DrivingTerm.sqrt_family(4.0), cfg), 4.0)
    e_err = abs(g.endpoint - 2.0) if g.endpoint is not None else math.inf
    ang = g.angle if g.angle is not None else math.inf
    d["kappa=4"] = {"regime": g.regime, "endpoint_error": e_err, "angle": ang}
    ok &= e_err <= 1e-2 and ang < 0.1
    return bool(ok), d


# ------------------------------------------------------------------ 4

def round_trip_error(lam, n, t_keep=0.995, t_cmp=0.99):
    tr = solve_trace(lam, SolverConfig(n))
    keep = tr.t <= t_keep
    z = tr.z[keep]
    back = drive_curve(CurveSamples(z))
    sel = back.t <= t_cmp
    return float(np.max(np.abs(back.values[sel] - lam(back.t[sel]))))


def round_trip(ns=(1024, 2048, 4096)):
    d = {}
    ok = True
    for name, lam in (("0", DrivingTerm.constant(0.0)),
                      ("2sqrt", DrivingTerm.sqrt_family(2.0)),
                      ("5sqrt", DrivingTerm.sqrt_family(5.0))):
        errs = [round_trip_error(lam, n) for n in ns]
        exact = max(errs) <= 1e-12
        order = math.inf if exact else _order(ns, np.maximum(errs, 1e-300))
        d[name] = {"errors": errs, "order": order}
        ok &= errs[-1] <= 2e-2 and order >= 0.5
    return bool(ok), d


# ------------------------------------------------------------------ 5

def semigroup_error(sigma, u, s, m, rng_seed=7):
    """``max |G_{u+s} - G_s^{sigma_u} o G_u|`` at ten points, ``m`` cells per unit log-time."""
    rng = np.random.default_rng(rng_seed)
    z = rng.uniform(-3.0, 3.0, 10) + 1j * rng.uniform(1.0, 3.0, 10)
    ds = 1.0 / m
    grid = np.arange(0.0, u + s + 0.5 * ds, ds)
    G = dict((round(sk / ds), g) for sk, g in solve_G(sigma, grid))
    sig_u = sigma.shifted(u)
    grid2 = np.arange(0.0, s + 0.5 * ds, ds)
    G2 = dict((round(sk / ds), g) for sk, g in solve_G(sig_u, grid2))
    iu, i_s = round(u / ds), round(s / ds)
    lhs = G[iu + i_s](z)
    rhs = G2[i_s](G[iu](z))
    return float(np.max(np.abs(lhs - rhs)))


def renormalization():
    d = {}
    closure = True
    for k, c in ((3.0, 0.0), (5.0, 1.5), (2.0, -0.7)):
        for T in (0.3, 0.75, 0.99):
            lam = DrivingTerm.sqrt_family(k, c)
            f = renormalize_driving(lam, T).form
            closure &= f == SqrtFamily(k, c / math.sqrt(1.0 - T), 1.0)
        closure &= time_change(DrivingTerm.sqrt_family(k)).form == Constant(k)
    d["family_closure"] = bool(closure)
    sigma = SigmaTerm.from_callable(lambda s: 3.0 + 0.5 * np.sin(2.0 * s), 1.0, n=2001)
    errs = [semigroup_error(sigma, 0.3, 0.3, m) for m in (200, 400, 800)]
    d["semigroup_errors"] = errs
    return bool(closure) and max(errs) <= 1e-6, d


# ------------------------------------------------------------------ 6

SPIRAL_SET = CompactSet.disk(2j, 0.5)
SPIRAL_DEPTHS = (8, 12, 16)


def spiral_driving_terms(n=16000):
    return {k: spiral_driving(SPIRAL_SET, 1.0 - 2.0 ** -k, n) for k in SPIRAL_DEPTHS}


def spiral_flagship(terms=None):
    terms = terms or spiral_driving_terms()
    tails = []
    for k in SPIRAL_DEPTHS:
        rep = estimate_sqrt_asymptote(terms[k])
        tails.append(rep.kappa_tail)
    dist = [abs(x - 4.0) for x in tails]
    monotone = all(b < a for a, b in zip(dist, dist[1:]))
    deepest = tails[-1]
    norms = regularity(terms[SPIRAL_DEPTHS[-1]], (0.04, 0.01, 0.0025), horizon=1.0)
    lip = list(norms.local_lip_norms)
    lip_ok = all(b < a for a, b in zip(lip, lip[1:]))
    d = {"kappa_tails": tails, "deepest": deepest, "lip_norms": lip}
    return bool(monotone and 3.3 <= deepest <= 4.7 and lip_ok), d


# ------------------------------------------------------------------ 7

def continuity(terms=None, ns=(8192, 16384)):
    terms = terms or spiral_driving_terms()
    lam = terms[SPIRAL_DEPTHS[1]]
    kap = estimate_sqrt_asymptote(lam).kappa_limit
    d = {}
    ok = True
    for r in (1.25, 0.8):
        lr = DrivingTerm(lam.t, r * lam.values)
        ends, diam_ratio, regimes = [], None, []
        for n in ns:
            tr = solve_trace(lr, SolverConfig(n, "geometric_s"))
            g = measure_tail_geometry(tr, r * kap, horizon=1.0)
            ends.append(g.endpoint)
            regimes.append(g.regime)
            diam_ratio = shell_diameters(tr, horizon=1.0)[2]
        d[f"r={r:g}"] = {"regimes": regimes,
                         "endpoints": [None if e is None else [e.real, e.imag] for e in ends],
                         "shell_ratio": diam_ratio}
        if any(e is None for e in ends):
            ok = False
        elif r > 1.0:
            ok &= abs(ends[-1].imag) <= 0.05
        else:
            ok &= all(e.imag >= 0.1 for e in ends) and diam_ratio < 1.0
    return bool(ok), d


# ------------------------------------------------------------------ 8

def _random_driving(rng, n_modes=6):
    a = rng.normal(size=n_modes) / np.arange(1, n_modes + 1)
    x0 = rng.uniform(-1.0, 1.0)

    def lam(t):
        t = np.asarray(t, dtype=float)
        k = np.arange(1, n_modes + 1)
        return x0 + np.sin(np.pi * np.multiply.outer(t, k)) @ a

    return DrivingTerm.from_callable(lam, rng.uniform(0.2, 2.0), n=513, label="random")


def _extended_slit(eps, n=1200):
    y = np.linspace(0.0, 2.0, n)
    z = 1j * y
    m = max(4, int(round(eps * n)))
    ext = 2j + eps * np.exp(1j * math.pi / 4) * np.linspace(0.0, 1.0, m + 1)[1:]
    return CurveSamples(np.concatenate([z, ext])), CurveSamples(z)


def property_suite():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        a = rng.uniform(-3.0, 2.0)
        b = a + rng.uniform(0.1, 4.0)
        z = complex(rng.uniform(-5.0, 5.0), rng.uniform(-3.0, 3.0))
        if z.imag == 0.0:
            z += 0.1j
        rep = hyperbolic_tools(z, (a, b), check=False)
        worst = max(worst, abs(rep.integral - 2.0 * rep.rho) / abs(rep.integral))
    cauchy_ok = worst <= 1e-8

    ratios = []
    for _ in range(20):
        lam = _random_driving(rng)
        cfg = SolverConfig(512)
        tr = solve_trace(lam, cfg)
        z = tr.z
        diam = max(float(np.max(np.abs(z - w))) for w in z)
        x1, x2 = hull_interval(build_chain(lam, cfg))
        ratios.append((x2 - x1) / diam)
    diam_ok = min(ratios) >= 0.95 and max(ratios) <= 4.2

    epss = (0.2, 0.1, 0.05, 0.025, 0.0125)
    gaps = []
    for eps in epss:
        c2, c1 = _extended_slit(eps)
        gaps.append(abs(drive_curve(c2).total_capacity - drive_curve(c1).total_capacity))
    expo = float(np.polyfit(np.log(epss), np.log(gaps), 1)[0])
    gaps_ok = all(b < a for a, b in zip(gaps, gaps[1:])) and expo >= 0.35

    c1, c2 = hooked_pair(0.05)
    cmp = compare_hulls(c1, c2)
    hook_ok = cmp.sup_driving_gap >= 1.5
    d = {"cauchy_rho_worst": worst, "diam_ratio_range": [min(ratios), max(ratios)],
         "hcap_gaps": gaps, "hcap_exponent": expo, "hooked_gap": cmp.sup_driving_gap,
         "hooked_hausdorff": cmp.epsilon}
    return bool(cauchy_ok and diam_ok and gaps_ok and hook_ok), d


# ------------------------------------------------------------------ 9

def interval_lemma():
    rep = interval_lemma_check(5.0, 0.05, 3.0)
    return rep["ok"], {"min_margin": rep["min_margin"], "threshold": rep["threshold"],
                       "x1_end": rep["x1"][-1]}


CHECKS = {
    1: ("exact-family identities", exact_identities),
    2: ("half-circle reproduction", half_circle),
    3: ("endpoint and angle at desk scale", endpoint_theorems),
    4: ("unzip round trip", round_trip),
    5: ("renormalization closure and semigroup", renormalization),
    6: ("spiral driving asymptote", spiral_flagship),
    7: ("continuity in r", continuity),
    8: ("capacity and closeness properties", property_suite),
    9: ("interval lemma", interval_lemma),
}


def run_checks(numbers=None, log=None, shared=None):
    """Run the selected checks in order; ``log`` receives one line per check.

    ``shared`` caches the spiral driving terms between calls.
    """
    numbers = sorted(CHECKS) if numbers is None else list(numbers)
    shared = {} if shared is None else shared
    out = []
    for k in numbers:
        title, fn = CHECKS[k]
        t0 = time.perf_counter()
        if k in (6, 7):
            if "spiral" not in shared:
                shared["spiral"] = spiral_driving_terms()
            passed, details = fn(shared["spiral"])
        else:
            passed, details = fn()
        res = CheckResult(k, title, bool(passed), details, time.perf_counter() - t0)
        out.append(res)
        if log is not None:
            log(res.line())
    return out
