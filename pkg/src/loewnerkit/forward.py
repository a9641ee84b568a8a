"""Forward Loewner solver: driving term -> map chain -> trace.

Each grid cell ``[t_k, t_{k+1}]`` becomes one vertical slit step whose
center is the driving value at the cell midpoint.  The trace sample at
``t_k`` is the image of ``lambda(t_k)`` under the inverse chain of the first
``k`` steps.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import DrivingTerm, MapChain, SigmaTerm, SqrtFamily, Trace
from .errors import ArgumentError, NumericError

__all__ = ["SolverConfig", "capacity_nodes", "split_nodes", "build_chain", "solve_trace",
           "solve_on_nodes", "sigma_chain",
           "refinement_sequence", "GMap", "solve_G"]

GRIDS = ("uniform_t", "geometric_s")


@dataclass(frozen=True)
class SolverConfig:
    """Discretization settings.

    ``geometric_s`` spends half of the steps uniformly in ``t`` on the first
    ``1 - tail_fraction`` of the capacity and the other half on nodes
    ``T - T*tail_fraction*exp(-j*ds)`` reaching down to a remaining capacity
    of ``T*tail_fraction/n**2``; a final cell closes the interval.
    """

    n_steps: int = 1024
    grid: str = "uniform_t"
    tail_fraction: float = 0.5
    refinement_levels: int = 1

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ArgumentError("n_steps must be a positive integer")
        if self.grid not in GRIDS:
            raise ArgumentError(f"grid must be one of {GRIDS}")
        if not 0.0 < self.tail_fraction < 1.0:
            raise ArgumentError("tail_fraction must lie in (0, 1)")
        if self.refinement_levels < 1:
            raise ArgumentError("refinement_levels must be >= 1")

    def refined(self, factor=2):
        return SolverConfig(self.n_steps * factor, self.grid, self.tail_fraction,
                            self.refinement_levels)


def capacity_nodes(T, cfg):
    """Grid nodes on ``[0, T]`` with remaining capacities and cell widths.

    Returns ``(t, gap, width)`` where ``gap = T - t`` is computed without
    cancellation and ``width[k] = t[k+1] - t[k]``.
    """
    n = int(cfg.n_steps)
    n_u = n // 2
    n_g = n - n_u - 1
    if cfg.grid == "uniform_t" or n_g < 1:
        t = np.linspace(0.0, T, n + 1)
        gap = T * (1.0 - np.arange(n + 1) / n)
        return t, gap, np.full(n, T / n)
    tau = cfg.tail_fraction
    ds = 2.0 * math.log(n) / n_g
    gap_u = T * (1.0 - (1.0 - tau) * np.arange(n_u) / n_u)
    gap_g = T * tau * np.exp(-ds * np.arange(n_g + 1))
    gap = np.concatenate([gap_u, gap_g, [0.0]])
    t = T - gap
    t[0] = 0.0
    t[-1] = T
    width = np.empty(n)
    width[:n_u] = T * (1.0 - tau) / n_u
    width[n_u:n_u + n_g] = gap_g[:-1] * -math.expm1(-ds)
    width[-1] = gap_g[-1]
    return t, gap, width


def _values_at(lam, t, gap):
    """Driving values at nodes; square-root families are evaluated from the gap."""
    f = lam.form
    if isinstance(f, SqrtFamily) and f.horizon == lam.total_capacity:
        return f.offset + f.kappa * np.sqrt(np.maximum(gap, 0.0))
    return lam(t)


def _discretize(lam, cfg, nodes=None):
    T = lam.total_capacity
    t, gap, width = capacity_nodes(T, cfg) if nodes is None else nodes
    gap_mid = gap[:-1] - 0.5 * width
    centers = _values_at(lam, T - gap_mid, gap_mid)
    values = _values_at(lam, t, gap)
    return t, width, centers, values


def split_nodes(T, split, cfg):
    """Nodes of ``cfg`` laid on ``[0, split]`` and again on ``[split, T]``.

    Guarantees a node at ``split``; both pieces use ``cfg.n_steps`` cells.
    """
    t1, gap1, w1 = capacity_nodes(split, cfg)
    t2, gap2, w2 = capacity_nodes(T - split, cfg)
    t = np.concatenate([t1, split + t2[1:]])
    gap = np.concatenate([(T - split) + gap1, gap2[1:]])
    t[-1] = T
    return t, gap, np.concatenate([w1, w2])


def build_chain(lam, cfg=None):
    """One slit step per grid cell, centered at the midpoint driving value.

    >>> ch = build_chain(DrivingTerm.constant(0.0), SolverConfig(4))
    >>> ch.centers.tolist(), ch.capacities.tolist()
    ([0.0, 0.0, 0.0, 0.0], [0.25, 0.25, 0.25, 0.25])
    """
    cfg = cfg or SolverConfig()
    _, width, centers, _ = _discretize(lam, cfg)
    return MapChain(centers, width)


def _trace_from(t, width, centers, nodes):
    # Work relative to the final driving value: the tip region is where
    # absolute coordinates would waste digits.
    shift = float(nodes[-1])
    wr, wi = _kernels.trace_points(np.ascontiguousarray(centers - shift),
                                   np.ascontiguousarray(width),
                                   np.ascontiguousarray(nodes[1:] - shift))
    z = np.concatenate([[nodes[0]], (wr + shift) + 1j * wi])
    if not np.all(np.isfinite(z)):
        k = int(np.flatnonzero(~np.isfinite(z))[0])
        raise NumericError(f"trace evaluation failed at step {k}", index=k)
    return Trace(t, z)


def solve_trace(lam, cfg=None):
    """Trace ``gamma(t_k) = f_1 o ... o f_k(lambda(t_k))`` on the configured grid.

    >>> tr = solve_trace(DrivingTerm.constant(0.0), SolverConfig(256))
    >>> bool(abs(tr.z[-1] - 2j) < 1e-12)
    True
    """
    cfg = cfg or SolverConfig()
    t, width, centers, values = _discretize(lam, cfg)
    return _trace_from(t, width, centers, values)


def solve_on_nodes(lam, nodes):
    """Chain and trace on explicit ``(t, gap, width)`` nodes."""
    t, width, centers, values = _discretize(lam, None, nodes)
    return MapChain(centers, width), _trace_from(t, width, centers, values)


def refinement_sequence(lam, cfg):
    """Yield ``(n_steps, trace)`` for ``cfg.refinement_levels`` successive doublings."""
    for level in range(cfg.refinement_levels):
        c = SolverConfig(cfg.n_steps * 2 ** level, cfg.grid, cfg.tail_fraction)
        yield c.n_steps, solve_trace(lam, c)


class GMap:
    """``G_s = g_t / sqrt(1 - t)`` realized by a chain prefix."""

    __slots__ = ("s", "chain")

    def __init__(self, s, chain):
        self.s = float(s)
        self.chain = chain

    def __call__(self, z):
        return math.exp(0.5 * self.s) * self.chain.forward(z)

    def inverse(self, w):
        return self.chain.inverse(np.asarray(w) * math.exp(-0.5 * self.s))

    def __repr__(self):
        return f"GMap(s={self.s:.6g}, steps={len(self.chain)})"


def sigma_chain(sigma, s_grid):
    """Chain on the capacity grid ``t = 1 - exp(-s)`` for the nodes ``s_grid``."""
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or s.size < 1 or s[0] != 0.0 or np.any(np.diff(s) <= 0.0):
        raise ArgumentError("s_grid must be strictly increasing from 0")
    if s[-1] > sigma.s_max * (1.0 + 1e-12):
        raise ArgumentError("s_grid exceeds the range of sigma")
    e = np.exp(-s)
    width = e[:-1] * -np.expm1(-np.diff(s))
    s_mid = -np.log(0.5 * (e[:-1] + e[1:]))
    centers = sigma(np.minimum(s_mid, sigma.s_max)) * np.exp(-0.5 * s_mid)
    return MapChain(centers, width)


def solve_G(sigma, s_grid):
    """Time-changed maps ``G_s`` at every node of ``s_grid``.

    Returns a list of ``(s, GMap)``; ``GMap`` is callable and has ``inverse``.
    """
    s = np.asarray(s_grid, dtype=float)
    chain = sigma_chain(sigma, s)
    return [(float(sk), GMap(sk, chain.prefix(k))) for k, sk in enumerate(s)]
