"""Numerical toolkit for chordal Loewner evolution in the upper half-plane."""

from .core import (DrivingTerm, MapChain, SigmaTerm, SlitStep, Trace, chain_eval,
                   hcap_estimate, hyperbolic_tools, time_change, transform_driving,
                   vertical_slit_map)
from .errors import (AccuracyWarning, ArgumentError, ContractError, ConvergenceError, FormatError,
                     DomainError, LoewnerError, NumericError)
from .explicit import params_from_kappa, trace_explicit
from .forward import SolverConfig, build_chain, solve_trace
from .inverse import CurveSamples, drive_curve
from .spiral import CompactSet, build_spiral, spiral_driving
from .analysis import (estimate_sqrt_asymptote, measure_tail_geometry, regularity,
                       renormalize_driving)

__version__ = "0.1.0"
