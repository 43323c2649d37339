"""Spectral toolkit for the periodic derivative nonlinear Schrodinger equation.

Covers the gauge transformation, the normal-form frequency-interaction terms,
integrating-factor time stepping, discrete Bourgain-type norms and the
smoothing/growth diagnostics built on them.
"""
__version__ = "0.1.0"

from .spectral import (BandSelector, Spectrum, TorusField, analyze, band_select,
                       bessel_apply, derivative, lp_norm, multiply_dealiased, random_hs,
                       sobolev_norm, synthesize)
from .conserved import ConservedTriple, conserved, energy, mass, momentum
from .gauge import (GaugeState, accumulate_g, compute_mu, galilean_shift,
                    gauge_chain, gauge_map, mean_zero_primitive, psi_functional)
from .terms import (ComparisonRule, TermKind, duhamel_N, duhamel_residual,
                    eval_term, gauge_rhs, phase_phi, phase_psi, s_set_member)
from .evolution import (NumericalAbort, StepperConfig, Trajectory, dnls_rhs,
                        evolve, linear_propagate)
from .spacetime import (SpacetimeField, WindowFn, mixed_lp_norm, spacetime_norm,
                        window_extend)
from .diagnostics import (GrowthParams, SmoothingParams, freq_split_series,
                          growth_series, inequality_trial, smoothing_series)

__all__ = [
    "BandSelector", "Spectrum", "TorusField", "analyze", "band_select", "bessel_apply",
    "derivative", "lp_norm", "multiply_dealiased", "random_hs", "sobolev_norm", "synthesize",
    "ConservedTriple", "conserved", "energy", "mass", "momentum",
    "GaugeState", "accumulate_g", "compute_mu", "galilean_shift", "gauge_chain", "gauge_map",
    "mean_zero_primitive", "psi_functional",
    "ComparisonRule", "TermKind", "duhamel_N", "duhamel_residual", "eval_term", "gauge_rhs",
    "phase_phi", "phase_psi", "s_set_member",
    "NumericalAbort", "StepperConfig", "Trajectory", "dnls_rhs", "evolve", "linear_propagate",
    "SpacetimeField", "WindowFn", "mixed_lp_norm", "spacetime_norm", "window_extend",
    "GrowthParams", "SmoothingParams", "freq_split_series", "growth_series",
    "inequality_trial", "smoothing_series",
]
