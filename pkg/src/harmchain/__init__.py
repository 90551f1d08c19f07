"""Pinned harmonic chain under a constant pull: exact spectral solution,
symplectic integration, extremal extension bounds, a scaling-limit phase
diagram, Mie statics and the number theory behind frequency independence."""

__version__ = "0.1.0"

from .chain import (
    AnalysisWindow,
    ChainParams,
    Convention,
    exact_displacement,
    exact_displacements,
    extension_coefficients,
    extension_deviation,
    gamma_coefficient,
    mode_frequency,
)
from .errors import ChainError, DomainError, StabilityError
from .extremal import ExtremalReport, sup_inf_extension, theorem_ratio_scan, torus_partial_sum_bound
from .integrator import SystemSpec, integrate, spectral_vs_ode_error, total_energy
from .numtheory import euler_totient, integer_relation_search, rational_independence_check, totient_liminf_scan
from .phase import NoFixedPoint, PhaseVerdict, ScalingFamily, phase_sweep, relative_extension, static_fixed_point
from .potentials import MiePotential, QuadraticPotential

__all__ = [
    "AnalysisWindow", "ChainParams", "Convention", "exact_displacement", "exact_displacements",
    "extension_coefficients", "extension_deviation", "gamma_coefficient", "mode_frequency",
    "ChainError", "DomainError", "StabilityError",
    "ExtremalReport", "sup_inf_extension", "theorem_ratio_scan", "torus_partial_sum_bound",
    "SystemSpec", "integrate", "spectral_vs_ode_error", "total_energy",
    "euler_totient", "integer_relation_search", "rational_independence_check", "totient_liminf_scan",
    "NoFixedPoint", "PhaseVerdict", "ScalingFamily", "phase_sweep", "relative_extension", "static_fixed_point",
    "MiePotential", "QuadraticPotential",
]
