"""Redlich-Kwong real-gas thermodynamics and steady adiabatic filtration.

Reduced-unit equation of state from the Massieu-Planck potential, spinodal
and coexistence curves, isentropic filtration potential Q and 3-D phase
fields for point sources.
"""

from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .eos import CriticalPoint, DomainError, GasModel, GasParams, KappaForm, StatePoint, from_reduced, to_reduced
from .filtration import BoxDomain, Mode, PhaseField, Source, SourceSystem, solve_field, solve_harmonic, u_free_space, validate_sources
from .isentrope import (
    AsymptoticCoeffs,
    Isentrope,
    MediumParams,
    asymptotic_coeffs,
    build,
    dp_dv,
    h_curve,
    h_function,
    invert_q,
    pressure_on_isentrope,
    q_potential,
    sigma_star,
    temperature,
)
from .phase import CoexistenceCurve, CoexistencePoint, PhaseLabel, classify, equal_area_pressure, solve_pair, trace_curve

__version__ = "0.1.0"
