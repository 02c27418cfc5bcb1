"""Simulation data-generating mechanisms"""
from .scenarios import ScenarioModel, truth_functions
from .generator import (
    sample_covariates, treatment_propensity, assign_treatment, scenario_constants, generate
)

__all__ = [
    'ScenarioModel', 'truth_functions', 'sample_covariates', 'treatment_propensity', 'assign_treatment',
    'scenario_constants', 'generate'
]
