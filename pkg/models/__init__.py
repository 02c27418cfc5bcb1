"""Data models package for the DP two-stage ERM library"""
from .constants import ProblemConstants
from .dataset import Dataset, Record, NeighborPair, ValidationReport, validate, make_neighbor
from .weight_vector import WeightVector
from .configs import IpwConfig, MmdConfig, EbwConfig, UniformConfig, KernelSpec, default_config, SCHEMES
from .privacy import PrivacyParams, Calibration, MECHANISMS
from .budget import StabilityBudget, WeightPerturbation
from .solution import SolveDiagnostics, ErmSpec, ErmSolution
from .rule import DecisionRule, EvalReport
from .experiment import ScenarioSpec, EvalSet, ExperimentPlan, ResultRow, SCENARIOS

__all__ = [
    'ProblemConstants', 'Dataset', 'Record', 'NeighborPair', 'ValidationReport', 'validate', 'make_neighbor',
    'WeightVector', 'IpwConfig', 'MmdConfig', 'EbwConfig', 'UniformConfig', 'KernelSpec', 'default_config',
    'SCHEMES', 'PrivacyParams', 'Calibration', 'MECHANISMS', 'StabilityBudget', 'WeightPerturbation',
    'SolveDiagnostics', 'ErmSpec', 'ErmSolution', 'DecisionRule', 'EvalReport',
    'ScenarioSpec', 'EvalSet', 'ExperimentPlan', 'ResultRow', 'SCENARIOS'
]
