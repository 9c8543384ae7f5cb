"""Approximate tensorization of entropy for finite Gibbs measures, checked by exact enumeration."""
from .coefficients import CoefficientReport, alpha_delta, coefficient_report, gamma_kappa
from .covers import Cover, named_cover
from .dynamics import HeatBathGenerator, entropy_trace, evolve, spectral_gap
from .errors import AtlabError, CapacityError, ConditioningError, DomainError, ValidationError
from .inequalities import check, check_many, estimate_optimal_constant, implication_audit
from .model import GibbsModel, build_measure, curie_weiss, ising, potts
from .space import ConfigurationSpace, Measure, entropy, expectation, variance

__version__ = "0.1.0"
