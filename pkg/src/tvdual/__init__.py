"""Dual-domain distributed optimisation (PANDA) over time-varying graphs."""

from .algorithms import AlgorithmState, Trace, run
from .graphs import GraphSchedule, contraction_delta, metropolis_weights
from .harness import ExperimentConfig, fit_linear_rate, generate_instance, relative_error
from .objectives import ObjectiveSet, OptimalPair, QuadraticLocalObjective
from .rates import certificate_for_step, step_size_interval, theoretical_lambda

__version__ = "0.1.0"
