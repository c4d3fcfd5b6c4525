"""Coupled autoregressive active inference agents for a double mass-spring-damper."""

from ._backend import BACKEND
from .agent import AgentMemory, ArxEfeAgent, ControlGrid, GoalPrior, assemble_regressor
from .belief import (
    GammaMarginal,
    NormalGammaBelief,
    StudentTPredictive,
    log_pdf_gaussian,
    log_pdf_student_t,
    marginal_tau,
    marginal_theta,
    posterior_predictive,
    update,
)
from .ensemble import AgentStepMetrics, CouplingTopology, Ensemble
from .errors import NumericalError, TrialError
from .experiment import (
    ComparisonReport,
    ExperimentConfig,
    MonteCarloResult,
    StepRecord,
    TrialLog,
    build_ensemble,
    compare,
    run_monte_carlo,
    run_trial,
)
from .plant import MsdParams, PlantState, Sensor, acceleration, advance, energy, measure, verlet_step

__version__ = "0.1.0"
