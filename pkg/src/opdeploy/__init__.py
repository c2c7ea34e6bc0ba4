"""Deployed operation models, efficiency indices and a batch heating testbed."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    GridMismatchError,
    ModelError,
    SimulationError,
    UndefinedIndexError,
)
from .heating_plant import ControlSetting, PlantConfig, heater_life, run_operation, wear_rate
from .indices import OperationSummary, conditional_return, efficiency_f, summarize
from .operation_model import (
    CostRates,
    DeployedModel,
    ReducedModel,
    RegistrationModel,
    SimplifiedModel,
    decompose,
    deploy,
    reduce,
    simplify,
    tight_resource_flow,
)
from .signal_core import CumulativeSignal, Signal, TimeGrid, integrate_cumulative, integrate_interval
from .sweep_optimizer import Criterion, SweepRecord, select_optimal, sweep

__all__ = [
    "ConfigurationError",
    "GridMismatchError",
    "ModelError",
    "SimulationError",
    "UndefinedIndexError",
    "ControlSetting",
    "PlantConfig",
    "heater_life",
    "run_operation",
    "wear_rate",
    "OperationSummary",
    "conditional_return",
    "efficiency_f",
    "summarize",
    "CostRates",
    "DeployedModel",
    "ReducedModel",
    "RegistrationModel",
    "SimplifiedModel",
    "decompose",
    "deploy",
    "reduce",
    "simplify",
    "tight_resource_flow",
    "CumulativeSignal",
    "Signal",
    "TimeGrid",
    "integrate_cumulative",
    "integrate_interval",
    "Criterion",
    "SweepRecord",
    "select_optimal",
    "sweep",
]
