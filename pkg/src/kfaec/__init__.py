"""Block-frequency-domain acoustic echo cancellation with mask postfiltering."""

from .blocks import BlockSpec, FarEndBuffer
from .kalman import KalmanState, StepSize
from .pipeline import AecPipeline, RunConfig, process_stream
from .scenario import Scenario, ScenarioConfig, build_scenario

__all__ = [
    "AecPipeline",
    "BlockSpec",
    "FarEndBuffer",
    "KalmanState",
    "RunConfig",
    "Scenario",
    "ScenarioConfig",
    "StepSize",
    "build_scenario",
    "process_stream",
]

__version__ = "0.1.0"
