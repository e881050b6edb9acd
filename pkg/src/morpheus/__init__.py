"""Morpheus consensus as a deterministic state machine with a simulated network."""

from .config import ConfigInvalid, FaultSpec, PayloadSpec, ScenarioConfig
from .ordering import extract, flatten, tau, tau_dagger
from .replica import Batching, Replica
from .simnet import Trace, run

__all__ = [
    "Batching",
    "ConfigInvalid",
    "FaultSpec",
    "PayloadSpec",
    "Replica",
    "ScenarioConfig",
    "Trace",
    "extract",
    "flatten",
    "run",
    "tau",
    "tau_dagger",
]
