from .actions import (
    OBSERVATION_KINDS,
    OPTION_KINDS,
    Action,
    MoveAction,
    Observation,
    Option,
    SayAction,
    parse_option_completion,
)
from .brain import AgentBrain, BrainConfig

__all__ = [
    "Action",
    "AgentBrain",
    "BrainConfig",
    "MoveAction",
    "OBSERVATION_KINDS",
    "OPTION_KINDS",
    "Observation",
    "Option",
    "SayAction",
    "parse_option_completion",
]
