from .loops import (
    BrainActor,
    LiveHuman,
    RealtimeBrainActor,
    RealtimeLoop,
    ScriptedHuman,
    run_deterministic,
)
from .world import AgentBody, AgentView, Location, World, WorldMap, move_toward

__all__ = [
    "AgentBody",
    "AgentView",
    "BrainActor",
    "LiveHuman",
    "Location",
    "RealtimeBrainActor",
    "RealtimeLoop",
    "ScriptedHuman",
    "World",
    "WorldMap",
    "move_toward",
    "run_deterministic",
]
