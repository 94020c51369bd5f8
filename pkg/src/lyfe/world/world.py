"""Discrete-tick town: a 2D plane with named landmarks, straight-line
movement, and vicinity-based group conversation delivery.

An utterance spoken at tick t enters the pending queue and is delivered at
tick t+1 to every *other* body within the vicinity radius of the speaker,
measured at delivery time. That single rule produces the group-conversation
dynamics everything downstream measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Protocol

from ..agent.actions import Action, MoveAction, Observation, SayAction

WorldLogger = Callable[[int, str, dict], None]


@dataclass(frozen=True)
class Location:
    name: str
    x: float
    y: float


class WorldMap:
    def __init__(
        self,
        locations: list[Location],
        vicinity_radius: float = 10.0,
        speed: float = 1.4,
        tick_seconds: float = 1.0,
    ):
        if vicinity_radius <= 0:
            raise ValueError("vicinity_radius must be > 0")
        names = [loc.name for loc in locations]
        if len(names) != len(set(names)):
            raise ValueError("location names must be unique")
        self.locations = {loc.name: loc for loc in locations}
        self.vicinity_radius = vicinity_radius
        self.speed = speed
        self.tick_seconds = tick_seconds

    @classmethod
    def from_file(cls, path: Path | str) -> "WorldMap":
        """Parse the line-based map format.

        Lines: ``param <name> <value>`` or ``location <name...> <x> <y>``;
        ``#`` comments and blank lines ignored. Location names may contain
        spaces (last two fields are coordinates).
        """
        params: dict[str, float] = {}
        locations: list[Location] = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                fields = line.split()
                if fields[0] == "param" and len(fields) == 3:
                    params[fields[1]] = float(fields[2])
                elif fields[0] == "location" and len(fields) >= 4:
                    name = " ".join(fields[1:-2])
                    locations.append(Location(name, float(fields[-2]), float(fields[-1])))
                else:
                    raise ValueError(f"{path}:{lineno}: unrecognized line {line!r}")
        return cls(
            locations,
            vicinity_radius=params.get("vicinity_radius", 10.0),
            speed=params.get("speed", 1.4),
            tick_seconds=params.get("tick_seconds", 1.0),
        )


@dataclass
class AgentBody:
    agent_id: str
    x: float
    y: float
    speed: float = 1.4
    destination: Optional[tuple[float, float]] = None
    destination_name: str = ""
    target_agent: Optional[str] = None  # dynamic destination, re-resolved per tick
    is_human: bool = False

    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    def distance_to(self, x: float, y: float) -> float:
        return math.hypot(self.x - x, self.y - y)


def move_toward(body: AgentBody, target: tuple[float, float]) -> tuple[float, float]:
    """Advance min(speed, remaining) along the straight line; clamps exactly."""
    dx = target[0] - body.x
    dy = target[1] - body.y
    dist = math.hypot(dx, dy)
    if dist == 0.0:
        return body.position()
    if dist <= body.speed:
        body.x, body.y = target
    else:
        step = body.speed / dist
        body.x += dx * step
        body.y += dy * step
    return body.position()


class Actor(Protocol):
    def act(self, observations: list[Observation], view: "AgentView") -> Optional[Action]:
        ...


@dataclass
class AgentView:
    """Per-agent snapshot handed to the brain each tick."""

    tick: int
    self_id: str
    position: tuple[float, float]
    nearby_names: list[str]
    location_names: list[str]
    agent_names: list[str]
    _at_destination: Callable[[str], bool] = field(default=lambda target: False, repr=False)

    def at_destination(self, target: str) -> bool:
        return self._at_destination(target)


class World:
    def __init__(
        self,
        world_map: WorldMap,
        mode: str = "deterministic",
        log: Optional[WorldLogger] = None,
    ):
        if mode not in ("deterministic", "realtime"):
            raise ValueError("mode must be deterministic or realtime")
        self.map = world_map
        self.mode = mode
        self.tick = 0
        self.tick_seconds = world_map.tick_seconds
        self.bodies: dict[str, AgentBody] = {}  # insertion order = processing order
        self.pending_utterances: list[tuple[str, str, int]] = []
        self._pending_system: list[tuple[str, str]] = []  # (agent_id, text)
        self.log = log or (lambda tick, kind, payload: None)

    # ------------------------------------------------------------------

    def add_body(self, agent_id: str, x: float, y: float, is_human: bool = False) -> AgentBody:
        if agent_id in self.bodies:
            raise ValueError(f"duplicate body id {agent_id!r}")
        body = AgentBody(agent_id, x, y, speed=self.map.speed, is_human=is_human)
        self.bodies[agent_id] = body
        self.log(self.tick, "spawn", {"agent": agent_id, "x": x, "y": y})
        return body

    def spawn_at(self, agent_id: str, location: str) -> AgentBody:
        loc = self.map.locations[location]
        return self.add_body(agent_id, loc.x, loc.y)

    def attach_human(
        self, player_id: str, position: tuple[float, float], scripted: bool = False
    ) -> AgentBody:
        """Add a human proxy body. Live humans need realtime mode; scripted
        transcript replays are allowed in both modes."""
        if self.mode == "deterministic" and not scripted:
            raise ValueError("live humans require realtime mode")
        if player_id in self.bodies:
            raise ValueError(f"duplicate player_id {player_id!r}")
        return self.add_body(player_id, position[0], position[1], is_human=True)

    def detach(self, agent_id: str) -> None:
        self.bodies.pop(agent_id, None)

    # ------------------------------------------------------------------

    def _resolve_destination(self, body: AgentBody) -> Optional[tuple[float, float]]:
        if body.target_agent is not None:
            target = self.bodies.get(body.target_agent)
            return target.position() if target else None
        return body.destination

    def _within_radius(self, body: AgentBody, other: AgentBody) -> bool:
        return body.distance_to(other.x, other.y) <= self.map.vicinity_radius

    def set_destination(self, agent_id: str, target: str) -> bool:
        """Point a body at a location, another agent, or "@x,y"; False if unknown."""
        body = self.bodies[agent_id]
        if target.startswith("@"):
            try:
                x_str, y_str = target[1:].split(",", 1)
                body.destination = (float(x_str), float(y_str))
            except ValueError:
                self._pending_system.append((agent_id, f"unknown destination: {target}"))
                return False
            body.destination_name = target
            body.target_agent = None
            return True
        if target in self.map.locations:
            loc = self.map.locations[target]
            body.destination = (loc.x, loc.y)
            body.destination_name = target
            body.target_agent = None
            return True
        if target in self.bodies and target != agent_id:
            body.target_agent = target
            body.destination_name = target
            body.destination = None
            return True
        self._pending_system.append((agent_id, f"unknown destination: {target}"))
        self.log(self.tick, "idle_unknown_destination", {"agent": agent_id, "target": target})
        return False

    def queue_utterance(self, speaker: str, text: str) -> None:
        self.pending_utterances.append((speaker, text, self.tick))

    def view_for(self, agent_id: str) -> AgentView:
        body = self.bodies[agent_id]
        nearby = [
            other_id
            for other_id, other in self.bodies.items()
            if other_id != agent_id and self._within_radius(body, other)
        ]

        def at_destination(target: str) -> bool:
            if target in self.map.locations:
                loc = self.map.locations[target]
                return body.distance_to(loc.x, loc.y) < 1e-9
            other = self.bodies.get(target)
            if other is None:
                return True  # target gone: treat as reached so MOVE can end
            return self._within_radius(body, other)

        return AgentView(
            tick=self.tick,
            self_id=agent_id,
            position=body.position(),
            nearby_names=nearby,
            location_names=sorted(self.map.locations),
            agent_names=[b for b in self.bodies if b != agent_id],
            _at_destination=at_destination,
        )

    # ------------------------------------------------------------------

    def step(self, actors: dict[str, Actor]) -> dict[str, list[Observation]]:
        """Advance one tick; returns the observations delivered per agent."""
        observations: dict[str, list[Observation]] = {aid: [] for aid in self.bodies}

        # 1. movement (fixed body order), arrivals observed by the mover
        for agent_id, body in self.bodies.items():
            target = self._resolve_destination(body)
            if target is None:
                continue
            move_toward(body, target)
            if body.target_agent is None and body.position() == target:
                observations[agent_id].append(
                    Observation(
                        "arrival", None, f"arrived at {body.destination_name}", self.tick
                    )
                )
                self.log(
                    self.tick, "arrival", {"agent": agent_id, "at": body.destination_name}
                )
                body.destination = None
                body.destination_name = ""

        # 2. deliver queued utterances to everyone in range except the speaker
        pending, self.pending_utterances = self.pending_utterances, []
        for speaker, text, _spoken_tick in pending:
            speaker_body = self.bodies.get(speaker)
            if speaker_body is None:
                continue
            recipients = [
                other_id
                for other_id, other in self.bodies.items()
                if other_id != speaker and self._within_radius(speaker_body, other)
            ]
            for other_id in recipients:
                observations[other_id].append(
                    Observation("utterance", speaker, text, self.tick)
                )
            self.log(
                self.tick,
                "deliver",
                {"speaker": speaker, "text": text, "recipients": recipients},
            )

        # 3. system notices queued by earlier failures
        pending_system, self._pending_system = self._pending_system, []
        for agent_id, text in pending_system:
            if agent_id in observations:
                observations[agent_id].append(Observation("system", None, text, self.tick))

        # 4. proximity pings (novelty filter dedups repeats agent-side)
        for agent_id, body in self.bodies.items():
            for other_id, other in self.bodies.items():
                if other_id == agent_id:
                    continue
                if self._within_radius(body, other):
                    observations[agent_id].append(
                        Observation("proximity", other_id, f"nearby: {other_id}", self.tick)
                    )

        # 5. collect actions for next tick, fixed agent order
        for agent_id in list(self.bodies):
            actor = actors.get(agent_id)
            if actor is None:
                continue
            action = actor.act(observations.get(agent_id, []), self.view_for(agent_id))
            if isinstance(action, SayAction):
                self.queue_utterance(agent_id, action.text)
            elif isinstance(action, MoveAction):
                self.set_destination(agent_id, action.target)

        self.tick += 1
        return observations
