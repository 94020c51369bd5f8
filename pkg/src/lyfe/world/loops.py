"""Drivers that connect brains (and human proxies) to the world clock.

Deterministic mode: one thread, fixed agent order, summary interleaved
before action whenever its trigger fires — byte-identical runs.

Realtime mode: the world ticks on its own schedule; each brain runs an
action thread and a summary thread, communicating with the world only
through queues, so a slow summary call never delays an action.
"""

from __future__ import annotations

import queue
import threading
import time
from collections import deque
from typing import Callable, Optional

from ..agent.actions import Action, MoveAction, Observation, SayAction
from ..agent.brain import AgentBrain
from ..lang import LanguageProvider
from .world import AgentView, World


class BrainActor:
    """Synchronous adapter for deterministic runs."""

    def __init__(self, brain: AgentBrain, lm: LanguageProvider):
        self.brain = brain
        self.lm = lm

    def act(self, observations: list[Observation], view: AgentView) -> Optional[Action]:
        return self.brain.tick_action(observations, view, self.lm, inline_summary=True)


class ScriptedHuman:
    """Replays a fixed transcript: entries are (tick, "say"|"move", payload)."""

    def __init__(self, player_id: str, script: list[tuple[int, str, object]]):
        self.player_id = player_id
        self.script = sorted(script, key=lambda e: e[0])
        self.received: list[Observation] = []
        self.on_observation: Optional[Callable] = None

    def act(self, observations: list[Observation], view: AgentView) -> Optional[Action]:
        self.received.extend(observations)
        if self.on_observation:
            for obs in observations:
                self.on_observation(obs)
        for tick, kind, payload in self.script:
            if tick == view.tick:
                if kind == "say":
                    return SayAction(str(payload))
                if kind == "move":
                    return MoveAction(str(payload))
        return None


class LiveHuman:
    """Queue-fed proxy for a gateway session; deliveries stream back out."""

    def __init__(self, player_id: str, on_observation: Optional[Callable] = None):
        self.player_id = player_id
        self.inbox: queue.Queue = queue.Queue()
        self.on_observation = on_observation

    def say(self, text: str) -> None:
        self.inbox.put(SayAction(text))

    def move(self, x: float, y: float) -> None:
        self.inbox.put(MoveAction(f"@{x},{y}"))

    def act(self, observations: list[Observation], view: AgentView) -> Optional[Action]:
        if self.on_observation:
            for obs in observations:
                self.on_observation(obs)
        try:
            return self.inbox.get_nowait()
        except queue.Empty:
            return None


class RealtimeBrainActor:
    """Two worker threads per brain: actions and summaries, decoupled.

    ``act`` (called from the world thread) only moves queue items, so the
    world clock is never blocked by a provider call.
    """

    def __init__(self, brain: AgentBrain, lm: LanguageProvider):
        self.brain = brain
        self.lm = lm
        self._inbox: queue.Queue = queue.Queue()
        self._outbox: deque = deque()
        self._summary_wake = threading.Event()
        self._running = False
        self.action_latencies: list[float] = []
        self._threads: list[threading.Thread] = []

    def start(self) -> None:
        self._running = True
        action = threading.Thread(target=self._action_loop, daemon=True)
        summary = threading.Thread(target=self._summary_loop, daemon=True)
        self._threads = [action, summary]
        action.start()
        summary.start()

    def stop(self) -> None:
        self._running = False
        self._summary_wake.set()
        for thread in self._threads:
            thread.join(timeout=2.0)

    def act(self, observations: list[Observation], view: AgentView) -> Optional[Action]:
        self._inbox.put((observations, view))
        try:
            return self._outbox.popleft()
        except IndexError:
            return None

    def _action_loop(self) -> None:
        while self._running:
            try:
                observations, view = self._inbox.get(timeout=0.1)
            except queue.Empty:
                continue
            start = time.perf_counter()
            action = self.brain.tick_action(
                observations, view, self.lm, inline_summary=False
            )
            self.action_latencies.append(time.perf_counter() - start)
            if action is not None:
                self._outbox.append(action)
            if self.brain.summary_due():
                self._summary_wake.set()

    def _summary_loop(self) -> None:
        while self._running:
            self._summary_wake.wait(timeout=0.1)
            self._summary_wake.clear()
            if not self._running:
                return
            if self.brain.summary_due():
                self.brain.update_summary(self.lm)


def run_deterministic(world: World, actors: dict, ticks: int) -> None:
    for _ in range(ticks):
        world.step(actors)


class RealtimeLoop:
    """World clock thread for realtime mode (default 2 ticks/s).

    External mutations (gateway commands, attach/detach) go through
    ``submit`` and run on the loop thread at the next tick boundary;
    per-tick deltas fan out to subscribers.
    """

    def __init__(
        self,
        world: World,
        actors: dict,
        ticks_per_second: float = 2.0,
        max_ticks: Optional[int] = None,
    ):
        if world.mode != "realtime":
            raise ValueError("RealtimeLoop requires a realtime-mode world")
        self.world = world
        self.actors = actors
        self.period = 1.0 / ticks_per_second
        self.max_ticks = max_ticks
        self._commands: queue.Queue = queue.Queue()
        self._subscribers: list[Callable[[dict], None]] = []
        self._running = False
        self._thread: Optional[threading.Thread] = None
        self._lock = threading.Lock()

    def submit(self, fn: Callable[[], None]) -> None:
        self._commands.put(fn)

    def subscribe(self, fn: Callable[[dict], None]) -> None:
        with self._lock:
            self._subscribers.append(fn)

    def unsubscribe(self, fn: Callable[[dict], None]) -> None:
        with self._lock:
            if fn in self._subscribers:
                self._subscribers.remove(fn)

    def snapshot(self) -> dict:
        world = self.world
        return {
            "kind": "world",
            "proto": "v1",
            "tick": world.tick,
            "agents": [
                {
                    "id": body.agent_id,
                    "x": body.x,
                    "y": body.y,
                    "human": body.is_human,
                    "option": self._option_of(body.agent_id),
                    "destination": body.destination_name,
                }
                for body in world.bodies.values()
            ],
            "locations": [
                {"name": loc.name, "x": loc.x, "y": loc.y}
                for loc in world.map.locations.values()
            ],
        }

    def _option_of(self, agent_id: str) -> str:
        actor = self.actors.get(agent_id)
        brain = getattr(actor, "brain", None)
        if brain is None or brain.current_option is None:
            return ""
        return brain.current_option.kind

    def start(self) -> None:
        for actor in self.actors.values():
            if isinstance(actor, RealtimeBrainActor):
                actor.start()
        self._running = True
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._running = False
        if self._thread:
            self._thread.join(timeout=5.0)
        for actor in self.actors.values():
            if isinstance(actor, RealtimeBrainActor):
                actor.stop()

    def _run(self) -> None:
        while self._running:
            if self.max_ticks is not None and self.world.tick >= self.max_ticks:
                self._running = False
                break
            start = time.perf_counter()
            while True:
                try:
                    self._commands.get_nowait()()
                except queue.Empty:
                    break
            self.world.step(self.actors)
            self._publish({"kind": "tick", "proto": "v1", "tick": self.world.tick,
                           "agents": self.snapshot()["agents"]})
            elapsed = time.perf_counter() - start
            if elapsed < self.period:
                time.sleep(self.period - elapsed)

    def _publish(self, delta: dict) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
        for fn in subscribers:
            fn(delta)
