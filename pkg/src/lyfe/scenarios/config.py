"""Scenario configs (format "scenario v1"): seeded personas plus the
evaluation spec (key facts, interviews, ablation flags).

The loader validates every cross-reference and names the offending field
in its error message, so config mistakes fail fast.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

FORMAT = "scenario v1"


class ScenarioError(Exception):
    pass


@dataclass(frozen=True)
class AgentSpec:
    name: str
    persona: str
    goal: str
    recent_memories: tuple[str, ...]
    long_term_memories: tuple[str, ...]
    spawn: str


@dataclass(frozen=True)
class KeyFact:
    fact_id: str
    text: str
    keywords: tuple[str, ...]


@dataclass(frozen=True)
class Category:
    name: str
    keywords: tuple[str, ...]


@dataclass(frozen=True)
class InterviewSpec:
    agent: str
    questions: tuple[str, ...]
    categories: tuple[Category, ...]
    repeats: int = 3


@dataclass(frozen=True)
class AblationFlags:
    no_option_action: bool = False
    no_self_monitor: bool = False
    flat_memory: bool = False

    def any(self) -> bool:
        return self.no_option_action or self.no_self_monitor or self.flat_memory


@dataclass
class ScenarioConfig:
    name: str
    map: str
    duration_ticks: int
    agents: list[AgentSpec]
    key_facts: list[KeyFact] = field(default_factory=list)
    interviews: list[InterviewSpec] = field(default_factory=list)
    ablations: AblationFlags = field(default_factory=AblationFlags)
    params: dict = field(default_factory=dict)

    def agent(self, name: str) -> AgentSpec:
        for spec in self.agents:
            if spec.name == name:
                return spec
        raise ScenarioError(f"no agent named {name!r}")

    def key_fact(self, fact_id: str) -> KeyFact:
        for fact in self.key_facts:
            if fact.fact_id == fact_id:
                return fact
        raise ScenarioError(f"unknown fact_id {fact_id!r}")

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "name": self.name,
            "map": self.map,
            "duration_ticks": self.duration_ticks,
            "params": self.params,
            "agents": [
                {
                    "name": a.name,
                    "persona": a.persona,
                    "goal": a.goal,
                    "recent_memories": list(a.recent_memories),
                    "long_term_memories": list(a.long_term_memories),
                    "spawn": a.spawn,
                }
                for a in self.agents
            ],
            "key_facts": [
                {"id": f.fact_id, "text": f.text, "keywords": list(f.keywords)}
                for f in self.key_facts
            ],
            "interviews": [
                {
                    "agent": i.agent,
                    "questions": list(i.questions),
                    "categories": [
                        {"name": c.name, "keywords": list(c.keywords)} for c in i.categories
                    ],
                    "repeats": i.repeats,
                }
                for i in self.interviews
            ],
            "ablations": {
                "no_option_action": self.ablations.no_option_action,
                "no_self_monitor": self.ablations.no_self_monitor,
                "flat_memory": self.ablations.flat_memory,
            },
        }


def _require(data: dict, key: str, kind, where: str):
    if key not in data:
        raise ScenarioError(f"{where}: missing field {key!r}")
    value = data[key]
    if kind is float:
        if not isinstance(value, (int, float)):
            raise ScenarioError(f"{where}: field {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise ScenarioError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def parse_scenario(data: dict, where: str = "scenario") -> ScenarioConfig:
    if data.get("format") != FORMAT:
        raise ScenarioError(f"{where}: format must be {FORMAT!r}")
    name = _require(data, "name", str, where)
    map_ref = _require(data, "map", str, where)
    duration = _require(data, "duration_ticks", int, where)
    if duration < 0:
        raise ScenarioError(f"{where}: duration_ticks must be >= 0")

    agents = []
    seen_names = set()
    for idx, a in enumerate(_require(data, "agents", list, where)):
        loc = f"{where}.agents[{idx}]"
        agent = AgentSpec(
            name=_require(a, "name", str, loc),
            persona=_require(a, "persona", str, loc),
            goal=_require(a, "goal", str, loc),
            recent_memories=tuple(a.get("recent_memories", [])),
            long_term_memories=tuple(a.get("long_term_memories", [])),
            spawn=_require(a, "spawn", str, loc),
        )
        if agent.name in seen_names:
            raise ScenarioError(f"{loc}: duplicate agent name {agent.name!r}")
        seen_names.add(agent.name)
        agents.append(agent)
    if not agents:
        raise ScenarioError(f"{where}: agents must be non-empty")

    key_facts = []
    for idx, f in enumerate(data.get("key_facts", [])):
        loc = f"{where}.key_facts[{idx}]"
        fact = KeyFact(
            fact_id=_require(f, "id", str, loc),
            text=_require(f, "text", str, loc),
            keywords=tuple(f.get("keywords", [])),
        )
        if not fact.keywords:
            raise ScenarioError(f"{loc}: key fact needs at least one detector keyword")
        key_facts.append(fact)

    interviews = []
    for idx, i in enumerate(data.get("interviews", [])):
        loc = f"{where}.interviews[{idx}]"
        spec = InterviewSpec(
            agent=_require(i, "agent", str, loc),
            questions=tuple(_require(i, "questions", list, loc)),
            categories=tuple(
                Category(c["name"], tuple(c.get("keywords", [])))
                for c in i.get("categories", [])
            ),
            repeats=int(i.get("repeats", 3)),
        )
        if spec.agent not in seen_names:
            raise ScenarioError(f"{loc}: interview agent {spec.agent!r} does not exist")
        if not spec.questions:
            raise ScenarioError(f"{loc}: interview needs at least one question")
        interviews.append(spec)

    ab = data.get("ablations", {})
    ablations = AblationFlags(
        no_option_action=bool(ab.get("no_option_action", False)),
        no_self_monitor=bool(ab.get("no_self_monitor", False)),
        flat_memory=bool(ab.get("flat_memory", False)),
    )

    return ScenarioConfig(
        name=name,
        map=map_ref,
        duration_ticks=duration,
        agents=agents,
        key_facts=key_facts,
        interviews=interviews,
        ablations=ablations,
        params=dict(data.get("params", {})),
    )


def load_scenario(path: Path | str) -> ScenarioConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            raise ScenarioError(f"{path}: invalid JSON: {err}") from err
    return parse_scenario(data, where=str(path))


def builtin_scenario_path(name: str) -> Path:
    """Path of a scenario shipped in the package data directory."""
    return Path(str(resources.files("lyfe") / "data" / "scenarios" / f"{name}.json"))


def resolve_map_path(ref: str) -> Path:
    """A map reference is either a packaged map name or a file path."""
    candidate = Path(ref)
    if candidate.exists():
        return candidate
    packaged = Path(str(resources.files("lyfe") / "data" / "maps" / f"{ref}.map"))
    if packaged.exists():
        return packaged
    raise ScenarioError(f"map {ref!r} not found (no file and no packaged map)")


def resolve_scenario_path(ref: str) -> Path:
    candidate = Path(ref)
    if candidate.exists():
        return candidate
    packaged = builtin_scenario_path(ref)
    if packaged.exists():
        return packaged
    raise ScenarioError(f"scenario {ref!r} not found (no file and no packaged scenario)")
