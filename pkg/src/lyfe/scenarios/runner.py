"""Scenario execution: seed personas, drive the world, write the run
directory every metric is computed from.

Run directory layout::

    config/scenario.json   canonical config copy
    config/manifest.json   seed, scenario name, rule-miss count
    logs/<agent>.log       per-agent event log (line-delimited JSON)
    world.log              deliveries, arrivals, spawns
    usage.jsonl            the complete usage ledger
    memdump/<agent>.jsonl  memdump v1 per agent
    interviews.jsonl       post-run interview answers

Deterministic mode plus scripted providers makes every file byte-identical
for a given seed.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..agent.brain import AgentBrain, BrainConfig
from ..embedding.providers import EmbeddingProvider
from ..lang import LanguageProvider, ProviderExhaustedError, UsageLedger, UsageRecord
from ..memory import restore_hierarchy, write_memdump
from ..world import BrainActor, World, WorldMap, run_deterministic
from .config import AblationFlags, ScenarioConfig, resolve_map_path
from .interview import InterviewResult, interview

_SAFE_RE = re.compile(r"[^A-Za-z0-9_.-]+")

_BRAIN_PARAM_KEYS = (
    "workmem_capacity", "recent_capacity", "theta", "link_threshold",
    "novelty_window", "obs_buffer_size", "talk_budget", "reflect_budget",
    "move_budget", "repetition_window", "repetition_threshold",
    "controller_k_long", "controller_k_recent", "talk_k_long",
    "interview_k_long", "interview_k_recent", "group_window",
    "prompt_observations",
)


def safe_name(name: str) -> str:
    return _SAFE_RE.sub("_", name)


@dataclass
class ProviderSet:
    embedding: EmbeddingProvider
    lm: LanguageProvider

    @property
    def ledger(self) -> UsageLedger:
        return self.lm.ledger


def brain_config_for(
    config: ScenarioConfig, ablations: Optional[AblationFlags] = None
) -> BrainConfig:
    flags = ablations if ablations is not None else config.ablations
    kwargs = {k: v for k, v in config.params.items() if k in _BRAIN_PARAM_KEYS}
    return BrainConfig(
        ablate_option_action=flags.no_option_action,
        ablate_self_monitor=flags.no_self_monitor,
        flat_memory=flags.flat_memory,
        **kwargs,
    )


def apply_ablation(flags: AblationFlags, brains: list[AgentBrain]) -> list[AgentBrain]:
    """Flip ablation switches on existing brains.

    no_option_action and no_self_monitor are pure behavior flags; flat
    memory collapses the hierarchy into one bank with no forgetting and no
    summarization, preserving whatever is already stored.
    """
    for brain in brains:
        brain.config.ablate_option_action = flags.no_option_action
        brain.config.ablate_self_monitor = flags.no_self_monitor
        if flags.flat_memory and not brain.config.flat_memory:
            brain.config.flat_memory = True
            old = brain.memory
            merged = (
                old.workmem.snapshot() + old.recentmem.snapshot() + old.longmem.snapshot()
            )
            from ..memory import MemoryHierarchy  # local import avoids cycle at module load

            rebuilt = MemoryHierarchy(
                old.provider, owner=old.owner, config=brain.config.hierarchy_config()
            )
            rebuilt.longmem.items = merged
            rebuilt.ids._next = old.ids._next
            brain.memory = rebuilt
    return brains


class _JsonlWriter:
    def __init__(self, path: Path):
        self._fh = open(path, "w", encoding="utf-8")

    def __call__(self, tick: int, kind: str, data: dict) -> None:
        self._fh.write(
            json.dumps({"tick": tick, "kind": kind, "data": data}, sort_keys=True) + "\n"
        )

    def close(self) -> None:
        self._fh.close()


def run(
    config: ScenarioConfig,
    providers: ProviderSet,
    seed: int,
    out_dir: Path | str,
    ablations: Optional[AblationFlags] = None,
    extra_actors: Optional[dict] = None,
) -> "RunLog":
    """Execute a scenario deterministically and write the run directory."""
    out = Path(out_dir)
    (out / "config").mkdir(parents=True, exist_ok=True)
    (out / "logs").mkdir(exist_ok=True)
    (out / "memdump").mkdir(exist_ok=True)

    flags = ablations if ablations is not None else config.ablations
    world_map = WorldMap.from_file(resolve_map_path(config.map))
    world_writer = _JsonlWriter(out / "world.log")
    world = World(world_map, mode="deterministic", log=world_writer)

    rng = random.Random(seed)
    writers: list[_JsonlWriter] = [world_writer]
    brains: dict[str, AgentBrain] = {}
    actors: dict = {}
    for spec in config.agents:
        loc = world_map.locations.get(spec.spawn)
        if loc is None:
            raise ValueError(f"agent {spec.name!r}: spawn {spec.spawn!r} not on map")
        # seeded jitter keeps distinct seeds geometrically distinct
        x = loc.x + rng.uniform(-0.5, 0.5)
        y = loc.y + rng.uniform(-0.5, 0.5)
        world.add_body(spec.name, x, y)
        writer = _JsonlWriter(out / "logs" / f"{safe_name(spec.name)}.log")
        writers.append(writer)
        brain = AgentBrain(
            agent_id=spec.name,
            persona=spec.persona,
            goal=spec.goal,
            embedding=providers.embedding,
            config=brain_config_for(config, flags),
            log_event=writer,
        )
        brain.memory.seed(list(spec.recent_memories), list(spec.long_term_memories))
        brains[spec.name] = brain
        actors[spec.name] = BrainActor(brain, providers.lm)

    if extra_actors:
        actors.update(extra_actors)

    aborted = False
    try:
        run_deterministic(world, actors, config.duration_ticks)

        # final consolidation flush, then dump memories
        for name, brain in brains.items():
            result = brain.memory.consolidate(
                providers.lm, tick=config.duration_ticks, force=True
            )
            if result.moved:
                brain.log_event(
                    config.duration_ticks,
                    "consolidation",
                    {
                        "moved": result.moved,
                        "clusters": result.clusters,
                        "llm_calls": result.llm_calls,
                        "evicted": [it.id for it in result.evicted],
                    },
                )
            write_memdump(brain.memory, out / "memdump" / f"{safe_name(name)}.jsonl")

        # post-run interviews, replayed from the dumps
        with open(out / "interviews.jsonl", "w", encoding="utf-8") as fh:
            for spec in config.interviews:
                result = run_interview_from_dump(
                    out, config, spec.agent, providers, flags,
                    questions=list(spec.questions), repeats=spec.repeats,
                )
                for repeat, repeat_answers in enumerate(result.answers):
                    for question, answer in zip(result.questions, repeat_answers):
                        fh.write(
                            json.dumps(
                                {
                                    "agent": spec.agent,
                                    "repeat": repeat,
                                    "question": question,
                                    "answer": answer,
                                    "reflection_memories": result.reflection_counts[repeat],
                                },
                                sort_keys=True,
                            )
                            + "\n"
                        )
    except ProviderExhaustedError:
        # fatal provider failure: keep whatever was logged so far
        aborted = True
        raise
    finally:
        providers.ledger.write_jsonl(out / "usage.jsonl")
        for writer in writers:
            writer.close()
        _write_config_dir(out, config, seed, flags, providers, aborted)
    return RunLog(out)


def _write_config_dir(out, config, seed, flags, providers, aborted):
    with open(out / "config" / "scenario.json", "w", encoding="utf-8") as fh:
        json.dump(config.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    rule_misses = getattr(providers.lm, "rule_misses", None)
    with open(out / "config" / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "scenario": config.name,
                "seed": seed,
                "duration_ticks": config.duration_ticks,
                "agents": [a.name for a in config.agents],
                "ablations": {
                    "no_option_action": flags.no_option_action,
                    "no_self_monitor": flags.no_self_monitor,
                    "flat_memory": flags.flat_memory,
                },
                "aborted": aborted,
                "rule_misses": rule_misses,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")


def run_interview_from_dump(
    run_dir: Path,
    config: ScenarioConfig,
    agent_name: str,
    providers: ProviderSet,
    flags: Optional[AblationFlags] = None,
    questions: Optional[list[str]] = None,
    repeats: int = 3,
    reflection_k: int = 15,
) -> InterviewResult:
    """Rebuild a brain from its memdump and run the interview protocol."""
    spec = config.agent(agent_name)
    flags = flags if flags is not None else config.ablations
    brain_config = brain_config_for(config, flags)
    hierarchy = restore_hierarchy(
        Path(run_dir) / "memdump" / f"{safe_name(agent_name)}.jsonl",
        providers.embedding,
        owner=agent_name,
        config=brain_config.hierarchy_config(),
    )
    brain = AgentBrain(
        agent_id=agent_name,
        persona=spec.persona,
        goal=spec.goal,
        embedding=providers.embedding,
        config=brain_config,
        hierarchy=hierarchy,
    )
    if questions is None:
        for ispec in config.interviews:
            if ispec.agent == agent_name:
                questions = list(ispec.questions)
                repeats = ispec.repeats
                break
    if not questions:
        raise ValueError(f"no interview questions for {agent_name!r}")
    return interview(
        brain, questions, providers.lm, repeats=repeats, reflection_k=reflection_k
    )


class RunLog:
    """Read-side view over a finished run directory."""

    def __init__(self, run_dir: Path | str):
        self.run_dir = Path(run_dir)

    def manifest(self) -> dict:
        with open(self.run_dir / "config" / "manifest.json", encoding="utf-8") as fh:
            return json.load(fh)

    def scenario(self) -> dict:
        with open(self.run_dir / "config" / "scenario.json", encoding="utf-8") as fh:
            return json.load(fh)

    def agent_names(self) -> list[str]:
        return self.manifest()["agents"]

    @staticmethod
    def _read_jsonl(path: Path) -> list[dict]:
        records = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return records

    def agent_events(self, name: str) -> list[dict]:
        return self._read_jsonl(self.run_dir / "logs" / f"{safe_name(name)}.log")

    def world_events(self) -> list[dict]:
        return self._read_jsonl(self.run_dir / "world.log")

    def usage_records(self) -> list[UsageRecord]:
        return UsageLedger.read_jsonl(self.run_dir / "usage.jsonl")

    def interviews(self) -> list[dict]:
        path = self.run_dir / "interviews.jsonl"
        return self._read_jsonl(path) if path.exists() else []

    def memdump_path(self, name: str) -> Path:
        return self.run_dir / "memdump" / f"{safe_name(name)}.jsonl"

    def memdump_items(self, name: str) -> list[dict]:
        records = []
        with open(self.memdump_path(name), encoding="utf-8") as fh:
            header = fh.readline()
            assert json.loads(header).get("format") == "memdump v1"
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return records

    def run_hash(self) -> str:
        """sha256 over every log artifact, in stable relative-path order."""
        digest = hashlib.sha256()
        files = sorted(
            p for p in self.run_dir.rglob("*")
            if p.is_file() and p.suffix in (".log", ".jsonl", ".json")
        )
        for path in files:
            digest.update(str(path.relative_to(self.run_dir)).encode("utf-8"))
            digest.update(b"\0")
            digest.update(path.read_bytes())
            digest.update(b"\0")
        return digest.hexdigest()
