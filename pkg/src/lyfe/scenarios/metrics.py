"""Quantitative metrics computed from immutable run logs.

Key-fact detection is keyword-based (declared in the scenario), never
embedding-based, so the metrics stay independent of the system they
measure. A text matches a fact iff every detector keyword appears,
case-insensitively.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..lang import UsageRecord
from .config import KeyFact, parse_scenario
from .runner import RunLog


def text_matches(text: str, keywords: Sequence[str]) -> bool:
    low = text.lower()
    return all(k.lower() in low for k in keywords)


@dataclass(frozen=True)
class DiffusionStatus:
    received: bool
    stored: bool
    retrieved: bool

    def as_tuple(self) -> tuple[int, int, int]:
        return (int(self.received), int(self.stored), int(self.retrieved))


@dataclass
class DiffusionReport:
    fact_id: str
    sources: list[str]
    per_agent: dict[str, DiffusionStatus]
    received_p: float
    stored_p: float
    retrieved_p: float


def fact_sources(scenario: dict, fact: KeyFact) -> list[str]:
    """Agents seeded with the fact (its keywords appear in their backstory)."""
    sources = []
    for agent in scenario["agents"]:
        seeded = list(agent.get("recent_memories", [])) + list(
            agent.get("long_term_memories", [])
        )
        if any(text_matches(text, fact.keywords) for text in seeded):
            sources.append(agent["name"])
    return sources


def diffusion_metrics(runlog: RunLog, fact_id: str) -> DiffusionReport:
    """Per non-source agent: did the fact get received, stored, retrieved.

    received: keywords appear in an observation delivered to the agent
    stored:   keywords appear in any memdump item
    retrieved: keywords appear in any post-run interview answer
    """
    scenario = parse_scenario(runlog.scenario())
    fact = scenario.key_fact(fact_id)
    sources = fact_sources(runlog.scenario(), fact)

    deliveries = [
        ev for ev in runlog.world_events() if ev["kind"] == "deliver"
    ]
    interviews = runlog.interviews()

    per_agent: dict[str, DiffusionStatus] = {}
    for spec in scenario.agents:
        name = spec.name
        if name in sources:
            continue
        received = any(
            name in ev["data"]["recipients"] and text_matches(ev["data"]["text"], fact.keywords)
            for ev in deliveries
        )
        stored = any(
            text_matches(rec["text"], fact.keywords)
            for rec in runlog.memdump_items(name)
        )
        retrieved = any(
            rec["agent"] == name
            and rec["answer"]
            and text_matches(rec["answer"], fact.keywords)
            for rec in interviews
        )
        per_agent[name] = DiffusionStatus(received, stored, retrieved)

    n = len(per_agent)
    return DiffusionReport(
        fact_id=fact_id,
        sources=sources,
        per_agent=per_agent,
        received_p=sum(s.received for s in per_agent.values()) / n if n else 0.0,
        stored_p=sum(s.stored for s in per_agent.values()) / n if n else 0.0,
        retrieved_p=sum(s.retrieved for s in per_agent.values()) / n if n else 0.0,
    )


def consecutive_talk_durations(events: Iterable[dict]) -> list[int]:
    """Lengths (in ticks) of maximal runs of consecutive-tick utterances.

    Works for both full and per-step-controller agents because a TALK step
    emits exactly one utterance per tick.
    """
    ticks = sorted({ev["tick"] for ev in events if ev["kind"] == "utterance"})
    if not ticks:
        return []
    runs = []
    run_start = prev = ticks[0]
    for tick in ticks[1:]:
        if tick == prev + 1:
            prev = tick
            continue
        runs.append(prev - run_start + 1)
        run_start = prev = tick
    runs.append(prev - run_start + 1)
    return runs


def option_enter_counts(events: Iterable[dict]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for ev in events:
        if ev["kind"] == "option_enter":
            kind = ev["data"]["option"]
            counts[kind] = counts.get(kind, 0) + 1
    return counts


def call_site_counts(
    records: Iterable[UsageRecord], agent_id: str | None = None
) -> dict[str, int]:
    counts: dict[str, int] = {}
    for rec in records:
        if agent_id is not None and rec.agent_id != agent_id:
            continue
        counts[rec.call_site] = counts.get(rec.call_site, 0) + 1
    return counts


def success_table(
    runlogs: Sequence[RunLog], target: str, question_index: int = 0
) -> dict[str, tuple[float, float]]:
    """Per-agent success rate aggregated over runs: (mean, population sd).

    Each run contributes one rate per interviewed agent (the fraction of
    repeats whose classified answer equals ``target``).
    """
    from statistics import mean, pstdev

    from .interview import success_rate

    per_agent: dict[str, list[float]] = {}
    for runlog in runlogs:
        scenario = parse_scenario(runlog.scenario())
        interviews = runlog.interviews()
        for spec in scenario.interviews:
            if question_index >= len(spec.questions) or not spec.categories:
                continue
            question = spec.questions[question_index]
            answers = [
                rec["answer"]
                for rec in interviews
                if rec["agent"] == spec.agent and rec["question"] == question
            ]
            if not answers:
                continue
            rate = success_rate(answers, target, spec.categories)
            per_agent.setdefault(spec.agent, []).append(rate)
    return {
        agent: (mean(rates), pstdev(rates) if len(rates) > 1 else 0.0)
        for agent, rates in per_agent.items()
    }
