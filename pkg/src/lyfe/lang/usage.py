"""Token/cost accounting: the append-only usage ledger and dollar reports."""

from __future__ import annotations

import json
import logging
import threading
from collections import defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

log = logging.getLogger(__name__)

CALL_SITES = ("controller", "talk", "reflect", "summary", "consolidate", "interview")


@dataclass(frozen=True)
class UsageRecord:
    prompt_tokens: int
    completion_tokens: int
    wall_ms: float
    agent_id: str
    call_site: str

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be >= 0")
        if self.call_site not in CALL_SITES:
            raise ValueError(f"unknown call site {self.call_site!r}")


class UsageLedger:
    """Append-only, thread-safe record of every language-model call."""

    def __init__(self):
        self._records: list[UsageRecord] = []
        self._lock = threading.Lock()

    def append(self, record: UsageRecord) -> None:
        with self._lock:
            self._records.append(record)

    def records(self) -> list[UsageRecord]:
        with self._lock:
            return list(self._records)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def counts_by_site(self) -> dict[str, int]:
        counts: dict[str, int] = defaultdict(int)
        for rec in self.records():
            counts[rec.call_site] += 1
        return dict(counts)

    def counts_by_agent_site(self) -> dict[tuple[str, str], int]:
        counts: dict[tuple[str, str], int] = defaultdict(int)
        for rec in self.records():
            counts[(rec.agent_id, rec.call_site)] += 1
        return dict(counts)

    def write_jsonl(self, path: Path | str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records():
                fh.write(json.dumps(asdict(rec), sort_keys=True) + "\n")

    @staticmethod
    def read_jsonl(path: Path | str) -> list[UsageRecord]:
        records = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(UsageRecord(**json.loads(line)))
        return records


@dataclass(frozen=True)
class CostModel:
    price_per_1k_prompt_tokens: float
    price_per_1k_completion_tokens: float

    def __post_init__(self):
        if self.price_per_1k_prompt_tokens < 0 or self.price_per_1k_completion_tokens < 0:
            raise ValueError("prices must be >= 0")

    def record_cost(self, rec: UsageRecord) -> float:
        return (
            rec.prompt_tokens / 1000.0 * self.price_per_1k_prompt_tokens
            + rec.completion_tokens / 1000.0 * self.price_per_1k_completion_tokens
        )


@dataclass(frozen=True)
class CostReport:
    total_dollars: float
    per_agent_per_hour: float
    by_call_site: dict[str, float]
    n_agents: int
    hours: float
    empty: bool

    def scaled_per_agent_per_hour(self, speedup: float) -> float:
        """Cost per agent per wall hour when the clock runs ``speedup`` x."""
        return self.per_agent_per_hour * speedup


def cost_report(
    records: Iterable[UsageRecord] | UsageLedger,
    model: CostModel,
    human_hours: float,
    n_agents: int,
) -> CostReport:
    """Dollars per agent per hour, plus the per-call-site breakdown.

    ``human_hours`` is whatever hour denomination the caller measures in
    (game hours and wall hours both work; they differ by the game-speed
    factor, see ``CostReport.scaled_per_agent_per_hour``).
    """
    if human_hours <= 0:
        raise ValueError("human_hours must be > 0")
    if n_agents < 1:
        raise ValueError("n_agents must be >= 1")
    if isinstance(records, UsageLedger):
        records = records.records()
    else:
        records = list(records)
    by_site: dict[str, float] = {}
    total = 0.0
    for rec in records:
        dollars = model.record_cost(rec)
        by_site[rec.call_site] = by_site.get(rec.call_site, 0.0) + dollars
        total += dollars
    empty = not records
    if empty:
        log.warning("cost_report over an empty ledger: reporting 0")
    return CostReport(
        total_dollars=total,
        per_agent_per_hour=total / n_agents / human_hours,
        by_call_site=by_site,
        n_agents=n_agents,
        hours=human_hours,
        empty=empty,
    )
