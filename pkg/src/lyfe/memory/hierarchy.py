"""Three-tier memory: workmem -> recentmem -> longmem.

workmem is a small ring of immediate items feeding the self-monitor.
recentmem buffers summary sentences and reflections with threshold
forgetting. When recentmem fills, consolidation clusters its contents by
similarity, folds each non-singleton cluster into one higher-level item
via the language provider, and inserts the results into longmem through
the forgetting filter again.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..embedding.providers import EmbeddingProvider
from ..lang import LanguageError, LanguageProvider, Prompt
from .bank import MemoryBank
from .cluster import cluster_by_similarity
from .items import ItemIds, MemoryItem

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str, min_tokens: int = 3) -> list[str]:
    """Split on sentence-terminal punctuation, dropping tiny fragments."""
    parts = [p.strip() for p in _SENTENCE_SPLIT.split(text)]
    return [p for p in parts if len(p.split()) >= min_tokens]


@dataclass
class HierarchyConfig:
    workmem_capacity: int = 5
    recent_capacity: int = 20
    theta: float = 0.9
    recent_theta: Optional[float] = None  # defaults to theta
    long_theta: Optional[float] = None
    link_threshold: float = 0.80
    flat: bool = False  # ablation: one bank, no forgetting, no summarization

    def __post_init__(self):
        if not 4 <= self.workmem_capacity <= 5:
            raise ValueError("workmem capacity must be 4 or 5")


@dataclass
class ConsolidationResult:
    moved: int
    clusters: int
    llm_calls: int
    evicted: list[MemoryItem] = field(default_factory=list)


class MemoryHierarchy:
    def __init__(
        self,
        provider: EmbeddingProvider,
        owner: str = "agent",
        config: Optional[HierarchyConfig] = None,
    ):
        self.provider = provider
        self.owner = owner
        self.config = config or HierarchyConfig()
        self.ids = ItemIds(owner)
        cfg = self.config
        if cfg.flat:
            flat = MemoryBank(provider, name="flat", theta=cfg.theta, forgetting=False)
            self.workmem = self.recentmem = self.longmem = flat
        else:
            self.workmem = MemoryBank(
                provider, name="workmem", theta=cfg.theta,
                capacity=cfg.workmem_capacity, forgetting=False,
            )
            self.recentmem = MemoryBank(
                provider, name="recentmem",
                theta=cfg.recent_theta if cfg.recent_theta is not None else cfg.theta,
                forgetting=True,
            )
            self.longmem = MemoryBank(
                provider, name="longmem",
                theta=cfg.long_theta if cfg.long_theta is not None else cfg.theta,
                forgetting=True,
            )

    def banks(self) -> dict[str, MemoryBank]:
        if self.config.flat:
            return {"flat": self.longmem}
        return {"workmem": self.workmem, "recentmem": self.recentmem, "longmem": self.longmem}

    def new_item(self, text: str, source: str, tick: int) -> MemoryItem:
        return MemoryItem(
            id=self.ids.next(),
            text=text,
            embedding=self.provider.embed(text),
            created_tick=tick,
            source=source,
        )

    def seed(self, recent_texts: list[str], long_texts: list[str]) -> None:
        """Load backstory items losslessly (forgetting disabled)."""
        for text in recent_texts:
            self.recentmem.add_with_forgetting(self.new_item(text, "seeded", 0), enabled=False)
        for text in long_texts:
            self.longmem.add_with_forgetting(self.new_item(text, "seeded", 0), enabled=False)

    def recent_is_full(self) -> bool:
        if self.config.flat:
            return False
        return len(self.recentmem) >= self.config.recent_capacity

    def summarize_cluster(
        self, cluster: list[MemoryItem], lm: LanguageProvider, tick: int
    ) -> tuple[list[MemoryItem], int]:
        """Fold one cluster into a consolidated item.

        Singletons pass through unchanged with no provider call; on provider
        failure the cluster moves as-is (fail-open). Returns (items, calls).
        """
        if not cluster:
            raise ValueError("cluster must be non-empty")
        if len(cluster) == 1:
            return [cluster[0]], 0
        joined = "\n".join(f"- {it.text}" for it in cluster)
        try:
            completion = lm.complete(
                Prompt("consolidate", {"memories": joined}),
                call_site="consolidate",
                agent_id=self.owner,
            )
        except LanguageError:
            return list(cluster), 1
        text = completion.text.strip()
        if not text:
            return list(cluster), 1
        return [self.new_item(text, "consolidated", tick)], 1

    def consolidate(
        self,
        lm: LanguageProvider,
        tick: int = 0,
        force: bool = False,
        on_eviction: Optional[Callable[[MemoryItem], None]] = None,
    ) -> ConsolidationResult:
        """Move recentmem into longmem via cluster-then-summarize.

        No-op unless recentmem is at capacity (or ``force``). Every source
        item either lands in longmem verbatim, is represented by exactly one
        cluster summary, or is evicted by the forgetting step (reported).
        """
        if self.config.flat:
            return ConsolidationResult(0, 0, 0)
        if not force and not self.recent_is_full():
            return ConsolidationResult(0, 0, 0)
        items = self.recentmem.clear()
        if not items:
            return ConsolidationResult(0, 0, 0)
        clusters = cluster_by_similarity(items, self.config.link_threshold)
        moved = 0
        calls = 0
        evicted: list[MemoryItem] = []
        for cluster in clusters:
            outputs, ncalls = self.summarize_cluster(cluster, lm, tick)
            calls += ncalls
            for item in outputs:
                dropped = self.longmem.add_with_forgetting(item)
                evicted.extend(dropped)
                if on_eviction:
                    for d in dropped:
                        on_eviction(d)
                moved += 1
        return ConsolidationResult(moved, len(clusters), calls, evicted)

    def clone(self) -> "MemoryHierarchy":
        """Independent copy sharing immutable items (for interview repeats)."""
        twin = MemoryHierarchy(self.provider, owner=self.owner, config=self.config)
        twin.ids._next = self.ids._next
        if self.config.flat:
            twin.longmem.items = self.longmem.snapshot()
        else:
            twin.workmem.items = self.workmem.snapshot()
            twin.recentmem.items = self.recentmem.snapshot()
            twin.longmem.items = self.longmem.snapshot()
        return twin
