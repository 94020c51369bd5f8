"""Memory items: string-embedding pairs with provenance."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

SOURCES = ("seeded", "summary", "reflection", "consolidated", "observation")


@dataclass(frozen=True)
class MemoryItem:
    id: str
    text: str
    embedding: np.ndarray = field(repr=False, compare=False)
    created_tick: int = 0
    source: str = "observation"

    def __post_init__(self):
        if not self.text:
            raise ValueError("memory item text must be non-empty")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")


class ItemIds:
    """Deterministic per-owner id sequence (``<prefix>-000042``)."""

    def __init__(self, prefix: str):
        self.prefix = prefix
        self._next = 0
        self._lock = threading.Lock()

    def next(self) -> str:
        with self._lock:
            n = self._next
            self._next += 1
        return f"{self.prefix}-{n:06d}"
