"""Memory bank: ordered item storage with threshold forgetting and retrieval.

Forgetting evicts *older* items that closely resemble an incoming one
(similarity strictly above the bank's threshold); the new item always
survives. Rare, semantically unique memories therefore keep their place
because new arrivals are unlikely to resemble them.

The bank mirrors item embeddings into a preallocated float64 matrix so the
per-insertion similarity scan is a single kernel call with no per-call
stacking; the acceptance stress (50k insertions with exhaustive scans)
runs through this path.
"""

from __future__ import annotations

import threading
from typing import Optional

import numpy as np

from ..embedding import cosine_to_many
from ..embedding.providers import DimensionMismatchError, EmbeddingProvider
from .items import MemoryItem


class MemoryBank:
    def __init__(
        self,
        provider: EmbeddingProvider,
        name: str = "bank",
        theta: float = 0.9,
        capacity: Optional[int] = None,
        forgetting: bool = True,
    ):
        if not (0.0 < theta < 1.0):
            raise ValueError("forget threshold must be in (0, 1)")
        if capacity is not None and capacity <= 0:
            raise ValueError("capacity must be positive or None")
        self.provider = provider
        self.name = name
        self.theta = theta
        self.capacity = capacity
        self.forgetting = forgetting
        self._items: list[MemoryItem] = []
        self._matrix = np.empty((0, provider.dimension), dtype=np.float64)
        self._lock = threading.RLock()

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)

    @property
    def items(self) -> list[MemoryItem]:
        return self._items

    @items.setter
    def items(self, new_items: list[MemoryItem]) -> None:
        self.replace_items(new_items)

    def replace_items(self, new_items: list[MemoryItem]) -> None:
        """Swap the whole contents (restore/clone paths)."""
        with self._lock:
            self._items = list(new_items)
            if self._items:
                self._matrix = np.stack([it.embedding for it in self._items])
            else:
                self._matrix = np.empty((0, self.provider.dimension), dtype=np.float64)

    def snapshot(self) -> list[MemoryItem]:
        """Consistent copy of the current contents, oldest first."""
        with self._lock:
            return list(self._items)

    def clear(self) -> list[MemoryItem]:
        with self._lock:
            dropped = self._items
            self._items = []
            self._matrix = np.empty((0, self.provider.dimension), dtype=np.float64)
            return dropped

    def _rows(self) -> np.ndarray:
        return self._matrix[: len(self._items)]

    def _append_row(self, vec: np.ndarray) -> None:
        rows = len(self._items)
        if rows >= self._matrix.shape[0]:
            grown = np.empty(
                (max(16, self._matrix.shape[0] * 2), self.provider.dimension),
                dtype=np.float64,
            )
            grown[:rows] = self._matrix[:rows]
            self._matrix = grown
        self._matrix[rows] = vec

    def add_with_forgetting(
        self, item: MemoryItem, enabled: Optional[bool] = None
    ) -> list[MemoryItem]:
        """Store ``item``; return every item evicted by the insertion.

        Pre-existing items with similarity to ``item`` strictly above theta
        are removed first; capacity is then enforced by evicting oldest.
        ``enabled`` overrides the bank's forgetting flag (seeding passes
        False so backstories load losslessly).
        """
        if item.embedding.shape[0] != self.provider.dimension:
            raise DimensionMismatchError(
                f"item dimension {item.embedding.shape[0]} != "
                f"bank dimension {self.provider.dimension}"
            )
        forget = self.forgetting if enabled is None else enabled
        evicted: list[MemoryItem] = []
        with self._lock:
            if forget and self._items:
                sims = cosine_to_many(self._rows(), item.embedding)
                over = sims > self.theta
                if over.any():
                    keep_idx = np.nonzero(~over)[0]
                    evicted = [self._items[i] for i in np.nonzero(over)[0]]
                    self._matrix[: len(keep_idx)] = self._matrix[keep_idx]
                    self._items = [self._items[i] for i in keep_idx]
            self._append_row(item.embedding)
            self._items.append(item)
            if self.capacity is not None:
                while len(self._items) > self.capacity:
                    evicted.append(self._items.pop(0))
                    rows = len(self._items)
                    self._matrix[:rows] = self._matrix[1 : rows + 1]
        return evicted

    def retrieve(self, query: str, k: int) -> list[MemoryItem]:
        """Top-``k`` items by similarity to the query, ties to the newer item."""
        if k < 1:
            raise ValueError("k must be >= 1")
        vec = self.provider.embed(query)  # raises on empty query
        with self._lock:
            if not self._items:
                return []
            sims = cosine_to_many(self._rows(), vec)
            order = sorted(range(len(self._items)), key=lambda i: (-sims[i], -i))
            return [self._items[i] for i in order[:k]]
