"""Single-linkage similarity clustering over memory items.

Exact O(n^2) pairwise construction: banks hold tens of items, so
exactness beats speed and the result can be checked against a
connected-components oracle.
"""

from __future__ import annotations

import numpy as np

from ..embedding import pairwise_cosine
from .items import MemoryItem


class UnionFind:
    """Disjoint sets with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def cluster_by_similarity(
    items: list[MemoryItem], link_threshold: float
) -> list[list[MemoryItem]]:
    """Partition items into single-linkage clusters.

    Any two items with similarity strictly above ``link_threshold`` land in
    the same cluster (transitive closure). Clusters are ordered by their
    first member's input position; members keep input order, so the result
    is deterministic for a given input order.
    """
    if not items:
        raise ValueError("cluster_by_similarity requires a non-empty item list")
    n = len(items)
    if n == 1:
        return [[items[0]]]
    sims = pairwise_cosine(np.stack([it.embedding for it in items]))
    uf = UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if sims[i, j] > link_threshold:
                uf.union(i, j)
    groups: dict[int, list[MemoryItem]] = {}
    order: list[int] = []
    for idx, item in enumerate(items):
        root = uf.find(idx)
        if root not in groups:
            groups[root] = []
            order.append(root)
        groups[root].append(item)
    return [groups[root] for root in order]
