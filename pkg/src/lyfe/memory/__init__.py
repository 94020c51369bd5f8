from .bank import MemoryBank
from .cluster import UnionFind, cluster_by_similarity
from .dump import read_memdump, restore_hierarchy, write_memdump
from .hierarchy import (
    ConsolidationResult,
    HierarchyConfig,
    MemoryHierarchy,
    split_sentences,
)
from .items import SOURCES, ItemIds, MemoryItem

__all__ = [
    "ConsolidationResult",
    "HierarchyConfig",
    "ItemIds",
    "MemoryBank",
    "MemoryHierarchy",
    "MemoryItem",
    "SOURCES",
    "UnionFind",
    "cluster_by_similarity",
    "read_memdump",
    "restore_hierarchy",
    "split_sentences",
    "write_memdump",
]
