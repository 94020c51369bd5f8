"""memdump v1: line-delimited memory snapshots for inspection and replay.

One JSON object per line with fields ``bank``, ``id``, ``source``,
``created_tick``, ``text``, and ``embedding_b64`` (base64 of the
little-endian float64 vector). Reading restores items without
re-embedding, so post-run interviews replay exactly what was stored.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .hierarchy import MemoryHierarchy
from .items import MemoryItem

FORMAT = "memdump v1"


def encode_embedding(vec: np.ndarray) -> str:
    return base64.b64encode(np.asarray(vec, dtype="<f8").tobytes()).decode("ascii")


def decode_embedding(blob: str) -> np.ndarray:
    vec = np.frombuffer(base64.b64decode(blob), dtype="<f8").astype(np.float64)
    vec.setflags(write=False)
    return vec


def write_memdump(hierarchy: MemoryHierarchy, path: Path | str) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"format": FORMAT, "owner": hierarchy.owner}) + "\n")
        for bank_name, bank in hierarchy.banks().items():
            for item in bank.snapshot():
                fh.write(
                    json.dumps(
                        {
                            "bank": bank_name,
                            "id": item.id,
                            "source": item.source,
                            "created_tick": item.created_tick,
                            "text": item.text,
                            "embedding_b64": encode_embedding(item.embedding),
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
                count += 1
    return count


def read_memdump(path: Path | str) -> dict[str, list[MemoryItem]]:
    banks: dict[str, list[MemoryItem]] = {}
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != FORMAT:
            raise ValueError(f"not a {FORMAT} file: {path}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            item = MemoryItem(
                id=rec["id"],
                text=rec["text"],
                embedding=decode_embedding(rec["embedding_b64"]),
                created_tick=rec["created_tick"],
                source=rec["source"],
            )
            banks.setdefault(rec["bank"], []).append(item)
    return banks


def restore_hierarchy(
    path: Path | str, provider, owner: str = "agent", config=None
) -> MemoryHierarchy:
    """Rebuild a hierarchy from a dump (stored embeddings, no re-embed)."""
    banks = read_memdump(path)
    hierarchy = MemoryHierarchy(provider, owner=owner, config=config)
    if hierarchy.config.flat:
        merged = [item for items in banks.values() for item in items]
        hierarchy.longmem.items = merged
    else:
        hierarchy.workmem.items = banks.get("workmem", [])
        hierarchy.recentmem.items = banks.get("recentmem", [])
        hierarchy.longmem.items = banks.get("longmem", []) + banks.get("flat", [])
    return hierarchy
