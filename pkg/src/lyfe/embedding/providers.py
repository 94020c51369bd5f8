"""Text-to-vector embedding providers and the similarity arithmetic.

Providers produce fixed-dimension float64 vectors. The deterministic
test provider hashes a bag of tokens into buckets so that semantic-overlap
tests are reproducible without any remote service; the remote provider
speaks a single-endpoint HTTP protocol and caches results persistently.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import urllib.request
from pathlib import Path
from typing import Optional

import numpy as np

from . import kernels


class EmbeddingError(Exception):
    """Base class for embedding failures."""


class EmptyTextError(EmbeddingError):
    """Text was empty after trimming."""


class ZeroNormError(EmbeddingError):
    """Vector has zero norm (text with no tokens, or a zero vector)."""


class DimensionMismatchError(EmbeddingError):
    """Vectors of different dimensions were mixed."""


class ProviderUnavailableError(EmbeddingError):
    """Remote embedding backend could not be reached."""


def as_vector(values, dimension: Optional[int] = None) -> np.ndarray:
    """Validate and coerce to a finite float64 1-D array."""
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1:
        raise EmbeddingError(f"embedding must be 1-D, got shape {vec.shape}")
    if dimension is not None and vec.shape[0] != dimension:
        raise DimensionMismatchError(
            f"expected dimension {dimension}, got {vec.shape[0]}"
        )
    if not np.all(np.isfinite(vec)):
        raise EmbeddingError("embedding contains NaN or Inf")
    return vec


def cosine_similarity(v1, v2) -> float:
    """Normalised dot product, in [-1, 1].

    Raises DimensionMismatchError on unequal dimensions and ZeroNormError
    when either vector has zero norm.
    """
    a = as_vector(v1)
    b = as_vector(v2)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(f"{a.shape[0]} vs {b.shape[0]}")
    if not a.any() or not b.any():
        raise ZeroNormError("cosine similarity undefined for zero-norm vector")
    return kernels.cosine(a, b)


class EmbeddingProvider:
    """Base provider: a named, fixed-dimension text-to-vector function."""

    name: str = "base"
    dimension: int = 0
    deterministic: bool = False

    def embed(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise EmptyTextError("cannot embed empty text")
        vec = self._embed(text)
        return as_vector(vec, self.dimension)

    def _embed(self, text: str) -> np.ndarray:
        raise NotImplementedError


_TOKEN_RE = re.compile(r"[^a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs."""
    return [t for t in _TOKEN_RE.split(text.lower()) if t]


def token_bucket(token: str, dimension: int) -> int:
    """Stable bucket index for a token (md5-based, hash-seed independent)."""
    digest = hashlib.md5(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") % dimension


class HashedBagProvider(EmbeddingProvider):
    """Deterministic test provider: hashed bag-of-tokens, L2-normalised.

    Same text always maps to the same vector, and token-multiset overlap
    is directly computable, which gives tests an independent oracle.
    """

    deterministic = True

    def __init__(self, dimension: int = 256, name: str = "hashed-bag"):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.name = name
        self._memo: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def _embed(self, text: str) -> np.ndarray:
        with self._lock:
            cached = self._memo.get(text)
        if cached is not None:
            return cached
        counts = np.zeros(self.dimension, dtype=np.float64)
        for token in tokenize(text):
            counts[token_bucket(token, self.dimension)] += 1.0
        norm = np.sqrt(np.dot(counts, counts))
        if norm == 0.0:
            raise ZeroNormError(f"text has no tokens: {text!r}")
        vec = counts / norm
        vec.setflags(write=False)
        with self._lock:
            self._memo[text] = vec
        return vec


class EmbeddingCache:
    """Persistent (provider name, text hash) -> vector cache, JSONL-backed.

    Thread-safe; loads existing entries on open and appends on miss so the
    cache survives across runs and bounds remote-call cost.
    """

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[tuple[str, str], np.ndarray] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    vec = np.asarray(rec["vector"], dtype=np.float64)
                    vec.setflags(write=False)
                    self._entries[(rec["provider"], rec["text_hash"])] = vec

    @staticmethod
    def text_key(text: str) -> str:
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def get(self, provider: str, text: str) -> Optional[np.ndarray]:
        with self._lock:
            return self._entries.get((provider, self.text_key(text)))

    def put(self, provider: str, text: str, vec: np.ndarray) -> None:
        key = (provider, self.text_key(text))
        with self._lock:
            if key in self._entries:
                return
            frozen = np.array(vec, dtype=np.float64)
            frozen.setflags(write=False)
            self._entries[key] = frozen
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "provider": provider,
                            "text_hash": key[1],
                            "vector": [float(x) for x in vec],
                        }
                    )
                    + "\n"
                )

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


class RemoteEmbeddingProvider(EmbeddingProvider):
    """HTTP backend: POST UTF-8 text to one endpoint, get D floats back.

    Timeout and retry count come from the ``embedding.timeout_ms`` /
    ``embedding.retries`` config keys. Results go through a persistent cache.
    """

    deterministic = False

    def __init__(
        self,
        endpoint: str,
        dimension: int,
        name: str = "remote",
        timeout_ms: int = 5000,
        retries: int = 2,
        cache: Optional[EmbeddingCache] = None,
    ):
        self.endpoint = endpoint
        self.dimension = dimension
        self.name = name
        self.timeout_ms = timeout_ms
        self.retries = retries
        self.cache = cache

    def _embed(self, text: str) -> np.ndarray:
        if self.cache is not None:
            hit = self.cache.get(self.name, text)
            if hit is not None:
                return hit
        last_err: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                req = urllib.request.Request(
                    self.endpoint,
                    data=text.encode("utf-8"),
                    headers={"content-type": "text/plain; charset=utf-8"},
                    method="POST",
                )
                with urllib.request.urlopen(req, timeout=self.timeout_ms / 1000.0) as resp:
                    values = json.loads(resp.read().decode("utf-8"))
                vec = as_vector(values, self.dimension)
                if self.cache is not None:
                    self.cache.put(self.name, text, vec)
                return vec
            except (OSError, ValueError, json.JSONDecodeError) as err:
                last_err = err
        raise ProviderUnavailableError(
            f"embedding backend {self.endpoint} unavailable: {last_err}"
        )
