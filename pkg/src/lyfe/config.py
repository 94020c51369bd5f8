"""Runtime configuration: INI files with section.key addressing.

Example::

    [embedding]
    timeout_ms = 5000
    retries = 2
    cache_path = ~/.cache/lyfe/embeddings.jsonl

    [lang]
    endpoint = https://example.invalid/v1/chat/completions
    api_key_env = LYFE_API_KEY

    [gateway]
    auth_token = change-me
"""

from __future__ import annotations

import configparser
from pathlib import Path
from typing import Optional

DEFAULTS = {
    "embedding.endpoint": "",
    "embedding.timeout_ms": "5000",
    "embedding.retries": "2",
    "embedding.dimension": "256",
    "embedding.cache_path": "",
    "lang.endpoint": "",
    "lang.api_key_env": "",
    "lang.model": "",
    "lang.timeout_ms": "30000",
    "lang.retries": "1",
    "gateway.auth_token": "",
    "gateway.say_interval_s": "2.0",
}


class Config:
    def __init__(self, values: Optional[dict[str, str]] = None):
        self.values = dict(DEFAULTS)
        if values:
            self.values.update(values)

    @classmethod
    def load(cls, path: Optional[Path | str] = None) -> "Config":
        if path is None:
            return cls()
        parser = configparser.ConfigParser()
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        values = {
            f"{section}.{key}": value
            for section in parser.sections()
            for key, value in parser[section].items()
        }
        return cls(values)

    def get(self, key: str, default: str = "") -> str:
        return self.values.get(key, default)

    def get_int(self, key: str) -> int:
        return int(self.values[key])

    def get_float(self, key: str) -> float:
        return float(self.values[key])


def build_providers(config: Config, rules_path=None):
    """Provider set from a config: remote backends when endpoints are set,
    otherwise the deterministic hashed embedder and a scripted rules pack.
    """
    from .embedding import EmbeddingCache, HashedBagProvider, RemoteEmbeddingProvider
    from .lang import RemoteChatProvider, scripted_rules_load
    from .scenarios import ProviderSet

    dimension = config.get_int("embedding.dimension")
    embed_endpoint = config.get("embedding.endpoint")
    if embed_endpoint:
        cache_path = config.get("embedding.cache_path")
        embedding = RemoteEmbeddingProvider(
            embed_endpoint,
            dimension=dimension,
            timeout_ms=config.get_int("embedding.timeout_ms"),
            retries=config.get_int("embedding.retries"),
            cache=EmbeddingCache(cache_path) if cache_path else None,
        )
    else:
        embedding = HashedBagProvider(dimension=dimension)

    lang_endpoint = config.get("lang.endpoint")
    if lang_endpoint:
        lm = RemoteChatProvider(
            lang_endpoint,
            api_key_env=config.get("lang.api_key_env"),
            model=config.get("lang.model"),
            timeout_ms=config.get_int("lang.timeout_ms"),
            retries=config.get_int("lang.retries"),
        )
    elif rules_path is not None:
        lm = scripted_rules_load(rules_path)
    else:
        raise ValueError("no lang.endpoint configured and no rules pack given")
    return ProviderSet(embedding=embedding, lm=lm)
