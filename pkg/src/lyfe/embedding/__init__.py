from .kernels import BACKEND, cosine_to_many, pairwise_cosine
from .providers import (
    DimensionMismatchError,
    EmbeddingCache,
    EmbeddingError,
    EmbeddingProvider,
    EmptyTextError,
    HashedBagProvider,
    ProviderUnavailableError,
    RemoteEmbeddingProvider,
    ZeroNormError,
    as_vector,
    cosine_similarity,
    token_bucket,
    tokenize,
)

__all__ = [
    "BACKEND",
    "DimensionMismatchError",
    "EmbeddingCache",
    "EmbeddingError",
    "EmbeddingProvider",
    "EmptyTextError",
    "HashedBagProvider",
    "ProviderUnavailableError",
    "RemoteEmbeddingProvider",
    "ZeroNormError",
    "as_vector",
    "cosine_similarity",
    "cosine_to_many",
    "pairwise_cosine",
    "token_bucket",
    "tokenize",
]
