"""Similarity kernels backing every vector operation in the runtime.

Two interchangeable backends compute identical quantities:

* ``numpy`` -- vectorised, BLAS-backed (the default)
* ``numba`` -- JIT-compiled explicit loops

Selection is controlled by the ``LYFE_KERNELS`` environment variable:
``auto`` (= numpy), ``numba``, or ``numpy``. On bank-sized workloads the
BLAS path measures faster than the naive JIT loops (see
``benchmarks/bench_kernels.py``), so auto resolves to numpy; the numba
path stays available for environments where that tradeoff flips.

Kernels assume validated inputs (float64, matching dimensions, nonzero
norms); validation lives in :mod:`lyfe.embedding.providers`.
"""

from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "LYFE_KERNELS"
_CHOICES = ("auto", "numba", "numpy")


def _resolve_backend() -> str:
    choice = os.environ.get(ENV_FLAG, "auto").strip().lower()
    if choice not in _CHOICES:
        raise ValueError(f"{ENV_FLAG} must be one of {_CHOICES}, got {choice!r}")
    if choice != "numba":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        raise RuntimeError(f"{ENV_FLAG}=numba but numba is not importable")
    return "numba"


BACKEND = _resolve_backend()


# numpy reference implementations


def _cosine_np(v1: np.ndarray, v2: np.ndarray) -> float:
    return float(np.dot(v1, v2) / (np.sqrt(np.dot(v1, v1)) * np.sqrt(np.dot(v2, v2))))


def _cosine_to_many_np(mat: np.ndarray, v: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.einsum("ij,ij->i", mat, mat))
    vnorm = np.sqrt(np.dot(v, v))
    return (mat @ v) / (norms * vnorm)


def _pairwise_cosine_np(mat: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.einsum("ij,ij->i", mat, mat))
    normed = mat / norms[:, None]
    return normed @ normed.T


if BACKEND == "numba":
    from numba import njit

    @njit(cache=True)
    def _cosine_nb(v1, v2):  # pragma: no cover - exercised via dispatch
        dot = 0.0
        n1 = 0.0
        n2 = 0.0
        for j in range(v1.shape[0]):
            dot += v1[j] * v2[j]
            n1 += v1[j] * v1[j]
            n2 += v2[j] * v2[j]
        return dot / (np.sqrt(n1) * np.sqrt(n2))

    @njit(cache=True)
    def _cosine_to_many_nb(mat, v):  # pragma: no cover
        n, d = mat.shape
        out = np.empty(n, dtype=np.float64)
        vnorm = 0.0
        for j in range(d):
            vnorm += v[j] * v[j]
        vnorm = np.sqrt(vnorm)
        for i in range(n):
            dot = 0.0
            rnorm = 0.0
            for j in range(d):
                dot += mat[i, j] * v[j]
                rnorm += mat[i, j] * mat[i, j]
            out[i] = dot / (np.sqrt(rnorm) * vnorm)
        return out

    @njit(cache=True)
    def _pairwise_cosine_nb(mat):  # pragma: no cover
        n, d = mat.shape
        norms = np.empty(n, dtype=np.float64)
        for i in range(n):
            acc = 0.0
            for j in range(d):
                acc += mat[i, j] * mat[i, j]
            norms[i] = np.sqrt(acc)
        out = np.empty((n, n), dtype=np.float64)
        for i in range(n):
            out[i, i] = 1.0
            for k in range(i + 1, n):
                dot = 0.0
                for j in range(d):
                    dot += mat[i, j] * mat[k, j]
                sim = dot / (norms[i] * norms[k])
                out[i, k] = sim
                out[k, i] = sim
        return out

    _cosine_impl = _cosine_nb
    _cosine_to_many_impl = _cosine_to_many_nb
    _pairwise_cosine_impl = _pairwise_cosine_nb
else:
    _cosine_impl = _cosine_np
    _cosine_to_many_impl = _cosine_to_many_np
    _pairwise_cosine_impl = _pairwise_cosine_np


def cosine(v1: np.ndarray, v2: np.ndarray) -> float:
    """Normalised dot product of two validated vectors."""
    return float(_cosine_impl(v1, v2))


def cosine_to_many(mat: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Similarity of ``v`` against each row of ``mat``; shape (n,)."""
    if mat.shape[0] == 0:
        return np.empty(0, dtype=np.float64)
    return np.asarray(_cosine_to_many_impl(mat, v))


def pairwise_cosine(mat: np.ndarray) -> np.ndarray:
    """Full (n, n) similarity matrix of the rows of ``mat``."""
    if mat.shape[0] == 0:
        return np.empty((0, 0), dtype=np.float64)
    return np.asarray(_pairwise_cosine_impl(mat))
