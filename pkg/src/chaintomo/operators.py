"""Local operator matrices shared across the package."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

PLUS_X = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
MINUS_X = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)


@lru_cache(maxsize=None)
def annihilation(dim: int) -> NDArray:
    """Truncated bosonic annihilation operator: a|n> = sqrt(n)|n-1>."""
    a = np.zeros((dim, dim), dtype=complex)
    n = np.arange(1, dim)
    a[n - 1, n] = np.sqrt(n)
    return a


def creation(dim: int) -> NDArray:
    return annihilation(dim).conj().T


@lru_cache(maxsize=None)
def number_op(dim: int) -> NDArray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def vacuum(dim: int) -> NDArray:
    v = np.zeros(dim, dtype=complex)
    v[0] = 1.0
    return v
