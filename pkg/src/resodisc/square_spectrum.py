"""Eigenvalue multiplicities of the Dirichlet Laplacian on the square (0, pi)^2.

The eigenvalues are N = n^2 + m^2 with n, m >= 1, eigenfunctions
sin(nx) sin(my); the multiplicity of N is the number of ordered pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["RepresentationCount", "count_representations", "find_multiplicity", "multiplicities_upto"]


@dataclass(frozen=True)
class RepresentationCount:
    N: int
    pairs: tuple[tuple[int, int], ...]

    @property
    def multiplicity(self) -> int:
        return len(self.pairs)

    @property
    def has_diagonal(self) -> bool:
        return any(n == m for n, m in self.pairs)


def count_representations(N: int) -> RepresentationCount:
    """Ordered pairs (n, m), n, m >= 1, with n^2 + m^2 = N, sorted."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    pairs = []
    n = 1
    while n * n < N:
        rest = N - n * n
        m = math.isqrt(rest)
        if m >= 1 and m * m == rest:
            pairs.append((n, m))
        n += 1
    return RepresentationCount(N, tuple(pairs))


def multiplicities_upto(N_max: int) -> np.ndarray:
    """Array ``c`` with ``c[N]`` = number of ordered representations, 0 <= N <= N_max."""
    if N_max < 1:
        raise ValueError(f"N_max must be >= 1, got {N_max}")
    counts = np.zeros(N_max + 1, dtype=np.int32)
    top = math.isqrt(N_max)
    for n in range(1, top + 1):
        m_hi = math.isqrt(N_max - n * n)
        if m_hi < n:
            break
        m = np.arange(n, m_hi + 1, dtype=np.int64)
        # indices are distinct within one row, so fancy-index += is safe
        counts[n * n + m * m] += np.where(m == n, 1, 2).astype(np.int32)
    return counts


def find_multiplicity(target: int, N_max: int) -> list[int]:
    """All N <= N_max whose square-domain eigenvalue multiplicity equals ``target``."""
    if target < 0:
        raise ValueError("target multiplicity must be non-negative")
    counts = multiplicities_upto(N_max)
    hits = np.flatnonzero(counts == target)
    return [int(h) for h in hits if h >= 1]
