"""Dirichlet-Laplacian spectrum of the disc B_a."""

from __future__ import annotations

from dataclasses import dataclass

from .besselkit import BesselZeroTable, bessel_zero

__all__ = [
    "EigenMode",
    "RADIAL_MODE_NOTE",
    "bourget_check",
    "enumerate_eigenvalues",
    "mode_from_indices",
    "mode_from_rank",
]

RADIAL_MODE_NOTE = (
    "n = 0 radial mode: the eigenspace is one-dimensional (sin 0*theta vanishes); "
    "the two-fold multiplicity of non-principal eigenvalues holds only for n >= 1"
)

_CAP_MARGIN = 1e-6


@dataclass(frozen=True)
class EigenMode:
    """One eigenvalue lambda = alpha_{n,m}^2 / a^2 of the disc.

    ``rank`` is the 1-based position in the increasing spectrum, or 0 when the
    mode was built from its indices without ranking.
    """

    n: int
    m: int
    alpha: float
    lam: float
    rank: int
    multiplicity: int
    note: str = ""

    @property
    def is_principal(self) -> bool:
        return self.n == 0 and self.m == 1


def _make_mode(n: int, m: int, alpha: float, a: float, rank: int) -> EigenMode:
    note = RADIAL_MODE_NOTE if n == 0 and m >= 2 else ""
    return EigenMode(n, m, alpha, alpha * alpha / (a * a), rank, 1 if n == 0 else 2, note)


def _candidates(cap: float) -> list[tuple[float, int, int]]:
    # alpha_{n,1} increases with n, so stopping at the first order whose
    # first zero exceeds the cap misses nothing below it
    out = []
    n = 0
    while bessel_zero(n, 1) < cap:
        m = 1
        while True:
            alpha = bessel_zero(n, m)
            if alpha >= cap:
                break
            out.append((alpha, n, m))
            m += 1
        n += 1
    out.sort()
    return out


def enumerate_eigenvalues(a: float, count: int) -> list[EigenMode]:
    """The ``count`` smallest disc eigenvalues, increasing, ranks 1..count.

    Raises
    ------
    ArithmeticError
        If two zeros of different orders coincide within 1e-12 (a numerical
        counterexample to the distinctness of Bessel zeros, never expected).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not a > 0:
        raise ValueError(f"disc radius must be positive, got {a}")
    cap = 4.0
    while True:
        pool = [c for c in _candidates(cap) if c[0] < cap - _CAP_MARGIN]
        if len(pool) >= count:
            break
        cap *= 1.5
    pool = pool[:count]
    for (x1, n1, m1), (x2, n2, m2) in zip(pool, pool[1:]):
        if abs(x2 - x1) < 1e-12:
            raise ArithmeticError(f"coincident zeros alpha_({n1},{m1}) and alpha_({n2},{m2})")
    return [_make_mode(n, m, alpha, a, k) for k, (alpha, n, m) in enumerate(pool, start=1)]


def mode_from_rank(k: int, a: float) -> EigenMode:
    return enumerate_eigenvalues(a, k)[-1]


def mode_from_indices(n: int, m: int, a: float) -> EigenMode:
    """Mode (n, m) with its rank in the spectrum of B_a filled in."""
    alpha = bessel_zero(n, m)
    below = [c for c in _candidates(alpha + 1.0) if c[0] < alpha]
    return _make_mode(n, m, alpha, a, len(below) + 1)


def bourget_check(table: BesselZeroTable, tol: float) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """All pairs of zeros from different orders closer than ``tol``.

    Distinct integer orders never share a positive zero, so the result is
    expected to be empty; anything returned is a defect in the table.
    """
    items = sorted((alpha, key) for key, alpha in table.entries.items())
    hits = []
    for i, (x1, k1) in enumerate(items):
        for x2, k2 in items[i + 1:]:
            if x2 - x1 >= tol:
                break
            if k1[0] != k2[0]:
                hits.append((k1, k2) if k1 < k2 else (k2, k1))
    return sorted(hits)


def eigenvalue_gaps(modes: list[EigenMode]) -> list[float]:
    return [b.lam - a.lam for a, b in zip(modes, modes[1:])]

