"""Bessel functions of the first kind J_n for integer order, and their zeros.

Evaluation uses the ascending power series below ``CROSSOVER`` and Miller's
backward recurrence (normalised with ``J_0 + 2 * sum J_2k = 1``) above it.
Zeros are bracketed by interlacing with the zeros of the previous order and
polished with a safeguarded Newton iteration started from McMahon's
asymptotic expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping

import numpy as np

from .errors import ConvergenceError

__all__ = [
    "CROSSOVER",
    "BesselZeroTable",
    "bessel_j",
    "bessel_j_series",
    "bessel_j_recurrence",
    "bessel_j_derivative",
    "bessel_zero",
    "mcmahon_guess",
    "zero_table",
]

#: Arguments below this use the power series; at and above, backward recurrence.
CROSSOVER = 10.0

ZERO_RESIDUAL_TOL = 1e-10
ZERO_MAX_ITER = 100

_RESCALE = 1e200


def _check_order(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        if isinstance(n, float) and n.is_integer():
            n = int(n)
        else:
            raise ValueError(f"Bessel order must be an integer, got {n!r}")
    n = int(n)
    if n < 0:
        raise ValueError(f"Bessel order must be non-negative, got {n}")
    return n


def bessel_j_series(n: int, x) -> np.ndarray:
    """Ascending power series for J_n(x), x >= 0 (array in, array out)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    if n == 0:
        out[~pos] = 1.0
    xp = x[pos]
    if xp.size == 0:
        return out
    # leading term (x/2)^n / n! in log space so large n cannot overflow
    term = np.exp(n * (np.log(xp) - math.log(2.0)) - math.lgamma(n + 1))
    total = term.copy()
    q = -(xp * xp) / 4.0
    k = 0
    while True:
        k += 1
        term = term * q / (k * (n + k))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)) and k > 2:
            break
        if k > 500:
            break
    out[pos] = total
    return out


def _miller_start(n: int, xmax: float) -> int:
    top = max(n, xmax)
    start = int(top + 30 + 8.0 * top ** (1.0 / 3.0))
    return start + (start % 2)


def bessel_j_recurrence(n: int, x) -> np.ndarray:
    """J_n(x) for x > 0 by Miller's backward recurrence (array in, array out)."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return np.zeros_like(x)
    if np.any(x <= 0):
        raise ValueError("backward recurrence needs strictly positive arguments")
    start = _miller_start(n, float(np.max(x)))
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    target = np.zeros_like(x)
    if start == n:
        target = j_cur.copy()
    two_over_x = 2.0 / x
    for k in range(start, 0, -1):
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the (unnormalised) J_{k-1}
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if k - 1 == n:
            target = j_cur.copy()
        big = np.abs(j_cur) > _RESCALE
        if np.any(big):
            s = np.where(big, 1.0 / _RESCALE, 1.0)
            j_cur *= s
            j_next *= s
            norm *= s
            target *= s
    norm += j_cur
    return target / norm


def _scalar_series(n: int, x: float) -> float:
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    term = math.exp(n * (math.log(x) - math.log(2.0)) - math.lgamma(n + 1))
    total = term
    q = -(x * x) / 4.0
    k = 0
    while True:
        k += 1
        term *= q / (k * (n + k))
        total += term
        if k > 2 and abs(term) <= 1e-17 * abs(total) or k > 500:
            return total


def _scalar_recurrence(n: int, x: float) -> float:
    start = _miller_start(n, x)
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    target = j_cur if start == n else 0.0
    two_over_x = 2.0 / x
    for k in range(start, 0, -1):
        j_next, j_cur = j_cur, k * two_over_x * j_cur - j_next
        if (k - 1) % 2 == 0 and k > 1:
            norm += 2.0 * j_cur
        if k - 1 == n:
            target = j_cur
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            norm /= _RESCALE
            target /= _RESCALE
    return target / (norm + j_cur)


def bessel_j(n: int, x):
    """Bessel function of the first kind J_n(x) for integer order n >= 0.

    Parameters
    ----------
    n : int
        Order, ``n >= 0``.
    x : float or array_like
        Argument(s). Negative arguments use ``J_n(-x) = (-1)^n J_n(x)``.

    Returns
    -------
    float or ndarray
        Matches the shape of ``x``; a Python float for scalar input.
    """
    n = _check_order(n)
    scalar = np.ndim(x) == 0
    if scalar:
        xf = float(x)
        if not math.isfinite(xf):
            raise ValueError("Bessel argument must be finite")
        ax = abs(xf)
        val = _scalar_series(n, ax) if ax < CROSSOVER else _scalar_recurrence(n, ax)
        return -val if (xf < 0 and n % 2 == 1) else val
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("Bessel argument must be finite")
    ax = np.abs(xa).reshape(-1)
    out = np.empty_like(ax)
    small = ax < CROSSOVER
    if np.any(small):
        out[small] = bessel_j_series(n, ax[small])
    if np.any(~small):
        out[~small] = bessel_j_recurrence(n, ax[~small])
    if n % 2 == 1:
        out = np.where(xa.reshape(-1) < 0, -out, out)
    out = out.reshape(xa.shape)
    return out


def bessel_j_derivative(n: int, x):
    """d/dx J_n(x), via J_0' = -J_1 and J_n' = (J_{n-1} - J_{n+1}) / 2."""
    n = _check_order(n)
    if n == 0:
        return -bessel_j(1, x)
    return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))


def mcmahon_guess(n: int, m: int) -> float:
    """McMahon's large-zero expansion for the m-th positive zero of J_n."""
    mu = 4.0 * n * n
    beta = (m + 0.5 * n - 0.25) * math.pi
    b8 = 8.0 * beta
    return (
        beta
        - (mu - 1.0) / b8
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8**3)
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * b8**5)
    )


def _bracket(n: int, m: int) -> tuple[float, float]:
    if n == 0:
        return (m - 0.5) * math.pi, m * math.pi
    # interlacing: exactly one zero of J_n between consecutive zeros of J_{n-1}
    return bessel_zero(n - 1, m), bessel_zero(n - 1, m + 1)


@lru_cache(maxsize=None)
def bessel_zero(n: int, m: int, max_iter: int = ZERO_MAX_ITER) -> float:
    """The m-th positive zero alpha_{n,m} of J_n.

    Raises
    ------
    ConvergenceError
        If the safeguarded Newton iteration exceeds ``max_iter`` steps.
    """
    n = _check_order(n)
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"zero index must be an integer >= 1, got {m!r}")
    m = int(m)
    lo, hi = _bracket(n, m)
    f_lo = bessel_j(n, lo)
    f_hi = bessel_j(n, hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise ConvergenceError(f"no sign change bracketing alpha_({n},{m}) in [{lo}, {hi}]")

    x = mcmahon_guess(n, m)
    if not lo < x < hi:
        x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = bessel_j(n, x)
        if fx == 0.0:
            return x
        if (fx > 0) == (f_lo > 0):
            lo, f_lo = x, fx
        else:
            hi = x
        dfx = bessel_j_derivative(n, x)
        x_new = x - fx / dfx if dfx != 0.0 else lo - 1.0
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 4.0 * np.spacing(x) or hi - lo <= 4.0 * np.spacing(hi):
            if abs(bessel_j(n, x_new)) <= ZERO_RESIDUAL_TOL:
                return x_new
        x = x_new
    raise ConvergenceError(f"alpha_({n},{m}) did not converge in {max_iter} iterations")


@dataclass(frozen=True)
class BesselZeroTable(Mapping):
    """Immutable mapping ``(n, m) -> alpha_{n,m}``."""

    entries: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __getitem__(self, key: tuple[int, int]) -> float:
        return self.entries[key]

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.entries.items())))

    def orders(self) -> list[int]:
        return sorted({n for n, _ in self.entries})

    def zeros_of(self, n: int) -> list[float]:
        """Zeros of J_n in the table, ordered by m."""
        return [self.entries[k] for k in sorted(k for k in self.entries if k[0] == n)]

    def invariant_violations(self, residual_tol: float = ZERO_RESIDUAL_TOL) -> list[str]:
        """Describe every broken table invariant; empty when the table is sound."""
        problems = []
        for n in self.orders():
            zs = self.zeros_of(n)
            for i in range(len(zs) - 1):
                if not zs[i] < zs[i + 1]:
                    problems.append(f"zeros of J_{n} not increasing at m={i + 1}")
        for (n, m), alpha in self.entries.items():
            res = abs(bessel_j(n, alpha))
            if res > residual_tol:
                problems.append(f"|J_{n}(alpha_({n},{m}))| = {res:.3e}")
            nxt = self.entries.get((n + 1, m))
            if nxt is not None and not alpha < nxt:
                problems.append(f"alpha_({n},{m}) >= alpha_({n + 1},{m})")
            up = self.entries.get((n, m + 1))
            if nxt is not None and up is not None and not nxt < up:
                problems.append(f"alpha_({n + 1},{m}) not inside (alpha_({n},{m}), alpha_({n},{m + 1}))")
        return problems


def zero_table(n_max: int, m_max: int) -> BesselZeroTable:
    """All zeros alpha_{n,m} with 0 <= n <= n_max and 1 <= m <= m_max."""
    if n_max < 0 or m_max < 1:
        raise ValueError(f"need n_max >= 0 and m_max >= 1, got ({n_max}, {m_max})")
    entries = {}
    for n in range(n_max + 1):
        for m in range(1, m_max + 1):
            try:
                entries[(n, m)] = bessel_zero(n, m)
            except ConvergenceError as exc:
                raise ConvergenceError(f"zero table entry ({n}, {m}): {exc}") from exc
    return BesselZeroTable(entries)
