"""Gauss-Legendre interval rules, the polar tensor rule on a disc, and
sign partitions of the radial eigenfunction factor."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

from .besselkit import BesselZeroTable, bessel_j
from .errors import QuadratureError

__all__ = [
    "IntervalRule",
    "DiscGrid",
    "SignPartition",
    "gauss_rule",
    "composite_gauss_rule",
    "periodic_rule",
    "disc_grid",
    "integrate_disc",
    "sign_partition",
]

DEFAULT_RADIAL_ORDER = 64
DEFAULT_ANGULAR_ORDER = 64


@lru_cache(maxsize=64)
def _reference_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True, eq=False)
class IntervalRule:
    """Quadrature nodes and weights on ``(lo, hi)``."""

    lo: float
    hi: float
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, func: Callable) -> float:
        values = np.asarray(func(self.nodes), dtype=float)
        values = np.broadcast_to(values, self.nodes.shape)
        if not np.all(np.isfinite(values)):
            bad = self.nodes[~np.isfinite(values)][0]
            raise QuadratureError(f"non-finite integrand at x={bad!r}")
        return float(np.sum(values * self.weights))


def gauss_rule(lo: float, hi: float, order: int) -> IntervalRule:
    """``order``-point Gauss-Legendre rule mapped to ``(lo, hi)``.

    Exact for polynomials of degree ``2 * order - 1``.
    """
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise ValueError(f"degenerate interval ({lo}, {hi})")
    x, w = _reference_rule(int(order))
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return IntervalRule(float(lo), float(hi), mid + half * x, half * w, int(order))


def composite_gauss_rule(lo: float, hi: float, panels: int, order: int) -> IntervalRule:
    """``panels`` equal sub-intervals, each with an ``order``-point Gauss rule."""
    if panels < 1:
        raise ValueError("need at least one panel")
    edges = np.linspace(lo, hi, panels + 1)
    x, w = _reference_rule(int(order))
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return IntervalRule(float(lo), float(hi), nodes, weights, int(order))


def periodic_rule(count: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform trapezoid nodes on ``[0, 2*pi)``; spectrally accurate for periodic integrands."""
    if count < 1:
        raise ValueError("angular order must be >= 1")
    theta = 2.0 * np.pi * np.arange(count) / count
    return theta, np.full(count, 2.0 * np.pi / count)


@dataclass(frozen=True, eq=False)
class DiscGrid:
    """Polar tensor grid on the disc of radius ``radius``.

    ``weights`` already contain the Jacobian factor r, so
    ``sum(values * weights)`` approximates the area integral.
    """

    radius: float
    r: np.ndarray
    r_weights: np.ndarray
    theta: np.ndarray
    theta_weights: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.r.size, self.theta.size)

    @cached_property
    def R(self) -> np.ndarray:
        return np.broadcast_to(self.r[:, None], self.shape)

    @cached_property
    def THETA(self) -> np.ndarray:
        return np.broadcast_to(self.theta[None, :], self.shape)

    @cached_property
    def weights(self) -> np.ndarray:
        return (self.r_weights * self.r)[:, None] * self.theta_weights[None, :]

    def integrate(self, values) -> float:
        values = np.broadcast_to(np.asarray(values, dtype=float), self.shape)
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise QuadratureError(
                f"non-finite integrand at r={self.r[i]!r}, theta={self.theta[j]!r}"
            )
        return float(np.sum(values * self.weights))


def disc_grid(a: float, radial_order: int = DEFAULT_RADIAL_ORDER,
              angular_order: int = DEFAULT_ANGULAR_ORDER) -> DiscGrid:
    if not a > 0:
        raise ValueError(f"disc radius must be positive, got {a}")
    rule = gauss_rule(0.0, a, radial_order)
    theta, tw = periodic_rule(angular_order)
    return DiscGrid(float(a), rule.nodes, rule.weights, theta, tw)


def integrate_disc(integrand: Callable, a: float, radial_order: int = DEFAULT_RADIAL_ORDER,
                   angular_order: int = DEFAULT_ANGULAR_ORDER) -> float:
    """Approximate the integral over 0 <= theta < 2*pi, 0 <= r <= a of ``integrand(r, theta) * r``.

    ``integrand`` is called once with broadcast 2-D arrays ``(r, theta)``.
    """
    grid = disc_grid(a, radial_order, angular_order)
    return grid.integrate(integrand(grid.R, grid.THETA))


@dataclass(frozen=True)
class SignPartition:
    """Where r -> J_n(alpha_{n,m} r / a) is positive or negative on (0, a)."""

    n: int
    m: int
    a: float
    interior_zeros: tuple[float, ...]
    positive_intervals: tuple[tuple[float, float], ...]
    negative_intervals: tuple[tuple[float, float], ...]

    def intervals(self) -> list[tuple[float, float, int]]:
        """All sub-intervals in radial order as ``(lo, hi, sign)``."""
        tagged = [(lo, hi, 1) for lo, hi in self.positive_intervals]
        tagged += [(lo, hi, -1) for lo, hi in self.negative_intervals]
        return sorted(tagged)


def sign_partition(n: int, m: int, a: float, zeros: BesselZeroTable) -> SignPartition:
    missing = [(n, j) for j in range(1, m + 1) if (n, j) not in zeros]
    if missing:
        raise KeyError(f"zero table lacks entries {missing}")
    if not a > 0:
        raise ValueError(f"disc radius must be positive, got {a}")
    alpha = zeros[(n, m)]
    cuts = tuple(a * zeros[(n, j)] / alpha for j in range(1, m))
    edges = (0.0,) + cuts + (float(a),)
    pos, neg = [], []
    for i in range(m):
        (pos if i % 2 == 0 else neg).append((edges[i], edges[i + 1]))
    return SignPartition(n, m, float(a), cuts, tuple(pos), tuple(neg))


def radial_profile(n: int, alpha: float, a: float) -> Callable:
    """r -> J_n(alpha r / a)."""
    return lambda r: bessel_j(n, alpha * np.asarray(r) / a)
