"""Landesman-Lazer quantities for resonance at a double eigenvalue of the disc.

For a mode (n, m) with n >= 1 the eigenspace is spanned by

    phi_k = J_n(alpha r / a) cos(n theta),   psi_k = J_n(alpha r / a) sin(n theta).

For every unit combination w = A phi_k + B psi_k (A^2 + B^2 = 1) the integral
of w over {w > 0} equals the sign-split radial constant ``J_nm`` below, and
the integral over {w < 0} equals -J_nm. Solvability of

    Delta u + lambda_k u + g(u) = f,   u = 0 on the boundary,

is then decided by comparing sqrt(A_k^2 + B_k^2), the length of the
projection of f on the eigenspace, with J_nm * (g(+inf) - g(-inf)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .besselkit import BesselZeroTable, bessel_j, bessel_zero
from .disc_spectrum import EigenMode, mode_from_indices
from .errors import QuadratureError
from .exprlang import Expr, Nonlinearity, evaluate_polar
from .quadrature import (
    DEFAULT_ANGULAR_ORDER,
    DEFAULT_RADIAL_ORDER,
    composite_gauss_rule,
    disc_grid,
    gauss_rule,
    periodic_rule,
    sign_partition,
)

__all__ = [
    "EigenPairBasis",
    "SolvabilityReport",
    "Verdict",
    "DirectionScan",
    "angular_mass",
    "check_solvability",
    "compute_jnm",
    "eigenspace_integrals",
    "eigenfunction_norm_sq",
    "project",
    "direction_scan",
]

JNM_ORDER = 64
JNM_TOL = 1e-8

# brute-force grid for integrals over the sign sets of w
BRUTE_RADIAL_PANELS = 512
BRUTE_RADIAL_POINTS = 4
BRUTE_ANGULAR = 2048


class Verdict(str, enum.Enum):
    SOLVABLE = "Solvable"
    NOT_SOLVABLE = "NotSolvable"
    BOUNDARY = "Boundary"


def _require_double(mode: EigenMode) -> None:
    if mode.n < 1:
        raise ValueError(
            f"mode ({mode.n},{mode.m}) has n = 0: its eigenspace is one-dimensional, "
            "only n >= 1 (double) eigenvalues are supported"
        )


@dataclass(frozen=True)
class EigenPairBasis:
    """The unnormalised eigenfunctions phi_k, psi_k of a double eigenvalue."""

    mode: EigenMode
    a: float

    def __post_init__(self):
        _require_double(self.mode)

    def radial(self, r):
        return bessel_j(self.mode.n, self.mode.alpha * np.asarray(r, dtype=float) / self.a)

    def phi(self, r, theta):
        return self.radial(r) * np.cos(self.mode.n * np.asarray(theta))

    def psi(self, r, theta):
        return self.radial(r) * np.sin(self.mode.n * np.asarray(theta))

    def combination(self, A: float, B: float) -> Callable:
        return lambda r, theta: A * self.phi(r, theta) + B * self.psi(r, theta)


def eigenfunction_norm_sq(n: int, m: int, a: float) -> float:
    """Squared L2 norm of J_n(alpha r / a) cos(n theta) on B_a (n >= 1).

    Uses the closed form of the radial integral, a^2/2 J_{n+1}(alpha)^2.
    """
    alpha = bessel_zero(n, m)
    return math.pi * 0.5 * a * a * bessel_j(n + 1, alpha) ** 2


def _sign_split(n: int, m: int, a: float, order: int) -> float:
    table = BesselZeroTable({(n, j): bessel_zero(n, j) for j in range(1, m + 1)})
    part = sign_partition(n, m, a, table)
    alpha = table[(n, m)]
    total = 0.0
    for lo, hi, sign in part.intervals():
        rule = gauss_rule(lo, hi, order)
        total += sign * rule.integrate(lambda r: bessel_j(n, alpha * r / a) * r)
    return 2.0 * total


def compute_jnm(n: int, m: int, a: float = 1.0, order: int = JNM_ORDER) -> float:
    """J_nm = 2 * (integral of |J_n(alpha_{n,m} r / a)| r dr over (0, a)).

    Computed sub-interval by sub-interval over the sign partition so that no
    Gauss rule straddles a zero. Raises :class:`QuadratureError` if doubling
    the order moves the result by more than 1e-8.
    """
    if n < 1:
        raise ValueError("J_nm is defined for n >= 1")
    if m < 1 or not a > 0:
        raise ValueError(f"invalid mode/radius ({n}, {m}, {a})")
    value = _sign_split(n, m, a, order)
    check = _sign_split(n, m, a, 2 * order)
    if abs(value - check) > JNM_TOL:
        raise QuadratureError(f"J_({n},{m}) not converged: {value!r} vs {check!r}")
    return check


def angular_mass(n: int, delta: float, order: int = 32) -> tuple[float, float]:
    """Integrals of cos(n theta - delta) over its positive and negative sets in (0, 2 pi)."""
    if n < 1:
        raise ValueError("angular_mass needs n >= 1")
    # zeros at n theta - delta = pi/2 + j pi
    j = np.arange(-2 * n - 2, 2 * n + 3)
    cuts = (delta + 0.5 * np.pi + j * np.pi) / n
    cuts = cuts[(cuts > 0) & (cuts < 2 * np.pi)]
    edges = np.concatenate([[0.0], np.sort(cuts), [2 * np.pi]])
    pos = neg = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0:
            continue
        piece = gauss_rule(lo, hi, order).integrate(lambda t: np.cos(n * t - delta))
        if math.cos(n * 0.5 * (lo + hi) - delta) > 0:
            pos += piece
        else:
            neg += piece
    return pos, neg


def eigenspace_integrals(mode: EigenMode, A: float, B: float, a: float,
                         radial_panels: int = BRUTE_RADIAL_PANELS,
                         angular_order: int | None = None) -> tuple[float, float]:
    """Integrals of w = J_n(alpha r/a)(A cos n theta + B sin n theta) over {w > 0} and {w < 0}.

    The sign sets are resolved pointwise on a fine polar grid, independently
    of J_nm. Requires A^2 + B^2 = 1 within 1e-12. The default angular node
    count grows with n because each of the 2n angular nodal lines costs
    O(h^2) accuracy.
    """
    _require_double(mode)
    if angular_order is None:
        angular_order = BRUTE_ANGULAR * mode.n
    if abs(A * A + B * B - 1.0) > 1e-12:
        raise ValueError(f"direction must be a unit vector, got A^2 + B^2 = {A * A + B * B!r}")
    rule = composite_gauss_rule(0.0, a, radial_panels, BRUTE_RADIAL_POINTS)
    theta, tw = periodic_rule(angular_order)
    radial = bessel_j(mode.n, mode.alpha * rule.nodes / a)
    angular = A * np.cos(mode.n * theta) + B * np.sin(mode.n * theta)
    rw = rule.weights * rule.nodes
    pos = neg = 0.0
    for start in range(0, rule.nodes.size, 256):
        sl = slice(start, start + 256)
        w = radial[sl, None] * angular[None, :]
        wt = rw[sl, None] * tw[None, :]
        pos += float(np.sum(np.where(w > 0, w, 0.0) * wt))
        neg += float(np.sum(np.where(w < 0, w, 0.0) * wt))
    return pos, neg


def project(f: Expr, mode: EigenMode, a: float, radial_order: int = DEFAULT_RADIAL_ORDER,
            angular_order: int = DEFAULT_ANGULAR_ORDER) -> tuple[float, float]:
    """A_k and B_k: integrals of f phi_k and f psi_k over B_a."""
    _require_double(mode)
    basis = EigenPairBasis(mode, a)
    grid = disc_grid(a, radial_order, angular_order)
    fv = evaluate_polar(f, grid.R, grid.THETA)
    A_k = grid.integrate(fv * basis.phi(grid.R, grid.THETA))
    B_k = grid.integrate(fv * basis.psi(grid.R, grid.THETA))
    return A_k, B_k


@dataclass(frozen=True)
class SolvabilityReport:
    n: int
    m: int
    rank: int
    radius: float
    A_k: float
    B_k: float
    J_nm: float
    g_plus: float
    g_minus: float
    lhs: float
    rhs: float
    verdict: Verdict
    margin: float
    epsilon: float
    tie_tol: float
    no_steady_states: bool
    w_k_coefficients: tuple[float, float] | None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["verdict"] = self.verdict.value
        out["w_k_coefficients"] = list(self.w_k_coefficients) if self.w_k_coefficients else None
        return out


def default_tie_tol(rhs: float) -> float:
    return 1e-7 * max(1.0, rhs)


def solvability_from_projections(A_k: float, B_k: float, J_nm: float, nl: Nonlinearity,
                                 mode: EigenMode, a: float, tie_tol: float | None = None) -> SolvabilityReport:
    lhs = math.hypot(A_k, B_k)
    rhs = J_nm * (nl.g_plus - nl.g_minus)
    tol = default_tie_tol(rhs) if tie_tol is None else tie_tol
    if lhs < rhs - tol:
        verdict = Verdict.SOLVABLE
    elif lhs > rhs + tol:
        verdict = Verdict.NOT_SOLVABLE
    else:
        verdict = Verdict.BOUNDARY
    w = (A_k / lhs, B_k / lhs) if lhs > 0 else None
    return SolvabilityReport(
        n=mode.n, m=mode.m, rank=mode.rank, radius=float(a), A_k=A_k, B_k=B_k, J_nm=J_nm,
        g_plus=nl.g_plus, g_minus=nl.g_minus, lhs=lhs, rhs=rhs, verdict=verdict,
        margin=rhs - lhs, epsilon=lhs - rhs, tie_tol=tol,
        no_steady_states=verdict is Verdict.NOT_SOLVABLE, w_k_coefficients=w,
    )


def check_solvability(f: Expr, nl: Nonlinearity, mode: EigenMode, a: float,
                      tie_tol: float | None = None, radial_order: int = DEFAULT_RADIAL_ORDER,
                      angular_order: int = DEFAULT_ANGULAR_ORDER) -> SolvabilityReport:
    """Decide solvability at resonance with the mode's double eigenvalue.

    Solvable iff sqrt(A_k^2 + B_k^2) < J_nm (g_plus - g_minus). The strict
    inequality is undecidable within ``tie_tol`` (default
    ``1e-7 * max(1, rhs)``), where the verdict is ``Boundary``. A
    ``NotSolvable`` verdict also means the heat flow has no steady state and
    drifts at rate ``epsilon = lhs - rhs``.
    """
    _require_double(mode)
    A_k, B_k = project(f, mode, a, radial_order, angular_order)
    J_nm = compute_jnm(mode.n, mode.m, a)
    return solvability_from_projections(A_k, B_k, J_nm, nl, mode, a, tie_tol)


@dataclass(frozen=True)
class DirectionScan:
    """Sampled values of int f w - [g+ int_{w>0} w + g- int_{w<0} w] over unit directions."""

    angles: np.ndarray
    values: np.ndarray

    @property
    def maximum(self) -> float:
        return float(np.max(self.values))

    @property
    def argmax_angle(self) -> float:
        return float(self.angles[int(np.argmax(self.values))])


def direction_scan(f: Expr, nl: Nonlinearity, mode: EigenMode, a: float, samples: int,
                       radial_panels: int = BRUTE_RADIAL_PANELS,
                       angular_order: int | None = None) -> DirectionScan:
    """Check the general Landesman-Lazer inequality on sampled eigenspace directions.

    Every term is computed by direct quadrature over the disc (sign sets
    resolved at the nodes), without using A_k, B_k or J_nm. The condition
    holds on the samples iff ``scan.maximum < 0``.
    """
    _require_double(mode)
    if samples < 1:
        raise ValueError("need at least one sample direction")
    basis = EigenPairBasis(mode, a)
    grid = disc_grid(a, DEFAULT_RADIAL_ORDER, DEFAULT_ANGULAR_ORDER)
    fv = evaluate_polar(f, grid.R, grid.THETA)
    angles = 2.0 * np.pi * np.arange(samples) / samples
    values = np.empty(samples)
    for i, t in enumerate(angles):
        A, B = math.cos(t), math.sin(t)
        fw = grid.integrate(fv * basis.combination(A, B)(grid.R, grid.THETA))
        pos, neg = eigenspace_integrals(mode, A, B, a, radial_panels, angular_order)
        values[i] = fw - (nl.g_plus * pos + nl.g_minus * neg)
    return DirectionScan(angles, values)


def mode_for(n: int, m: int, a: float) -> EigenMode:
    mode = mode_from_indices(n, m, a)
    _require_double(mode)
    return mode
