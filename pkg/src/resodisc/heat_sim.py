"""Semi-implicit spectral time stepping of u_t = Delta u + lambda_k u + g(u) - f.

Per basis element the linear part (lambda_k - lambda_j) is implicit and the
projection of g(u) - f is explicit:

    c_j <- (c_j + dt <g(u) - f, e_j>) / (1 + dt (lambda_j - lambda_k)).

The drift functional is H(t) = int u w_k with
w_k = (A_k phi_k + B_k psi_k) / sqrt(A_k^2 + B_k^2). Since |g| is bounded by
the declared limits, H'(t) <= J_nm (g_plus - g_minus) - sqrt(A_k^2 + B_k^2),
so H decreases at least linearly when the projection of f is too large.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .disc_spectrum import EigenMode
from .errors import NumericalError
from .exprlang import Expr, Nonlinearity
from .resonance import compute_jnm
from .spectral_solver import FourierBesselBasis, GalerkinProblem, SpectralField

__all__ = ["HeatStepper", "HeatTrace", "default_dt", "run", "step"]

DRIFT_SLACK = 0.9
TRANSIENT_STEPS = 5


class StepRejected(NumericalError):
    """The implicit denominators are not all positive for this dt."""


def default_dt(basis: FourierBesselBasis, mode: EigenMode, nl: Nonlinearity) -> float:
    """0.1 / (lambda_max - lambda_k + L_g), capped by the positivity bound 1 / (lambda_k - lambda_1)."""
    lam_k = mode.alpha**2 / basis.a**2
    lam = basis.eigenvalues
    dt = 0.1 / (float(np.max(lam)) - lam_k + nl.lipschitz_estimate())
    gap = lam_k - float(np.min(lam))
    if gap > 0:
        dt = min(dt, 0.5 / gap)
    return dt


class HeatStepper:
    """Precomputed projections for repeated steps on one basis."""

    def __init__(self, f: Expr, nl: Nonlinearity, mode: EigenMode, basis: FourierBesselBasis):
        self.problem = GalerkinProblem(f, nl, mode, basis)
        self.basis = basis

    def denominators(self, dt: float) -> np.ndarray:
        return 1.0 - dt * self.problem.linear

    def advance(self, c: np.ndarray, dt: float) -> np.ndarray:
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt}")
        den = self.denominators(dt)
        if np.any(den <= 0):
            lam_1 = float(np.min(self.basis.eigenvalues))
            raise StepRejected(
                f"dt={dt:g} gives a non-positive implicit denominator; need dt < "
                f"{1.0 / (self.problem.lam_k - lam_1):g}"
            )
        return (c + dt * self.problem.nonlinear_projection(c)) / den

    def rhs(self, c: np.ndarray) -> np.ndarray:
        """Semi-discrete right-hand side dc/dt (the Galerkin residual)."""
        return self.problem.residual(c)

    def drift_direction(self) -> tuple[float, float, float]:
        """(A_k, B_k, lhs) on the stepper's grid."""
        A_k, B_k = self.problem.resonant_projections()
        return A_k, B_k, math.hypot(A_k, B_k)

    def H(self, c: np.ndarray) -> float:
        A_k, B_k, lhs = self.drift_direction()
        ca, cb = (A_k / lhs, B_k / lhs) if lhs > 0 else (1.0, 0.0)
        p = self.problem
        return p.resonant_norm * (ca * c[..., p.i_cos] + cb * c[..., p.i_sin])

    def g_drift_term(self, c: np.ndarray) -> float:
        """Integral of g(u) w_k."""
        A_k, B_k, lhs = self.drift_direction()
        ca, cb = (A_k / lhs, B_k / lhs) if lhs > 0 else (1.0, 0.0)
        gA, gB = self.problem.g_projections(c)
        return ca * gA + cb * gB


def step(field: SpectralField, f: Expr, nl: Nonlinearity, mode: EigenMode, dt: float) -> SpectralField:
    """One semi-implicit step from ``field``."""
    stepper = HeatStepper(f, nl, mode, field.basis)
    return SpectralField(field.basis, stepper.advance(np.asarray(field.coefficients), dt))


@dataclass(frozen=True, eq=False)
class HeatTrace:
    times: np.ndarray
    H_values: np.ndarray
    epsilon: float
    dt: float
    final_field: SpectralField
    bound_excess: float | None = None

    def drift_violations(self, slack: float = DRIFT_SLACK, transient: int = TRANSIENT_STEPS) -> np.ndarray:
        """Indices i past the transient where H(t_i) > H(0) - slack * epsilon * t_i."""
        if not self.epsilon > 0:
            return np.array([], dtype=int)
        limit = self.H_values[0] - slack * self.epsilon * self.times
        late = self.times >= transient * self.dt * (1 - 1e-12)
        return np.flatnonzero(late & (self.H_values > limit))

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "H"])
            for t, h in zip(self.times, self.H_values):
                writer.writerow([format(float(t), ".17g"), format(float(h), ".17g")])


def run(f: Expr, nl: Nonlinearity, mode: EigenMode, u0: SpectralField, dt: float | None = None,
        t_end: float = 1.0, check_bound: bool = False, enforce_drift: bool = True) -> HeatTrace:
    """Integrate from ``u0`` to ``t_end`` and record H after every step.

    ``epsilon = lhs - rhs`` is computed from the resonance quantities; when it
    is positive and ``enforce_drift`` is set, a trace breaking
    H(t) <= H(0) - 0.9 epsilon t beyond the first five steps raises
    :class:`NumericalError`. With ``check_bound``, the largest value of
    int g(u) w_k - J_nm (g_plus - g_minus) seen over the run is recorded.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    basis = u0.basis
    stepper = HeatStepper(f, nl, mode, basis)
    if dt is None:
        dt = default_dt(basis, mode, nl)
    J_nm = compute_jnm(mode.n, mode.m, basis.a)
    rhs = J_nm * nl.spread
    lhs = stepper.drift_direction()[2]
    epsilon = lhs - rhs

    steps = int(math.ceil(t_end / dt - 1e-9))
    times = dt * np.arange(steps + 1)
    H = np.empty(steps + 1)
    c = np.array(u0.coefficients, dtype=float)
    H[0] = stepper.H(c)
    excess = -math.inf
    with np.errstate(all="ignore"):
        for i in range(1, steps + 1):
            if check_bound:
                excess = max(excess, stepper.g_drift_term(c) - rhs)
            try:
                c = stepper.advance(c, dt)
            except ArithmeticError as exc:
                raise NumericalError(f"evaluation failed at t={times[i]:.17g}: {exc}") from exc
            if not np.all(np.isfinite(c)):
                raise NumericalError(f"non-finite field at t={times[i]:.17g}")
            H[i] = stepper.H(c)
    trace = HeatTrace(times, H, epsilon, dt, SpectralField(basis, c), excess if check_bound else None)
    if enforce_drift and epsilon > 0:
        bad = trace.drift_violations()
        if bad.size:
            i = int(bad[0])
            raise NumericalError(
                f"drift bound broken at t={times[i]:.17g}: H={H[i]:.17g} > "
                f"{H[0] - DRIFT_SLACK * epsilon * times[i]:.17g}"
            )
    return trace
