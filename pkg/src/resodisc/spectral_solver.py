"""Fourier-Bessel Galerkin solver for Delta u + lambda_k u + g(u) = f on B_a.

The trial space is spanned by the L2-normalised Dirichlet eigenfunctions

    e_(n,m,cos) = J_n(alpha_{n,m} r / a) cos(n theta) / norm,
    e_(n,m,sin) = J_n(alpha_{n,m} r / a) sin(n theta) / norm,

for 0 <= n <= n_max, 1 <= m <= m_max (no sine for n = 0). Since
Delta e_j = -lambda_j e_j, the Galerkin equations are

    R_j(c) = (lambda_k - lambda_j) c_j + <g(u_c) - f, e_j> = 0.

For the resonant pair the linear part vanishes, so R_j(c) = 0 there is the
discrete form of <f, e_j> = <g(u), e_j>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .besselkit import bessel_j, bessel_zero
from .disc_spectrum import EigenMode
from .errors import NumericalError
from .exprlang import Expr, Nonlinearity, evaluate_polar
from .quadrature import DiscGrid, disc_grid
from .resonance import project

__all__ = [
    "FourierBesselBasis",
    "SpectralField",
    "GalerkinProblem",
    "SolveOutcome",
    "Attempt",
    "galerkin_residual",
    "solve",
]

DEFAULT_TRUNCATION = (8, 8)
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 40
DEFAULT_RESTARTS = 5


class FourierBesselBasis:
    """Ordered, L2-normalised Dirichlet eigenfunctions of the disc.

    Parameters
    ----------
    a : float
        Disc radius.
    n_max, m_max : int
        Angular and radial truncation.
    lam_floor : float, optional
        Drop every element whose eigenvalue lies below this value. Used to
        restrict heat flows to the resonant pair and the modes above it,
        since modes below resonance grow exponentially.
    """

    def __init__(self, a: float, n_max: int, m_max: int, lam_floor: float | None = None):
        if not a > 0:
            raise ValueError(f"disc radius must be positive, got {a}")
        if n_max < 0 or m_max < 1:
            raise ValueError(f"invalid truncation ({n_max}, {m_max})")
        self.a = float(a)
        self.n_max = int(n_max)
        self.m_max = int(m_max)
        elements = []
        for n in range(self.n_max + 1):
            for m in range(1, self.m_max + 1):
                elements.append((n, m, "cos"))
                if n > 0:
                    elements.append((n, m, "sin"))
        if lam_floor is not None:
            cut = lam_floor * (1.0 - 1e-12) * self.a**2
            elements = [e for e in elements if bessel_zero(e[0], e[1]) ** 2 >= cut]
            if not elements:
                raise ValueError(f"no basis element has eigenvalue >= {lam_floor}")
        self.lam_floor = lam_floor
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        self.alphas = np.array([bessel_zero(n, m) for n, m, _ in self.elements])
        self.eigenvalues = self.alphas**2 / self.a**2
        # ||J_n(alpha r/a) trig(n theta)||^2 = (pi or 2 pi) * a^2/2 * J_{n+1}(alpha)^2
        ang = np.array([2.0 * math.pi if n == 0 else math.pi for n, _, _ in self.elements])
        jn1 = np.array([bessel_j(n + 1, al) for (n, _, _), al in zip(self.elements, self.alphas)])
        self.norms = np.sqrt(ang * 0.5 * self.a**2 * jn1**2)

    def __len__(self) -> int:
        return len(self.elements)

    def __eq__(self, other) -> bool:
        return isinstance(other, FourierBesselBasis) and (self.a, self.elements) == (other.a, other.elements)

    def __hash__(self) -> int:
        return hash((self.a, self.elements))

    def __repr__(self) -> str:
        extra = "" if self.lam_floor is None else f", lam_floor={self.lam_floor}"
        return f"FourierBesselBasis(a={self.a}, n_max={self.n_max}, m_max={self.m_max}{extra})"

    def default_grid(self) -> DiscGrid:
        # enough nodes that <e_i, e_j> and the projections of g(u) are
        # resolved well below the solver tolerance
        radial = max(64, 4 * self.m_max + self.n_max + 32)
        angular = max(64, 6 * self.n_max + 16)
        return disc_grid(self.a, radial, angular)

    def evaluate(self, r, theta) -> np.ndarray:
        """Basis values, shape ``(len(self),) + broadcast(r, theta).shape``."""
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        shape = np.broadcast_shapes(r.shape, theta.shape)
        out = np.empty((len(self),) + shape)
        for i, (n, m, parity) in enumerate(self.elements):
            radial = bessel_j(n, self.alphas[i] * r / self.a)
            trig = np.cos(n * theta) if parity == "cos" else np.sin(n * theta)
            out[i] = radial * trig / self.norms[i]
        return out

    def on_grid(self, grid: DiscGrid) -> np.ndarray:
        """Basis sampled on a tensor grid, shape ``(len(self), nr * ntheta)``.

        Radial factors are evaluated once per (n, m) on the 1-D radial nodes.
        """
        nr, nt = grid.shape
        out = np.empty((len(self), nr, nt))
        cache: dict[tuple[int, int], np.ndarray] = {}
        for i, (n, m, parity) in enumerate(self.elements):
            if (n, m) not in cache:
                cache[(n, m)] = bessel_j(n, self.alphas[i] * grid.r / self.a)
            trig = np.cos(n * grid.theta) if parity == "cos" else np.sin(n * grid.theta)
            out[i] = np.outer(cache[(n, m)], trig) / self.norms[i]
        return out.reshape(len(self), nr * nt)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """u(x, y) = sum_j coefficients[j] * e_j on the disc."""

    basis: FourierBesselBasis
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (len(self.basis),):
            raise ValueError(f"expected {len(self.basis)} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def a(self) -> float:
        return self.basis.a

    @classmethod
    def zeros(cls, basis: FourierBesselBasis) -> "SpectralField":
        return cls(basis, np.zeros(len(basis)))

    @classmethod
    def from_expression(cls, basis: FourierBesselBasis, expr: Expr, grid: DiscGrid | None = None) -> "SpectralField":
        """L2 projection of an expression in x, y, r, theta onto the basis."""
        grid = grid or basis.default_grid()
        values = evaluate_polar(expr, grid.R, grid.THETA).reshape(-1)
        E = basis.on_grid(grid)
        return cls(basis, E @ (values * grid.weights.reshape(-1)))

    def coefficient(self, n: int, m: int, parity: str = "cos") -> float:
        return float(self.coefficients[self.basis.index[(n, m, parity)]])

    def __call__(self, r, theta):
        vals = self.basis.evaluate(r, theta)
        return np.tensordot(self.coefficients, vals, axes=1)

    def l2_norm(self, grid: DiscGrid | None = None) -> float:
        grid = grid or self.basis.default_grid()
        u = self.coefficients @ self.basis.on_grid(grid)
        return math.sqrt(grid.integrate((u * u).reshape(grid.shape)))

    def to_dict(self) -> dict:
        return {
            "radius": self.a,
            "basis": [list(e) for e in self.basis.elements],
            "coefficients": [float(c) for c in self.coefficients],
        }


class GalerkinProblem:
    """Discretised resonant problem on a fixed basis and quadrature grid."""

    def __init__(self, f: Expr, nl: Nonlinearity, mode: EigenMode, basis: FourierBesselBasis,
                 grid: DiscGrid | None = None):
        if mode.n < 1:
            raise ValueError("resonant mode must have n >= 1 (double eigenvalue)")
        for parity in ("cos", "sin"):
            if (mode.n, mode.m, parity) not in basis.index:
                raise ValueError(f"basis lacks resonant element ({mode.n}, {mode.m}, {parity})")
        self.f = f
        self.nl = nl
        self.mode = mode
        self.basis = basis
        self.grid = grid or basis.default_grid()
        self.lam_k = mode.alpha**2 / basis.a**2
        self.E = basis.on_grid(self.grid)
        self.EW = self.E * self.grid.weights.reshape(-1)[None, :]
        fv = np.broadcast_to(evaluate_polar(f, self.grid.R, self.grid.THETA), self.grid.shape)
        self.f_proj = self.EW @ fv.reshape(-1)
        self.linear = self.lam_k - basis.eigenvalues
        self.i_cos = basis.index[(mode.n, mode.m, "cos")]
        self.i_sin = basis.index[(mode.n, mode.m, "sin")]
        self.resonant_norm = float(basis.norms[self.i_cos])

    def field_values(self, c: np.ndarray) -> np.ndarray:
        return c @ self.E

    def nonlinear_projection(self, c: np.ndarray) -> np.ndarray:
        """<g(u_c) - f, e_j> for each basis element; ``c`` may be a stack of rows."""
        return self.nl(c @ self.E) @ self.EW.T - self.f_proj

    def residual(self, c: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        return self.linear * c + self.nonlinear_projection(c)

    def jacobian_fd(self, c: np.ndarray, step: float = 1e-6) -> np.ndarray:
        """Central finite-difference Jacobian, all columns in one batched evaluation."""
        c = np.asarray(c, dtype=float)
        h = step * max(1.0, float(np.max(np.abs(c), initial=0.0)))
        eye = np.eye(c.size) * h
        plus = self.residual(c[None, :] + eye)
        minus = self.residual(c[None, :] - eye)
        return ((plus - minus) / (2.0 * h)).T

    def jacobian_linearized(self, c: np.ndarray) -> np.ndarray:
        """diag(lambda_k - lambda_j) + <g'(u_c) e_i, e_j>, with g' by pointwise central differences."""
        dg = self.nl.derivative(self.field_values(np.asarray(c, dtype=float)))
        return np.diag(self.linear) + (self.EW * dg[None, :]) @ self.E.T

    def resonant_projections(self) -> tuple[float, float]:
        """A_k, B_k (against the unnormalised phi_k, psi_k) on this grid."""
        s = self.resonant_norm
        return s * float(self.f_proj[self.i_cos]), s * float(self.f_proj[self.i_sin])

    def g_projections(self, c: np.ndarray) -> tuple[float, float]:
        """Integrals of g(u_c) phi_k and g(u_c) psi_k."""
        gp = self.nl(self.field_values(c)) @ self.EW[[self.i_cos, self.i_sin]].T
        return self.resonant_norm * float(gp[0]), self.resonant_norm * float(gp[1])


def galerkin_residual(c, f: Expr, nl: Nonlinearity, mode: EigenMode, basis: FourierBesselBasis) -> np.ndarray:
    return GalerkinProblem(f, nl, mode, basis).residual(c)


@dataclass(frozen=True)
class Attempt:
    seed: int
    converged: bool
    iterations: int
    residual_norm: float
    reason: str


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    field: SpectralField
    residual_norm: float
    newton_iterations: int
    converged: bool
    identity_gap: float | None
    seed: int | None
    attempts: tuple[Attempt, ...] = ()
    identity: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "residual_norm": self.residual_norm,
            "newton_iterations": self.newton_iterations,
            "identity_gap": self.identity_gap,
            "seed": self.seed,
            "identity": self.identity,
            "attempts": [a.__dict__.copy() for a in self.attempts],
            "field": self.field.to_dict(),
        }


def _newton(problem: GalerkinProblem, c0: np.ndarray, tol: float, max_iter: int):
    c = c0.copy()
    r = problem.residual(c)
    norm = float(np.linalg.norm(r))
    for it in range(max_iter + 1):
        if not math.isfinite(norm):
            return c, it, norm, "non-finite residual"
        if norm <= tol:
            return c, it, norm, "converged"
        if it == max_iter:
            break
        jac = problem.jacobian_fd(c)
        try:
            dx = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(jac, -r, rcond=None)[0]
        t = 1.0
        while t > 1e-10:
            trial = c + t * dx
            r_trial = problem.residual(trial)
            n_trial = float(np.linalg.norm(r_trial))
            if math.isfinite(n_trial) and n_trial <= (1.0 - 1e-4 * t) * norm:
                break
            t *= 0.5
        else:
            return c, it, norm, "line search stalled"
        c, r, norm = trial, r_trial, n_trial
    return c, max_iter, norm, "iteration cap reached"


def solve(f: Expr, nl: Nonlinearity, mode: EigenMode, a: float,
          truncation: tuple[int, int] = DEFAULT_TRUNCATION, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER, restarts: int = DEFAULT_RESTARTS,
          init_scale: float = 0.5, seed: int = 0) -> SolveOutcome:
    """Damped Newton on the Galerkin equations with seeded restarts.

    Attempt ``i`` uses seed ``seed + i``; the attempt with seed 0 starts from
    u = 0, the others from Gaussian coefficients of size ``init_scale``.
    The first converged attempt in seed order is returned. On convergence the
    necessity identities A_k = int g(u) phi_k and B_k = int g(u) psi_k are
    checked, and their worst violation is reported as ``identity_gap``.

    Non-convergence on every attempt is evidence of nonexistence, not proof.
    """
    basis = FourierBesselBasis(a, *truncation)
    problem = GalerkinProblem(f, nl, mode, basis)
    attempts = []
    best = None
    for i in range(max(1, restarts)):
        s = seed + i
        if s == 0:
            c0 = np.zeros(len(basis))
        else:
            c0 = init_scale * np.random.default_rng(s).standard_normal(len(basis))
        with np.errstate(all="ignore"):
            try:
                c, iters, norm, reason = _newton(problem, c0, tol, max_iter)
            except (ArithmeticError, NumericalError) as exc:
                c, iters, norm, reason = c0, 0, math.inf, f"evaluation failed: {exc}"
        ok = reason == "converged"
        attempts.append(Attempt(s, ok, iters, norm, reason))
        if best is None or (ok and not best[0]) or (not best[0] and norm < best[3]):
            best = (ok, c, iters, norm, s)
        if ok:
            break
    ok, c, iters, norm, s = best
    field_ = SpectralField(basis, c if np.all(np.isfinite(c)) else np.zeros(len(basis)))
    gap = None
    identity = {}
    if ok:
        A_k, B_k = project(f, mode, a)
        gA, gB = problem.g_projections(c)
        gap = max(abs(A_k - gA), abs(B_k - gB))
        identity = {"A_k": A_k, "B_k": B_k, "int_g_phi": gA, "int_g_psi": gB}
    return SolveOutcome(field_, norm, iters, ok, gap, s if ok else None, tuple(attempts), identity)
