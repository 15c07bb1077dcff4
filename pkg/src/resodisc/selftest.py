"""Invariant suites run by ``resodisc selftest``.

Each check returns a :class:`CheckResult`; nothing here depends on pytest so
the suite can be run from an installed package.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import besselkit, quadrature
from .disc_spectrum import bourget_check, eigenvalue_gaps, enumerate_eigenvalues, mode_from_indices
from .exprlang import Nonlinearity, parse, pretty, rotate_forcing
from .resonance import (
    angular_mass,
    check_solvability,
    compute_jnm,
    eigenspace_integrals,
)
from .spectral_solver import FourierBesselBasis, GalerkinProblem
from .square_spectrum import multiplicities_upto


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _check(name: str, worst: float, tol: float, what: str = "worst deviation") -> tuple[str, bool, str]:
    return name, bool(worst <= tol), f"{what} {worst:.3e} (tolerance {tol:g})"


def bessel_regimes_agree():
    x = np.linspace(8.0, 12.0, 401)
    worst = max(
        float(np.max(np.abs(besselkit.bessel_j_series(n, x) - besselkit.bessel_j_recurrence(n, x))))
        for n in range(0, 21)
    )
    return _check("bessel series/recurrence crossover", worst, 1e-10)


def bessel_three_term_recurrence():
    worst = 0.0
    x = np.linspace(0.5, 50.0, 500)
    for n in range(1, 11):
        res = besselkit.bessel_j(n - 1, x) + besselkit.bessel_j(n + 1, x) - 2 * n / x * besselkit.bessel_j(n, x)
        worst = max(worst, float(np.max(np.abs(res))))
    return _check("bessel three-term recurrence", worst, 1e-9, "worst residual")


def zero_table_sound():
    table = besselkit.zero_table(8, 8)
    problems = table.invariant_violations()
    bad_brackets = 0
    for (n, m), alpha in table.items():
        if besselkit.bessel_j(n, alpha - 5e-7) * besselkit.bessel_j(n, alpha + 5e-7) >= 0:
            bad_brackets += 1
    ok = not problems and bad_brackets == 0
    return "zero table invariants", ok, f"{len(problems)} invariant violations, {bad_brackets} zeros without a 1e-6 sign-change bracket"


def _test_integrands():
    a1 = besselkit.bessel_zero(1, 1)
    a12 = besselkit.bessel_zero(1, 2)
    return {
        "one": lambda r, t: np.ones_like(r),
        "cos": lambda r, t: np.cos(t),
        "J1^2 cos^2": lambda r, t: besselkit.bessel_j(1, a1 * r) ** 2 * np.cos(t) ** 2,
        "exp(x) y^2": lambda r, t: np.exp(r * np.cos(t)) * (r * np.sin(t)) ** 2,
        "J1(a12 r) cos": lambda r, t: besselkit.bessel_j(1, a12 * r) * np.cos(t) * np.exp(r * np.sin(t)),
    }


def quadrature_grid_convergence():
    worst = 0.0
    for func in _test_integrands().values():
        coarse = quadrature.integrate_disc(func, 1.0, 64, 64)
        fine = quadrature.integrate_disc(func, 1.0, 128, 128)
        worst = max(worst, abs(coarse - fine))
    return _check("quadrature grid convergence", worst, 1e-9, "worst change on doubling")


def sign_partition_signs():
    table = besselkit.zero_table(4, 4)
    wrong = 0
    for n in range(5):
        for m in range(1, 5):
            part = quadrature.sign_partition(n, m, 1.0, table)
            alpha = table[(n, m)]
            for lo, hi, sign in part.intervals():
                r = np.linspace(lo, hi, 102)[1:-1]
                wrong += int(np.sum(np.sign(besselkit.bessel_j(n, alpha * r)) != sign))
    return "sign partition signs", wrong == 0, f"{wrong} misclassified samples"


def spectrum_order():
    modes = enumerate_eigenvalues(1.0, 50)
    gap = min(eigenvalue_gaps(modes))
    big = enumerate_eigenvalues(1.0, 100)[:50]
    stable = [(m.n, m.m) for m in big] == [(m.n, m.m) for m in modes]
    ok = gap > 1e-8 and stable
    return "spectrum ordering", ok, f"smallest gap {gap:.3e}, rank-stable under enlarging: {stable}"


def bourget():
    hits = bourget_check(besselkit.zero_table(6, 6), 1e-6)
    return "distinct zeros across orders", not hits, f"{len(hits)} coincident pairs"


def square_parity():
    counts = multiplicities_upto(5000)
    diag = np.zeros_like(counts, dtype=bool)
    r = np.arange(1, int(math.isqrt(2500)) + 1)
    diag[2 * r * r] = True
    broken = int(np.sum(((counts % 2) == 1) != diag))
    return "square multiplicity parity", broken == 0, f"{broken} N <= 5000 break parity"


PRECEDENCE_VECTORS = {"2+3*4": 14.0, "2^3^2": 512.0, "-2^2": -4.0, "(2+3)*4": 20.0, "2*3^2": 18.0, "8/4/2": 1.0}


def expression_precedence():
    bad = []
    for src, want in PRECEDENCE_VECTORS.items():
        expr = parse(src, frozenset())
        got = expr()
        again = parse(pretty(expr), frozenset())
        if got != want or again != expr:
            bad.append(src)
    return "expression precedence", not bad, f"failing vectors: {bad}" if bad else f"{len(PRECEDENCE_VECTORS)} vectors"


def angular_masses():
    rng = np.random.default_rng(0)
    worst = 0.0
    for n in range(1, 7):
        for delta in rng.uniform(-np.pi, np.pi, 8):
            p, q = angular_mass(n, float(delta))
            worst = max(worst, abs(p - 2), abs(q + 2))
    return _check("angular sign masses", worst, 1e-10)


def eigenspace_vs_jnm():
    worst = 0.0
    for n in range(1, 5):
        for m in range(1, 4):
            mode = mode_from_indices(n, m, 1.0)
            jnm = compute_jnm(n, m, 1.0)
            t = 0.37 * n + 0.11 * m
            p, q = eigenspace_integrals(mode, math.cos(t), math.sin(t), 1.0)
            worst = max(worst, abs(p - jnm), abs(q + jnm))
    return _check("eigenspace integrals vs J_nm", worst, 1e-6)


def _eq18_setup():
    mode = mode_from_indices(1, 2, 1.0)
    nl = Nonlinearity.from_source("u/sqrt(u^2+1)", 1.0, -1.0)
    return mode, nl


def jacobian_agreement():
    mode, nl = _eq18_setup()
    f = parse("0.3*x*exp(y) + 0.1")
    basis = FourierBesselBasis(1.0, 3, 3)
    prob = GalerkinProblem(f, nl, mode, basis)
    c = 0.4 * np.random.default_rng(7).standard_normal(len(basis))
    worst = float(np.max(np.abs(prob.jacobian_fd(c) - prob.jacobian_linearized(c))))
    return _check("Jacobian vs finite differences", worst, 1e-5)


def rotation_invariance():
    mode, nl = _eq18_setup()
    f = parse("exp(x - 0.3*y) + x*y^2 + 0.2*cos(3*theta)")
    base = check_solvability(f, nl, mode, 1.0)
    worst = 0.0
    same_verdict = True
    for sigma in (0.4, 1.7, 4.2):
        rot = check_solvability(rotate_forcing(f, sigma), nl, mode, 1.0)
        worst = max(worst, abs(rot.lhs - base.lhs), abs(rot.rhs - base.rhs), abs(rot.margin - base.margin))
        same_verdict &= rot.verdict == base.verdict
    name, ok, detail = _check("solvability rotation invariance", worst, 1e-8)
    return name, ok and same_verdict, detail + ("" if same_verdict else "; verdict changed")


SUITE: tuple[Callable, ...] = (
    bessel_regimes_agree,
    bessel_three_term_recurrence,
    zero_table_sound,
    quadrature_grid_convergence,
    sign_partition_signs,
    spectrum_order,
    bourget,
    square_parity,
    expression_precedence,
    angular_masses,
    eigenspace_vs_jnm,
    jacobian_agreement,
    rotation_invariance,
)


def run_suite(checks=SUITE) -> list[CheckResult]:
    results = []
    for check in checks:
        start = time.perf_counter()
        try:
            name, ok, detail = check()
        except Exception as exc:  # a crashing check is a failing check
            name, ok, detail = check.__name__, False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name, ok, detail, time.perf_counter() - start))
    return results
