import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resodisc.disc_spectrum import mode_from_indices, mode_from_rank
from resodisc.exprlang import Nonlinearity, parse
from resodisc.quadrature import disc_grid
from resodisc.resonance import check_solvability, compute_jnm, eigenfunction_norm_sq
from resodisc.spectral_solver import (
    FourierBesselBasis,
    GalerkinProblem,
    SpectralField,
    galerkin_residual,
    solve,
)

ALPHA_12 = 7.015586669815619
PHI_6 = f"besselj(1, {ALPHA_12!r}*r)*cos(theta)"
NL = Nonlinearity.from_source("u/sqrt(u^2+1)", 1.0, -1.0)
ZERO_G = Nonlinearity.from_source("0", 1.0, -1.0)
MODE = mode_from_rank(6, 1.0)


@pytest.fixture(scope="module")
def small_basis():
    return FourierBesselBasis(1.0, 3, 3)


def test_basis_layout(small_basis):
    assert len(small_basis) == 3 + 3 * 3 * 2
    assert (0, 1, "sin") not in small_basis.index
    assert small_basis.elements[0] == (0, 1, "cos")


def test_basis_orthonormal(small_basis):
    grid = small_basis.default_grid()
    E = small_basis.on_grid(grid)
    gram = (E * grid.weights.reshape(-1)) @ E.T
    assert np.max(np.abs(gram - np.eye(len(small_basis)))) < 1e-12


def test_evaluate_matches_on_grid(small_basis):
    grid = disc_grid(1.0, 8, 6)
    assert np.allclose(small_basis.evaluate(grid.R, grid.THETA).reshape(len(small_basis), -1),
                       small_basis.on_grid(grid), atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_field_vanishes_on_boundary_and_parseval(seed):
    basis = FourierBesselBasis(1.3, 3, 3)
    c = np.random.default_rng(seed).standard_normal(len(basis))
    u = SpectralField(basis, c)
    theta = np.linspace(0, 2 * np.pi, 37)
    assert np.max(np.abs(u(1.3, theta))) < 1e-10
    assert u.l2_norm() == pytest.approx(float(np.linalg.norm(c)), abs=1e-8)


def test_lam_floor_keeps_resonant_pair_and_above():
    basis = FourierBesselBasis(1.0, 8, 8, lam_floor=MODE.lam)
    assert (1, 2, "cos") in basis.index and (1, 2, "sin") in basis.index
    assert (0, 1, "cos") not in basis.index and (3, 1, "sin") not in basis.index
    assert np.all(basis.eigenvalues >= MODE.lam * (1 - 1e-12))
    with pytest.raises(ValueError):
        FourierBesselBasis(1.0, 1, 1, lam_floor=1e6)


def test_field_rejects_wrong_length(small_basis):
    with pytest.raises(ValueError):
        SpectralField(small_basis, np.zeros(3))


def test_projection_of_expression(small_basis):
    u = SpectralField.from_expression(small_basis, parse(PHI_6))
    expected = math.sqrt(eigenfunction_norm_sq(1, 2, 1.0))
    assert u.coefficient(1, 2) == pytest.approx(expected, abs=1e-12)
    others = np.delete(u.coefficients, small_basis.index[(1, 2, "cos")])
    assert np.max(np.abs(others)) < 1e-12


def test_residual_trivial_examples(small_basis):
    c = np.zeros(len(small_basis))
    assert np.all(galerkin_residual(c, parse("0"), ZERO_G, MODE, small_basis) == 0)
    norm = math.sqrt(eigenfunction_norm_sq(1, 2, 1.0))
    res = galerkin_residual(c, parse(f"{PHI_6}/{norm!r}"), ZERO_G, MODE, small_basis)
    want = np.zeros(len(small_basis))
    want[small_basis.index[(1, 2, "cos")]] = -1.0
    assert np.max(np.abs(res - want)) < 1e-12


def test_residual_linear_part(small_basis):
    c = np.random.default_rng(3).standard_normal(len(small_basis))
    res = galerkin_residual(c, parse("0"), ZERO_G, MODE, small_basis)
    assert np.allclose(res, (MODE.lam - small_basis.eigenvalues) * c, rtol=0, atol=1e-10)


def test_jacobian_matches_finite_differences(small_basis):
    prob = GalerkinProblem(parse("0.3*x*exp(y) + 0.1"), NL, MODE, small_basis)
    for seed in range(3):
        c = 0.4 * np.random.default_rng(seed).standard_normal(len(small_basis))
        assert np.max(np.abs(prob.jacobian_fd(c) - prob.jacobian_linearized(c))) < 1e-5


def test_problem_requires_resonant_pair():
    with pytest.raises(ValueError):
        GalerkinProblem(parse("0"), NL, MODE, FourierBesselBasis(1.0, 0, 4))
    with pytest.raises(ValueError):
        GalerkinProblem(parse("0"), NL, mode_from_indices(0, 2, 1.0), FourierBesselBasis(1.0, 2, 2))


def test_zero_forcing_solves_to_zero():
    out = solve(parse("0"), NL, MODE, 1.0, truncation=(3, 3))
    assert out.converged and out.residual_norm == 0.0
    assert np.all(out.field.coefficients == 0)
    assert out.seed == 0 and out.identity_gap == 0.0


@pytest.fixture(scope="module")
def solvable_outcome():
    return solve(parse(f"0.1*{PHI_6}"), NL, MODE, 1.0)


def test_solvable_instance_converges(solvable_outcome):
    out = solvable_outcome
    assert out.converged
    assert out.residual_norm <= 1e-8
    assert out.identity_gap <= 1e-7
    A = out.identity["A_k"]
    assert A == pytest.approx(0.1 * eigenfunction_norm_sq(1, 2, 1.0), abs=1e-12)
    assert A < 2 * compute_jnm(1, 2)


def test_truncation_robustness(solvable_outcome):
    other = solve(parse(f"0.1*{PHI_6}"), NL, MODE, 1.0, truncation=(6, 6))
    for parity in ("cos", "sin"):
        assert other.field.coefficient(1, 2, parity) == pytest.approx(
            solvable_outcome.field.coefficient(1, 2, parity), abs=1e-4)


def test_outcome_serialises(solvable_outcome):
    d = solvable_outcome.to_dict()
    assert d["converged"] is True
    assert len(d["field"]["coefficients"]) == len(d["field"]["basis"])


def test_solve_is_deterministic():
    f = parse("0.05*x + 0.02*y^2")
    a = solve(f, NL, MODE, 1.0, truncation=(3, 3), restarts=2, seed=1)
    b = solve(f, NL, MODE, 1.0, truncation=(3, 3), restarts=2, seed=1)
    assert np.array_equal(a.field.coefficients, b.field.coefficients)
    assert a.attempts == b.attempts


def test_not_solvable_instance_never_converges():
    c = 4 * compute_jnm(1, 2) / eigenfunction_norm_sq(1, 2, 1.0)
    f = parse(f"{c!r}*{PHI_6}")
    assert check_solvability(f, NL, MODE, 1.0).verdict.value == "NotSolvable"
    out = solve(f, NL, MODE, 1.0, truncation=(4, 4), max_iter=25)
    assert not out.converged
    assert [a.seed for a in out.attempts] == [0, 1, 2, 3, 4]
    assert all(not a.converged for a in out.attempts)
    assert out.identity_gap is None
