import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from resodisc.disc_spectrum import mode_from_indices, mode_from_rank
from resodisc.exprlang import Nonlinearity, parse, rotate_forcing
from resodisc.resonance import (
    EigenPairBasis,
    Verdict,
    angular_mass,
    check_solvability,
    compute_jnm,
    default_tie_tol,
    eigenfunction_norm_sq,
    eigenspace_integrals,
    project,
    solvability_from_projections,
    direction_scan,
)

ALPHA_12 = 7.015586669815619
PHI_6 = f"besselj(1, {ALPHA_12!r}*r)*cos(theta)"
NL = Nonlinearity.from_source("u/sqrt(u^2+1)", 1.0, -1.0)


def _jnm_oracle(n, m, a=1.0):
    zs = special.jn_zeros(n, m)
    alpha = zs[-1]
    val, _ = integrate.quad(lambda r: abs(special.jv(n, alpha * r / a)) * r, 0.0, a,
                            points=list(a * zs[:-1] / alpha) or None, epsabs=1e-14, limit=200)
    return 2.0 * val


def test_jnm_unit_example_value():
    assert compute_jnm(1, 2) == pytest.approx(0.260759, abs=1e-5)


@pytest.mark.parametrize("n,m", [(1, 1), (1, 2), (2, 1), (2, 3), (3, 2), (5, 4), (8, 6)])
def test_jnm_against_quad_oracle(n, m):
    assert compute_jnm(n, m) == pytest.approx(_jnm_oracle(n, m), abs=1e-12)


def test_jnm_scales_with_area():
    assert compute_jnm(2, 2, 3.0) == pytest.approx(9.0 * compute_jnm(2, 2, 1.0), rel=1e-13)


def test_jnm_rejects_radial_modes():
    with pytest.raises(ValueError):
        compute_jnm(0, 2)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 6), delta=st.floats(-10.0, 10.0))
def test_angular_mass_is_plus_minus_two(n, delta):
    pos, neg = angular_mass(n, delta)
    assert pos == pytest.approx(2.0, abs=1e-10)
    assert neg == pytest.approx(-2.0, abs=1e-10)


def test_norm_closed_form_against_quad():
    for n, m in [(1, 2), (2, 1), (3, 3)]:
        alpha = special.jn_zeros(n, m)[-1]
        radial, _ = integrate.quad(lambda r: special.jv(n, alpha * r) ** 2 * r, 0, 1, epsabs=1e-15, limit=200)
        assert eigenfunction_norm_sq(n, m, 1.0) == pytest.approx(math.pi * radial, rel=1e-12)
    assert eigenfunction_norm_sq(1, 2, 1.0) == pytest.approx(0.14148078464380634, rel=1e-13)


def test_eigenspace_integrals_independent_of_direction():
    mode = mode_from_indices(1, 2, 1.0)
    jnm = compute_jnm(1, 2)
    for t in (0.0, 0.9, 2.5):
        pos, neg = eigenspace_integrals(mode, math.cos(t), math.sin(t), 1.0)
        assert pos == pytest.approx(jnm, abs=1e-6)
        assert neg == pytest.approx(-jnm, abs=1e-6)


def test_eigenspace_integrals_need_unit_direction():
    with pytest.raises(ValueError):
        eigenspace_integrals(mode_from_indices(1, 2, 1.0), 1.0, 1.0, 1.0)


def test_radial_modes_rejected():
    with pytest.raises(ValueError):
        EigenPairBasis(mode_from_indices(0, 2, 1.0), 1.0)
    with pytest.raises(ValueError):
        project(parse("x"), mode_from_rank(4, 1.0), 1.0)


def test_projection_of_eigenfunction_is_its_norm():
    mode = mode_from_rank(6, 1.0)
    A, B = project(parse(PHI_6), mode, 1.0)
    assert A == pytest.approx(eigenfunction_norm_sq(1, 2, 1.0), abs=1e-13)
    assert abs(B) < 1e-14


def test_projection_against_dblquad_oracle():
    f = lambda r, t: np.exp(r * np.cos(t) - 0.3 * r * np.sin(t))
    ref, _ = integrate.dblquad(lambda r, t: f(r, t) * special.jv(1, ALPHA_12 * r) * np.sin(t) * r,
                               0, 2 * math.pi, 0, 1, epsabs=1e-13)
    _, B = project(parse("exp(x - 0.3*y)"), mode_from_rank(6, 1.0), 1.0)
    assert B == pytest.approx(ref, abs=1e-11)


def test_zero_forcing_is_solvable():
    rep = check_solvability(parse("0"), NL, mode_from_rank(6, 1.0), 1.0)
    assert rep.verdict is Verdict.SOLVABLE
    assert rep.lhs == 0.0 and rep.w_k_coefficients is None
    assert rep.rhs == pytest.approx(2 * 0.2607591508593732, abs=1e-13)


def test_large_multiple_of_eigenfunction_is_not_solvable():
    mode = mode_from_rank(6, 1.0)
    c = 4 * compute_jnm(1, 2) / eigenfunction_norm_sq(1, 2, 1.0)
    rep = check_solvability(parse(f"{c!r}*{PHI_6}"), NL, mode, 1.0)
    assert rep.verdict is Verdict.NOT_SOLVABLE
    assert rep.lhs == pytest.approx(2 * rep.rhs, rel=1e-12)
    assert rep.epsilon == pytest.approx(rep.rhs, rel=1e-12)
    assert rep.no_steady_states
    assert rep.w_k_coefficients == pytest.approx((1.0, 0.0), abs=1e-12)


def test_boundary_band():
    mode = mode_from_rank(6, 1.0)
    jnm = compute_jnm(1, 2)
    rhs = 2 * jnm
    tol = default_tie_tol(rhs)
    assert solvability_from_projections(rhs, 0.0, jnm, NL, mode, 1.0).verdict is Verdict.BOUNDARY
    assert solvability_from_projections(rhs - 2 * tol, 0, jnm, NL, mode, 1.0).verdict is Verdict.SOLVABLE
    assert solvability_from_projections(0, rhs + 2 * tol, jnm, NL, mode, 1.0).verdict is Verdict.NOT_SOLVABLE
    wide = solvability_from_projections(rhs * 1.01, 0, jnm, NL, mode, 1.0, tie_tol=0.1)
    assert wide.verdict is Verdict.BOUNDARY


@settings(max_examples=25, deadline=None)
@given(sigma=st.floats(0.0, 2 * math.pi))
def test_report_invariant_under_rotation(sigma):
    mode = mode_from_rank(6, 1.0)
    f = parse("exp(x - 0.3*y) + x*y^2")
    base = check_solvability(f, NL, mode, 1.0)
    rot = check_solvability(rotate_forcing(f, sigma), NL, mode, 1.0)
    assert rot.lhs == pytest.approx(base.lhs, abs=1e-8)
    assert rot.rhs == base.rhs
    assert rot.verdict is base.verdict


def test_report_serialises():
    d = check_solvability(parse("x"), NL, mode_from_rank(6, 1.0), 1.0).to_dict()
    assert d["verdict"] in {"Solvable", "NotSolvable", "Boundary"}
    assert set(d) >= {"A_k", "B_k", "J_nm", "lhs", "rhs", "margin", "tie_tol"}


def test_general_condition_agrees_with_closed_form():
    mode = mode_from_rank(6, 1.0)
    f = parse(f"0.3*{PHI_6} + 0.05*x")
    rep = check_solvability(f, NL, mode, 1.0)
    scan = direction_scan(f, NL, mode, 1.0, samples=32, radial_panels=128, angular_order=1024)
    # the maximum over directions of int f w - J_nm (g+ - g-) is lhs - rhs
    assert scan.maximum == pytest.approx(rep.lhs - rep.rhs, abs=2e-3)
    assert (scan.maximum < 0) == (rep.verdict is Verdict.SOLVABLE)
