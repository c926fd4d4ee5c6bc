from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kundtflow import cauchy as cy
from kundtflow import geomkit as gk
from kundtflow.errors import ConfigError, NotIntegrableError

seeds = st.integers(0, 2**32 - 1)
groups = st.sampled_from(cy.GROUPS)


def rpair(group, seed, **kw):
    return cy.random_pair(group, np.random.default_rng(seed), **kw)


def test_make_pair_fills_relations_exactly():
    p = cy.make_pair("E11", 1, theta_nn=Fraction(1, 2))
    assert p.exact == (1, Fraction(3, 2), 2, Fraction(-1, 2), Fraction(1, 2))
    p = cy.make_pair("Tau2R", 2, theta_uu=1, theta_nn=3)
    assert (p.ul, p.ll) == (2.0, 0.0)
    p = cy.make_pair("Tau3Mu", 1, theta_ul=Fraction(1, 2), theta_nn=2)
    assert (p.uu, p.ll) == (3.0, 1.0)


def test_make_pair_rejects_bad_input():
    with pytest.raises(ConfigError):
        cy.make_pair("E11", 0, theta_nn=1)
    with pytest.raises(ConfigError):
        cy.make_pair("Tau3Mu", 1, theta_ul=2, theta_nn=1)
    with pytest.raises(ConfigError):
        cy.make_pair("Tau2R", 1, theta_nn=1)
    with pytest.raises(ConfigError):
        cy.make_pair("SU2", 1, theta_nn=1)


def test_complete_pair_auto_and_check():
    p = cy.complete_pair(1.0, ul=2.0, nn=0.5)
    assert cy.classify(p).tag == "E11"
    q = cy.complete_pair(1.0, uu=1.5, ul=2.0, ll=-0.5, nn=0.5, relations="check")
    assert np.array_equal(p.theta, q.theta)
    with pytest.raises(NotIntegrableError):
        cy.complete_pair(1.0, uu=1.0, ul=0.3, ll=0.2, nn=0.1, relations="check")
    with pytest.raises(ConfigError):
        cy.complete_pair(1.0, ul=2.0, relations="sometimes")


def test_float_validation_tolerance():
    p = cy.pair_from_components(1.0, 1.5, 2.0, -0.5, 0.5 + 1e-14)
    cy.validate(p)
    with pytest.raises(NotIntegrableError):
        cy.validate(cy.pair_from_components(1.0, 1.5, 2.0, -0.5, 0.5 + 1e-6))


def test_off_diagonal_theta_is_not_integrable():
    p = cy.CauchyPair(1.0, cy.theta_matrix(1.5, 2.0, -0.5, 0.5, un=0.1))
    with pytest.raises(NotIntegrableError, match="theta_un"):
        cy.validate(p)


@given(groups, seeds)
def test_classify_recovers_the_group(group, seed):
    p = rpair(group, seed)
    gc = cy.classify(p)
    assert gc.tag == group
    if group == "Tau3Mu":
        r = p.ul / p.lam
        assert gc.mu == pytest.approx((1 - r) ** gc.sigma)
        assert abs(1 - r) ** gc.sigma <= 1.0 + 1e-15


def test_tau3_mu_can_be_negative():
    gc = cy.classify(cy.make_pair("Tau3Mu", 1, theta_ul=Fraction(3, 2), theta_nn=1))
    assert gc.sigma == 1 and gc.mu == -0.5


@given(groups, seeds)
def test_structure_constants_satisfy_jacobi_exactly(group, seed):
    p = rpair(group, seed)
    C = cy.structure_constants(p)
    assert np.allclose(C, -np.swapaxes(C, 1, 2))
    assert cy.jacobi_residual(C) < 1e-12


def test_generic_theta_breaks_jacobi():
    # theta_nn off its relation gives a bracket that is not a Lie algebra
    C = cy._structure_unchecked(1.0, cy.theta_matrix(1.5, 2.0, -0.5, 0.9))
    assert cy.jacobi_residual(C) > 1e-3


@given(groups, seeds)
def test_closed_ricci_formula_equals_koszul(group, seed):
    p = rpair(group, seed)
    a = cy.ricci3_koszul(p.lam, p.theta)
    b = cy.ricci3_from_theta(p.lam, p.theta)
    assert np.allclose(a, b, atol=1e-12 * (1 + np.max(np.abs(a))))
    assert np.allclose(a, a.T, atol=1e-12 * (1 + np.max(np.abs(a))))


@given(groups, seeds)
def test_scalar_curvature_routes_agree(group, seed):
    p = rpair(group, seed)
    assert cy.scalar3(p) == pytest.approx(cy.scalar3_formula(p), rel=1e-12, abs=1e-12)


@given(groups, seeds)
def test_hamiltonian_is_minus_twice_the_einstein_residual(group, seed):
    p = rpair(group, seed)
    ex = float(cy.einstein_residual_exact(p))
    assert cy.hamiltonian0(p) == pytest.approx(-2.0 * ex, rel=1e-11, abs=1e-11)
    assert cy.einstein_residual(p) == pytest.approx(ex, rel=1e-12, abs=1e-12)
    assert cy.einstein_factored(p) == cy.einstein_residual_exact(p)


@given(groups, seeds)
def test_momentum_has_only_a_u_component(group, seed):
    p = rpair(group, seed)
    m = cy.momentum_residual(p)
    assert abs(m[cy.L]) < 1e-12 and abs(m[cy.N]) < 1e-12
    # u component is minus the Einstein residual, i.e. half the Hamiltonian
    assert m[cy.U] == pytest.approx(-float(cy.einstein_residual_exact(p)), rel=1e-11, abs=1e-11)
    assert m[cy.U] == pytest.approx(0.5 * cy.hamiltonian0(p), rel=1e-11, abs=1e-11)


def test_einstein_table():
    assert not cy.is_constrained_einstein(cy.make_pair("E11", 1, theta_nn=0))
    assert cy.is_constrained_einstein(cy.make_pair("Tau2R", 1, theta_uu=0, theta_nn=1))
    assert not cy.is_constrained_einstein(cy.make_pair("Tau2R", 1, theta_uu=1, theta_nn=1))
    assert cy.is_constrained_einstein(cy.make_pair("Tau3Mu", 2, theta_ul=3, theta_nn=5))
    assert cy.is_constrained_einstein(cy.make_pair("Tau3Mu", 2, theta_ul=0, theta_nn=-1))
    assert not cy.is_constrained_einstein(cy.make_pair("Tau3Mu", 2, theta_ul=1, theta_nn=-1))


@pytest.mark.parametrize("group", cy.GROUPS)
def test_chart_coframe_realizes_the_differentials(group):
    p = rpair(group, 11, lam=Fraction(1, 2))
    chart = cy.group_chart(p)
    W = cy.exterior_derivative_coeffs(p)
    X = np.random.default_rng(0).uniform(-0.8, 0.8, (6, 3))
    E = chart.coframe(X)
    for a in range(3):
        dE = gk.exterior_derivative(lambda Q, a=a: chart.coframe(Q)[:, a, :], X)
        expect = np.einsum("bc,nbi,ncj->nij", W[a], E, E)
        assert np.max(np.abs(dE - expect)) < 1e-9


@pytest.mark.parametrize("group", cy.GROUPS)
def test_chart_ricci_matches_frame_ricci(group):
    p = rpair(group, 5, lam=Fraction(1, 2))
    chart = cy.group_chart(p)
    X = np.random.default_rng(1).uniform(-0.5, 0.5, (4, 3))
    R = gk.ricci(chart.metric, X)
    E = chart.coframe(X)
    expect = np.einsum("nai,ab,nbj->nij", E, cy.ricci3(p), E)
    assert np.max(np.abs(R - expect)) < 1e-6 * (1 + np.max(np.abs(expect)))


def test_chart_is_identity_at_origin():
    p = cy.make_pair("Tau2R", 1, theta_uu=1, theta_nn=2)
    assert np.allclose(cy.group_chart(p).coframe(np.zeros((1, 3)))[0], np.eye(3))


def test_batched_curvature_matches_single():
    ps = [rpair(g, s) for g in cy.GROUPS for s in range(4)]
    lam = 0.75
    th = np.array([cy.pair_from_components(lam, *p.components()).theta for p in ps])
    batch = cy.ricci3_from_theta(lam, th)
    for i in range(len(ps)):
        assert np.allclose(batch[i], cy.ricci3_from_theta(lam, th[i]))
    H = cy.hamiltonian_from_theta(lam, th)
    assert H.shape == (len(ps),)
    assert isinstance(cy.hamiltonian_from_theta(lam, th[0]), float)
