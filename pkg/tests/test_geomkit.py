from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kundtflow import geomkit as gk
from kundtflow.errors import DegenerateMetricError, PreconditionError

finite = st.floats(-2.0, 2.0, allow_nan=False)


def euclid(dim):
    return lambda P: np.broadcast_to(np.eye(dim), (P.shape[0], dim, dim)).copy()


def sphere(P):
    G = np.zeros((P.shape[0], 2, 2))
    G[:, 0, 0] = 1.0
    G[:, 1, 1] = np.sin(P[:, 0]) ** 2
    return G


def hyperbolic_base(lam):
    def q(P):
        G = np.zeros((P.shape[0], 2, 2))
        G[:, 0, 0] = 1.0 / (4.0 * lam**2)
        G[:, 1, 1] = np.exp(P[:, 0])
        return G

    return q


def grid2(lo, hi, n=6):
    a = np.linspace(lo, hi, n)
    X, Y = np.meshgrid(a, a, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=1)


def test_fdconfig_validation():
    with pytest.raises(ValueError):
        gk.FDConfig(step=0.0)
    with pytest.raises(ValueError):
        gk.FDConfig(order=3)
    with pytest.raises(ValueError):
        gk.FDConfig(tol=-1.0)


def test_euclidean_christoffel_vanishes():
    P = np.random.default_rng(0).uniform(-1, 1, (10, 3))
    assert np.max(np.abs(gk.christoffel(euclid(3), P))) == 0.0


def test_unit_sphere_ricci_equals_metric():
    P = np.column_stack([np.linspace(0.4, 2.6, 9), np.linspace(-1, 1, 9)])
    R = gk.ricci(sphere, P)
    assert np.max(np.abs(R - sphere(P))) < 1e-7
    assert np.allclose(gk.scalar_curvature(sphere, P), 2.0, atol=1e-7)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_hyperbolic_base_has_curvature_minus_lambda_squared(lam):
    P = grid2(-1.0, 1.0)
    q = hyperbolic_base(lam)
    assert np.max(np.abs(gk.ricci(q, P) + lam**2 * q(P))) < 1e-6
    assert np.allclose(gk.scalar_curvature(q, P), -2.0 * lam**2, atol=1e-6)


def test_metric_compatibility():
    P = np.column_stack([np.linspace(0.4, 2.6, 7), np.zeros(7)])
    assert gk.metric_compatibility_residual(sphere, P) < 1e-9


@given(arrays(float, 6, elements=finite))
def test_exterior_derivative_of_exact_form_vanishes(c):
    def f(P):
        x, y, z = P.T
        return c[0] * x * y + c[1] * np.sin(z) + c[2] * x**3 + c[3] * y * z**2 + c[4] * np.exp(0.3 * x) + c[5]

    P = np.random.default_rng(1).uniform(-1, 1, (5, 3))
    df = lambda Q: gk.partial(f, Q)  # noqa: E731
    assert np.max(np.abs(gk.exterior_derivative(df, P))) < 1e-6 * (1 + np.max(np.abs(c)))


@given(arrays(float, 3, elements=finite), arrays(float, 3, elements=finite))
def test_wedge_and_symmetric_product(a, b):
    W = gk.wedge(a[None], b[None])[0]
    S = gk.sym_product(a[None], b[None])[0]
    assert np.allclose(W, -W.T)
    assert np.allclose(S, S.T)
    assert np.allclose(W + S, 2.0 * np.outer(a, b))


def test_hodge_star_on_the_euclidean_plane():
    P = np.zeros((1, 2))
    dx = np.array([[1.0, 0.0]])
    assert np.allclose(gk.hodge_star_2d(dx, euclid(2), 1, P), [[0.0, 1.0]])
    assert np.allclose(gk.hodge_star_2d(dx, euclid(2), -1, P), [[0.0, -1.0]])
    with pytest.raises(ValueError):
        gk.hodge_star_2d(dx, euclid(2), 0, P)


@given(arrays(float, 2, elements=finite), st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_hodge_star_squares_to_minus_one(w, a, b):
    q = lambda P: np.broadcast_to(np.array([[a, 0.3], [0.3, b]]), (P.shape[0], 2, 2)).copy()  # noqa: E731
    if a * b - 0.09 <= 0.05:
        return
    P = np.zeros((1, 2))
    star = gk.hodge_star_2d(gk.hodge_star_2d(w[None], q, 1, P), q, 1, P)
    assert np.allclose(star, -w[None], atol=1e-12)


def test_hodge_star_needs_riemannian_metric():
    q = lambda P: np.broadcast_to(np.diag([1.0, -1.0]), (P.shape[0], 2, 2)).copy()  # noqa: E731
    with pytest.raises(PreconditionError):
        gk.hodge_star_2d(np.array([[1.0, 0.0]]), q, 1, np.zeros((1, 2)))


def test_rotation_is_killing_in_the_plane():
    X = lambda P: np.column_stack([-P[:, 1], P[:, 0]])  # noqa: E731
    P = grid2(-1.0, 1.0, 4)
    assert np.max(np.abs(gk.lie_derivative_metric(X, euclid(2), P))) < 1e-12


def test_divergence_of_position_field():
    P = np.random.default_rng(2).uniform(-1, 1, (6, 3))
    assert np.allclose(gk.divergence(lambda Q: Q.copy(), euclid(3), P), 3.0, atol=1e-10)


def test_divergence_on_the_sphere():
    # div(d theta) = cot(theta) on the unit sphere
    P = np.column_stack([np.linspace(0.5, 2.5, 5), np.zeros(5)])
    w = lambda Q: np.column_stack([np.ones(Q.shape[0]), np.zeros(Q.shape[0])])  # noqa: E731
    assert np.allclose(gk.divergence(w, sphere, P), 1.0 / np.tan(P[:, 0]), atol=1e-9)


def test_degenerate_metric_is_reported():
    with pytest.raises(DegenerateMetricError):
        gk.inverse_metric(np.zeros((2, 3, 3)))
    deg = lambda P: np.broadcast_to(np.diag([1.0, 0.0]), (P.shape[0], 2, 2)).copy()  # noqa: E731
    with pytest.raises(DegenerateMetricError):
        gk.christoffel(deg, np.zeros((1, 2)))


def test_signature_check():
    mink = gk.MetricField(2, lambda P: np.broadcast_to(np.diag([-1.0, 1.0]), (P.shape[0], 2, 2)).copy(), "lorentzian")
    assert np.all(gk.check_signature(mink, np.zeros((3, 2))))
    riem = gk.MetricField(2, euclid(2))
    assert np.all(gk.check_signature(riem, np.zeros((3, 2))))
    with pytest.raises(ValueError):
        gk.MetricField(2, euclid(2), "split")


def test_partial_axis_matches_full_partial():
    f = lambda P: np.sin(P[:, 0]) * P[:, 1] ** 2 + P[:, 2]  # noqa: E731
    P = np.random.default_rng(3).uniform(-1, 1, (7, 3))
    D = gk.partial(f, P)
    for ax in range(3):
        assert np.allclose(gk.partial_axis(f, P, ax), D[:, ax], atol=1e-14)


def test_second_order_stencil_is_less_accurate():
    f = lambda P: np.exp(P[:, 0])  # noqa: E731
    P = np.array([[0.3]])
    e2 = abs(gk.partial(f, P, gk.FDConfig(order=2))[0, 0] - np.exp(0.3))
    e4 = abs(gk.partial(f, P, gk.FDConfig(order=4))[0, 0] - np.exp(0.3))
    assert e4 < e2 < 1e-5


def test_threaded_sampling_matches_serial(monkeypatch):
    P = np.random.default_rng(4).uniform(-1, 1, (1000, 2))
    fn = lambda Q: gk.ricci(sphere, Q + np.array([1.5, 0.0]))  # noqa: E731
    monkeypatch.setenv("KUNDTFLOW_THREADS", "1")
    serial = gk.map_points(fn, P, chunk=128)
    monkeypatch.setenv("KUNDTFLOW_THREADS", "4")
    assert gk.thread_count() == 4
    threaded = gk.map_points(fn, P, chunk=128)
    assert np.array_equal(serial, threaded)
    monkeypatch.setenv("KUNDTFLOW_THREADS", "lots")
    assert gk.thread_count() == 1
