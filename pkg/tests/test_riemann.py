"""Christoffel/curvature backend against closed forms and classical identities."""

import math

import numpy as np
import pytest

from finsler_solitons import generators, jets, riemann
from finsler_solitons.riemann import (MetricDomainError, RiemannMetric,
                                      ScalarField, VectorField,
                                      christoffel, conformal_residual,
                                      covariant_derivative_1form,
                                      euclidean_metric, gradient_table,
                                      hessian, hessian_tensor, lie_1form,
                                      lie_h2, lie_W0,
                                      metric_compatibility_residual,
                                      ricci_tensor, riemann_ricci,
                                      vector_covariant_lowered)

RNG = np.random.default_rng(11)


def cigar_metric():
    return RiemannMetric(2, lambda x: [[1.0, 0.0], [0.0, jets.tanh(x[0]) ** 2]],
                         name="cigar")


def sphere_metric(mu, k):
    def rows(x):
        x2 = 0.0
        for v in x:
            x2 = x2 + v * v
        D = 1.0 + mu * x2
        out = [[None] * k for _ in range(k)]
        for i in range(k):
            for j in range(k):
                val = -mu * x[i] * x[j] / (D * D)
                if i == j:
                    val = val + 1.0 / D
                out[i][j] = val
        return out

    return RiemannMetric(k, rows, name="sphere")


# -- christoffel ------------------------------------------------------------------


def test_christoffel_euclidean_zero():
    gam = christoffel(euclidean_metric(3), [0.3, -0.2, 0.9])
    assert np.max(np.abs(gam)) == 0.0


def test_christoffel_cigar_closed_form():
    t = 1.0
    gam = christoffel(cigar_metric(), [t, 0.4])
    assert gam[0, 1, 1] == pytest.approx(-math.tanh(t) / math.cosh(t) ** 2, rel=1e-12)
    assert gam[1, 0, 1] == pytest.approx(2.0 / math.sinh(2.0 * t), rel=1e-12)
    assert gam[1, 1, 0] == gam[1, 0, 1]
    assert gam[0, 0, 0] == pytest.approx(0.0, abs=1e-14)


def test_christoffel_projective_sphere_closed_form():
    mu = 1.3
    x = RNG.uniform(-0.7, 0.7, size=3)
    gam = christoffel(sphere_metric(mu, 3), x)
    D = 1.0 + mu * float(x @ x)
    want = np.zeros((3, 3, 3))
    for k in range(3):
        for i in range(3):
            for j in range(3):
                want[k, i, j] = -mu / D * (x[i] * (k == j) + x[j] * (k == i))
    np.testing.assert_allclose(gam, want, atol=1e-12)


def test_christoffel_symmetric_lower_indices():
    h = generators.random_riemann_metric(RNG, 3)
    x = generators.sample_box_point(RNG, 3)
    gam = christoffel(h, x)
    np.testing.assert_allclose(gam, np.swapaxes(gam, 1, 2), atol=0.0)


def test_singular_metric_raises():
    bad = RiemannMetric(2, lambda x: [[1.0, 1.0], [1.0, 1.0]], name="degenerate")
    with pytest.raises(MetricDomainError):
        christoffel(bad, [0.0, 0.0])


# -- ricci ------------------------------------------------------------------------


def test_ricci_euclidean_zero():
    y = RNG.normal(size=3)
    assert riemann_ricci(euclidean_metric(3), [0.1, 0.2, 0.3], y) == 0.0


def test_ricci_sphere_constant_curvature():
    # round sphere of curvature mu in dimension 3 = 2m-1 with m = 2
    mu = 1.0
    h = sphere_metric(mu, 3)
    x = RNG.uniform(-0.6, 0.6, size=3)
    y = RNG.normal(size=3)
    h2 = float(y @ h.matrix_at(x) @ y)
    assert riemann_ricci(h, x, y) == pytest.approx(2.0 * mu * h2, rel=1e-10)


def test_ricci_cigar_law():
    h = cigar_metric()
    for t in (0.4, 1.0, 1.7):
        x = [t, 0.2]
        y = RNG.normal(size=2)
        h2 = float(y @ h.matrix_at(x) @ y)
        assert riemann_ricci(h, x, y) == pytest.approx(2.0 / math.cosh(t) ** 2 * h2,
                                                       rel=1e-10)


def test_ricci_quadratic_in_y():
    h = generators.random_riemann_metric(RNG, 3)
    x = generators.sample_box_point(RNG, 3)
    y = RNG.normal(size=3)
    base = riemann_ricci(h, x, y)
    for lam in (0.3, 2.7):
        assert riemann_ricci(h, x, lam * y) == pytest.approx(lam * lam * base,
                                                             rel=1e-12)


# -- covariant derivatives ------------------------------------------------------------


def test_covariant_derivative_constant_form_flat():
    b = VectorField(lambda x: [0.3, -0.4, 0.1])
    out = covariant_derivative_1form(euclidean_metric(3), b, [0.0, 1.0, 2.0])
    assert np.max(np.abs(out)) == 0.0


def test_gradient_form_covariant_derivative_is_symmetric():
    h = generators.random_riemann_metric(RNG, 3)
    f = ScalarField(lambda x: jets.sin(x[0]) * x[1] + jets.exp(0.3 * x[2]))
    df = VectorField(lambda x: [jets.cos(x[0]) * x[1], jets.sin(x[0]),
                                0.3 * jets.exp(0.3 * x[2])])
    x = generators.sample_box_point(RNG, 3)
    bcov = covariant_derivative_1form(h, df, x)
    np.testing.assert_allclose(bcov, bcov.T, atol=1e-12)
    np.testing.assert_allclose(bcov, hessian_tensor(h, f, x), atol=1e-12)


def test_killing_field_covariant_derivative_antisymmetric():
    # sphere Killing field from antisymmetric Q with Qd = 0
    mu = 1.0
    h = sphere_metric(mu, 3)
    Q = np.array([[0.0, 0.5, 0.0], [-0.5, 0.0, 0.0], [0.0, 0.0, 0.0]])
    d = np.array([0.0, 0.0, 0.4])

    def w_fn(x):
        xd = sum(dv * xv for dv, xv in zip(d, x))
        return [d[i] + mu * xd * x[i] + sum(Q[i, j] * x[j] for j in range(3))
                for i in range(3)]

    x = RNG.uniform(-0.5, 0.5, size=3)
    wcov = vector_covariant_lowered(h, VectorField(w_fn), x)
    np.testing.assert_allclose(wcov, -wcov.T, atol=1e-12)
    np.testing.assert_allclose(conformal_residual(h, VectorField(w_fn), 0.0, x),
                               np.zeros((3, 3)), atol=1e-12)


# -- hessian ---------------------------------------------------------------------------


def test_hessian_flat_quadratic():
    rho = 0.8
    f = ScalarField(lambda x: 0.5 * rho * (x[0] * x[0] + x[1] * x[1]))
    y = RNG.normal(size=2)
    got = hessian(euclidean_metric(2), f, [0.4, -0.2], y)
    assert got == pytest.approx(rho * float(y @ y), rel=1e-12)


def test_hessian_cigar_weight():
    h = cigar_metric()
    f = ScalarField(lambda x: -2.0 * jets.log(jets.cosh(x[0])))
    t = 0.9
    y = RNG.normal(size=2)
    h2 = float(y @ h.matrix_at([t, 0.1]) @ y)
    assert hessian(h, f, [t, 0.1], y) == pytest.approx(-2.0 / math.cosh(t) ** 2 * h2,
                                                       rel=1e-10)


def test_hessian_constant_zero():
    assert hessian(euclidean_metric(2), 3.0, [0.1, 0.2], [1.0, 2.0]) == 0.0


def test_hessian_polarization_symmetry():
    h = generators.random_riemann_metric(RNG, 3)
    f = generators.random_scalar_field(RNG, 3)
    x = generators.sample_box_point(RNG, 3)
    y, z = RNG.normal(size=3), RNG.normal(size=3)
    hy = hessian(h, f, x, y)
    hz = hessian(h, f, x, z)
    assert hessian(h, f, x, y + z) + hessian(h, f, x, y - z) == pytest.approx(
        2.0 * hy + 2.0 * hz, rel=1e-10, abs=1e-12)


# -- Lie derivatives -------------------------------------------------------------------


def test_lie_zero_field():
    h = generators.random_riemann_metric(RNG, 2)
    zero = VectorField(lambda x: [0.0, 0.0])
    x = generators.sample_box_point(RNG, 2)
    y = RNG.normal(size=2)
    assert lie_h2(h, zero, x, y) == 0.0
    assert lie_W0(h, generators.random_vector_field(RNG, 2), zero, x, y) == 0.0


def test_lie_killing_rotation_flat():
    h = euclidean_metric(2)
    v = VectorField(lambda x: [-x[1], x[0]])
    for _ in range(5):
        x = generators.sample_box_point(RNG, 2)
        y = RNG.normal(size=2)
        assert lie_h2(h, v, x, y) == pytest.approx(0.0, abs=1e-14)


def test_lie_radial_homothety_flat():
    h = euclidean_metric(2)
    v = VectorField(lambda x: [x[0], x[1]])
    x = generators.sample_box_point(RNG, 2)
    y = RNG.normal(size=2)
    assert lie_h2(h, v, x, y) == pytest.approx(2.0 * float(y @ y), rel=1e-13)


def test_lie_h2_of_gradient_is_twice_hessian():
    h = generators.random_riemann_metric(RNG, 3)
    f = generators.random_scalar_field(RNG, 3)
    grad = gradient_table(h, f)
    for _ in range(5):
        x = generators.sample_box_point(RNG, 3)
        y = RNG.normal(size=3)
        assert lie_h2(h, grad, x, y) == pytest.approx(2.0 * hessian(h, f, x, y),
                                                      rel=1e-10, abs=1e-10)


# -- conformal residuals ----------------------------------------------------------------


def test_conformal_residual_flat_family():
    # W = -2 sigma x + Q x + C is conformal for the flat metric with factor -sigma
    sigma = 0.35
    Q = np.array([[0.0, 0.7], [-0.7, 0.0]])
    C = np.array([0.2, -0.1])
    w = VectorField(lambda x: [-2.0 * sigma * x[i] + Q[i, 0] * x[0] + Q[i, 1] * x[1] + C[i]
                               for i in range(2)])
    x = generators.sample_box_point(RNG, 2)
    res = conformal_residual(euclidean_metric(2), w, -sigma, x)
    np.testing.assert_allclose(res, np.zeros((2, 2)), atol=1e-13)


def test_conformal_residual_zero_field_unit_factor():
    res = conformal_residual(euclidean_metric(3), VectorField(lambda x: [0.0] * 3),
                             1.0, [0.1, 0.2, 0.3])
    np.testing.assert_allclose(res, -4.0 * np.eye(3), atol=0.0)


# -- structural identities ---------------------------------------------------------------


def test_metric_compatibility():
    for dim in (2, 3):
        h = generators.random_riemann_metric(RNG, dim)
        for _ in range(5):
            x = generators.sample_box_point(RNG, dim)
            res = metric_compatibility_residual(h, x)
            assert np.max(np.abs(res)) <= 1e-10


def test_lie_1form_matches_direct_lift():
    # L_V(beta) via covariant formula vs the raw coordinate formula
    h = generators.random_riemann_metric(RNG, 2)
    b = generators.random_vector_field(RNG, 2)
    v = generators.random_vector_field(RNG, 2)
    x = generators.sample_box_point(RNG, 2)
    y = RNG.normal(size=2)
    got = lie_1form(h, b, v, x, y)
    b0, db = b.table(x, order=1)
    v0, dv = v.table(x, order=1)
    # direct lift: V^k d_k(b_j) y^j + b_i dV^i/dx^j y^j
    want = float(np.einsum("k,jk,j->", v0, db, y) + np.einsum("i,ij,j->", b0, dv, y))
    assert got == pytest.approx(want, rel=1e-10, abs=1e-12)
