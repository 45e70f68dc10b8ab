"""Fixture registry: domain guards, structural constraints, chart identities."""

import math

import numpy as np
import pytest

from finsler_solitons import fixtures, jets, randers, riemann
from finsler_solitons.fixtures import (ConstructionError, cigar,
                                       expanding_cylinder, gaussian,
                                       get_fixture, shrinking_cylinder,
                                       sphere_metric)
from finsler_solitons.sampling import sample_flags, unit_direction

RNG = np.random.default_rng(61)


def test_registry_names():
    for name in ("gaussian", "cigar", "shrinking", "expanding"):
        assert name in fixtures.FIXTURE_NAMES
    with pytest.raises(KeyError):
        get_fixture("nosuch")


@pytest.mark.parametrize("name", fixtures.FIXTURE_NAMES)
def test_domain_guards_hold_on_sample_domain(name):
    """1000 sampled points per fixture satisfy b < 1, lambda > 0, F > 0."""
    fx = get_fixture(name)
    rng = np.random.default_rng(hash(name) % (2 ** 31))
    for _ in range(1000):
        x = fx.sample_x(rng)
        lam = jets.scalar_value(fx.nav.lam(list(x)))
        assert lam > 0.0
        b2 = jets.scalar_value(fx.rd.b2(list(x)))
        assert b2 < 1.0
        y = unit_direction(rng, fx.dim)
        assert fx.metric.value(x, y) > 1e-6


def test_sphere_chart_inverse_identity():
    mu = 1.0
    sm = sphere_metric(mu, 3)
    for _ in range(20):
        x = RNG.uniform(-2.0, 2.0, size=3)
        H = sm.matrix_at(x)
        D = 1.0 + mu * float(x @ x)
        Hinv = D * (np.eye(3) + mu * np.outer(x, x))
        np.testing.assert_allclose(H @ Hinv, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("name", ("shrinking", "expanding"))
def test_cylinder_f_condition(name):
    """f_k S^k_0 + f_{:0k} W^k = 0 at sampled flags."""
    fx = get_fixture(name)
    for p in sample_flags(fx, 12, RNG):
        T = randers.nav_tensors(fx.nav, p.x)
        hess = riemann.hessian_tensor(fx.nav.h, fx.f, p.x)
        _, df, _ = fx.f.table(p.x, order=2)
        val = float(df @ T.s_mixed @ p.y) + float(p.y @ hess @ T.w_up)
        assert abs(val) <= 1e-9


def test_cylinder_constraints_exact():
    fx = get_fixture("shrinking")
    assert fx.constraints["Q-antisymmetric"] == 0.0
    assert fx.constraints["QtQ-identity"] == 0.0
    assert fx.constraints["Qd-zero"] == 0.0


def test_shrinking_parameter_family():
    # the 3-d family: Q from (p, q, l), d = (l, -q, p); exact constraints
    mu = 1.0
    p_, q_, l_ = 0.25, -0.125, 0.5
    Q = math.sqrt(mu) * np.array([[0.0, p_, q_], [-p_, 0.0, l_], [-q_, -l_, 0.0]])
    d = np.array([l_, -q_, p_])
    fx = shrinking_cylinder(m=2, mu=mu, Q=Q, d=d)
    assert fx.kappa([0.0] * 4) == 2.0
    p = sample_flags(fx, 2, RNG)[0]
    T = randers.nav_tensors(fx.nav, p.x)
    assert np.max(np.abs(T.wcov + T.wcov.T)) <= 1e-12


def test_cylinder_larger_m_parameterization():
    # m = 3 gives a 6-dimensional cylinder with soliton constant 2(m-1)mu
    from finsler_solitons import solitons
    from finsler_solitons.sampling import sample_flags as sf

    fx = shrinking_cylinder(m=3, mu=1.0)
    assert fx.dim == 6
    assert float(fx.kappa([0.0] * 6)) == 4.0
    assert max(fx.constraints.values()) == 0.0
    p = sf(fx, 1, np.random.default_rng(0))[0]
    res = solitons.gradient_soliton_residual(fx.metric, fx.measure, fx.kappa, p)
    assert abs(res) <= 1e-10


def test_shrinking_riemannian_reduction():
    # Q = 0, d = 0: the wind vanishes and the product soliton is Riemannian
    k = 3
    fx = shrinking_cylinder(m=2, mu=1.0, Q=np.zeros((k, k)), d=np.zeros(k))
    x = fx.sample_x(RNG)
    assert np.max(np.abs(fx.nav.W.components(list(x)))) == 0.0
    assert float(fx.kappa(list(x))) == 2.0


def test_cylinder_constraint_violations_raise():
    k = 3
    bad_q = np.zeros((k, k))
    bad_q[0, 1] = 1.0  # not antisymmetric
    with pytest.raises(ConstructionError):
        shrinking_cylinder(Q=bad_q, d=np.zeros(k))
    Q = np.zeros((k, k))
    Q[1, 2], Q[2, 1] = 0.5, -0.5
    with pytest.raises(ConstructionError):
        shrinking_cylinder(Q=Q, d=np.array([0.3, 0.0, 0.0]))  # QtQ identity fails
    Q0, d0 = np.zeros((k, k)), np.array([1.2, 0.0, 0.0])
    with pytest.raises(ConstructionError):
        shrinking_cylinder(Q=Q0, d=d0)  # |d| >= 1


def test_expanding_t_range_guard():
    with pytest.raises(ConstructionError):
        expanding_cylinder(t_range=(0.0, 0.9))
    with pytest.raises(ConstructionError):
        expanding_cylinder(t_range=(0.2, 1.1))


def test_expanding_lowered_wind_scales_with_t2():
    fx = get_fixture("expanding")
    x = fx.sample_x(RNG)
    t = x[0]
    T = randers.nav_tensors(fx.nav, x)
    hat = sphere_metric(1.0, 3).matrix_at(x[1:])
    what = np.array(fx.nav.W.components(list(x)))[1:]
    np.testing.assert_allclose(T.w_low[1:], t * t * (hat @ what), atol=1e-12)
    assert T.w_low[0] == 0.0


def test_expanding_hessian_law():
    fx = get_fixture("expanding")
    x = fx.sample_x(RNG)
    y = RNG.normal(size=4)
    h2 = float(y @ fx.nav.h.matrix_at(x) @ y)
    got = riemann.hessian(fx.nav.h, fx.f, x, y)
    assert got == pytest.approx(-2.0 * h2, rel=1e-10)


def test_gaussian_variants():
    fx = get_fixture("gaussian")
    assert fx.name == "gaussian"
    assert np.max(np.abs(fx.nav.W.components([0.5, 0.2]))) > 0.0
    fxr = get_fixture("gaussian-riemannian")
    assert np.max(np.abs(fxr.nav.W.components([0.5, 0.2]))) == 0.0


def test_gaussian_construction_errors():
    with pytest.raises(ConstructionError):
        gaussian(rho=1.0, C=np.array([0.2, 0.0]), n=2)  # drift with rho != 0
    with pytest.raises(ConstructionError):
        gaussian(rho=1.0, Q=np.array([[0.0, 1.0], [0.0, 0.0]]), n=2)  # not antisym
    big_q = np.array([[0.0, 2.0], [-2.0, 0.0]])
    with pytest.raises(ConstructionError):
        gaussian(rho=1.0, Q=big_q, n=2)  # ||W|| reaches 1 on the ball


def test_gaussian_steady_with_drift_is_allowed():
    fx = gaussian(rho=0.0, C=np.array([0.3, 0.0]), n=2)
    x = fx.sample_x(RNG)
    assert float(fx.kappa(list(x))) == 0.0


def test_perturbed_rebuild_keeps_metadata():
    fx = get_fixture("cigar").perturbed("kappa", 1e-2)
    assert fx.perturb == ("kappa", 1e-2)
    assert fx.factory is not None
