"""Map oracles, weighted geometry, and target paths."""

import numpy as np
import pytest

import pathlift as pl
from pathlift.errors import ConfigurationError


def test_weighted_inner_and_norm():
    rng = np.random.default_rng(0)
    w = rng.uniform(0.5, 2.0, 5)
    o = pl.SphereMap(5, weights=w)
    a, b = rng.standard_normal((2, 5))
    assert o.inner(a, b) == pytest.approx(np.sum(w * a * b))
    assert o.norm(a) == pytest.approx(np.sqrt(np.sum(w * a * a)))


def test_adjoint_is_weighted_transpose():
    rng = np.random.default_rng(1)
    mat = rng.standard_normal((3, 7))
    w = rng.uniform(0.2, 3.0, 7)
    o = pl.LinearMap(mat, weights=w)
    u = rng.standard_normal(7)
    for _ in range(20):
        v = rng.standard_normal(7)
        z = rng.standard_normal(3)
        lhs = float(np.dot(o.apply_jacobian(u, v), z))
        rhs = o.inner(v, o.apply_adjoint(u, z))
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_adjoint_matrix_columns():
    rng = np.random.default_rng(2)
    mat = rng.standard_normal((2, 4))
    w = rng.uniform(0.5, 2.0, 4)
    o = pl.LinearMap(mat, weights=w)
    u = rng.standard_normal(4)
    cols = o.adjoint_matrix(u)
    for i in range(2):
        e = np.zeros(2)
        e[i] = 1.0
        np.testing.assert_allclose(cols[:, i], o.apply_adjoint(u, e))


def test_sphere_closed_forms():
    rng = np.random.default_rng(3)
    o = pl.SphereMap(4)
    u = rng.standard_normal(4)
    assert o.eval(u)[0] == pytest.approx(np.dot(u, u))
    np.testing.assert_allclose(o.jacobian(u), (2 * u)[None, :])
    v, w = rng.standard_normal((2, 4))
    z = rng.standard_normal(1)
    assert o.bilinear_second(u, z, v, w) == pytest.approx(
        2 * z[0] * np.dot(v, w))


def test_fold_closed_forms():
    o = pl.FoldMap()
    u = np.array([0.3, -1.2])
    np.testing.assert_allclose(o.eval(u), [0.09, -1.2])
    np.testing.assert_allclose(o.jacobian(u), [[0.6, 0.0], [0.0, 1.0]])
    assert o.bilinear_second(u, [1.0, 5.0], [2.0, 7.0], [3.0, -1.0]) \
        == pytest.approx(12.0)


def test_linear_second_is_zero():
    rng = np.random.default_rng(4)
    o = pl.LinearMap(rng.standard_normal((3, 5)))
    u, v, w = rng.standard_normal((3, 5))
    z = rng.standard_normal(3)
    assert o.bilinear_second(u, z, v, w) == 0.0


def test_fd_second_matches_analytic():
    rng = np.random.default_rng(5)
    o = pl.SphereMap(3)
    u, v, w = rng.standard_normal((3, 3))
    z = rng.standard_normal(1)
    exact = o.bilinear_second(u, z, v, w)
    fd = o.inner(o._switching_derivative(u, z, v), w)
    assert fd == pytest.approx(exact, abs=1e-8)


def test_bilinear_second_many_matches_single():
    rng = np.random.default_rng(6)
    o = pl.FoldMap()
    u, v = rng.standard_normal((2, 2))
    z = rng.standard_normal(2)
    ws = [rng.standard_normal(2) for _ in range(4)]
    many = o.bilinear_second_many(u, z, v, ws)
    for got, w in zip(many, ws):
        assert got == pytest.approx(o.bilinear_second(u, z, v, w))


def test_second_operator_represents_bilinear():
    rng = np.random.default_rng(7)
    w = rng.uniform(0.5, 2.0, 3)
    o = pl.SphereMap(3, weights=w)
    u, v = rng.standard_normal((2, 3))
    z = rng.standard_normal(1)
    bv = o.second_operator(u, z, v)
    for _ in range(5):
        probe = rng.standard_normal(3)
        assert o.inner(bv, probe) == pytest.approx(
            o.bilinear_second(u, z, v, probe), abs=1e-7)


def test_fd_jacobian_matches_analytic():
    rng = np.random.default_rng(8)
    for o in (pl.SphereMap(3), pl.FoldMap(),
              pl.LinearMap(rng.standard_normal((2, 4)))):
        u = rng.standard_normal(o.dim_domain)
        np.testing.assert_allclose(o.fd_jacobian(u), o.jacobian(u),
                                   atol=1e-7)


def test_dimension_validation():
    o = pl.SphereMap(3)
    with pytest.raises(ConfigurationError):
        o.eval(np.zeros(4))
    with pytest.raises(ConfigurationError):
        o.apply_adjoint(np.zeros(3), np.zeros(2))
    with pytest.raises(ConfigurationError):
        pl.SphereMap(3, weights=np.zeros(3))
    with pytest.raises(ConfigurationError):
        pl.LinearMap(np.ones((5, 3)))  # codomain larger than domain


def test_make_map_registry():
    assert pl.MAP_NAMES == ("fold", "linear", "sphere")
    o = pl.make_map("sphere", dim=2)
    assert isinstance(o, pl.SphereMap)
    with pytest.raises(ConfigurationError):
        pl.make_map("nope")


# -- target paths ----------------------------------------------------------


def test_line_path():
    p = pl.LinePath([1.0, 0.0], [0.0, 2.0])
    np.testing.assert_allclose(p.gamma(0.5), [0.5, 1.0])
    np.testing.assert_allclose(p.gamma_dot(0.3), [-1.0, 2.0])
    np.testing.assert_allclose(p.gamma_ddot(0.3), [0.0, 0.0])
    assert p.knots == ()
    assert p.max_speed() == pytest.approx(np.sqrt(5.0))


def test_polyline_path_knots_and_slopes():
    p = pl.PolylinePath([[0.0], [1.0], [3.0]])
    assert p.knots == (0.5,)
    np.testing.assert_allclose(p.gamma(0.25), [0.5])
    np.testing.assert_allclose(p.gamma(0.75), [2.0])
    # right-continuous slope at the knot
    np.testing.assert_allclose(p.gamma_dot(0.5), [4.0])
    np.testing.assert_allclose(p.gamma_dot(0.49), [2.0])
    np.testing.assert_allclose(p.gamma(1.0), [3.0])


def test_line_to_target_starts_at_image():
    o = pl.SphereMap(2)
    u0 = np.array([1.0, 1.0])
    p = pl.line_to_target(o, u0, [0.5])
    np.testing.assert_allclose(p.gamma(0.0), o.eval(u0))
    np.testing.assert_allclose(p.gamma(1.0), [0.5])


def test_analytic_path_wraps_callables():
    p = pl.AnalyticPath(lambda s: [np.sin(s)], lambda s: [np.cos(s)],
                        lambda s: [-np.sin(s)], dim=1)
    assert p.gamma(0.2)[0] == pytest.approx(np.sin(0.2))
    assert p.gamma_dot(0.2)[0] == pytest.approx(np.cos(0.2))


# -- oracle identity suite -------------------------------------------------


def test_validate_oracle_passes_builtin_maps():
    rng = np.random.default_rng(9)
    for o in (pl.SphereMap(3), pl.FoldMap(),
              pl.LinearMap(rng.standard_normal((3, 6)))):
        results = pl.validate_oracle(o, seed=0)
        assert all(r.passed for r in results), \
            [r.line() for r in results if not r.passed]


def test_check_result_line_format():
    r = pl.CheckResult("thing", True, 1e-12, 1e-10)
    assert r.line().startswith("pass")
    r = pl.CheckResult("thing", False, 1.0, 1e-10)
    assert r.line().startswith("FAIL")
