"""Endpoint maps of control systems as oracles."""

import numpy as np
import pytest
from scipy.linalg import expm

import pathlift as pl
from pathlift.errors import ConfigurationError, TrajectoryBlowup


def test_control_grid_geometry():
    g = pl.ControlGrid(horizon=2.0, segments=4, control_dim=2)
    assert g.dim == 8
    assert g.dt == pytest.approx(0.5)
    np.testing.assert_allclose(g.weights, 0.5)
    u = np.arange(8.0)
    np.testing.assert_allclose(g.pack(g.unpack(u)), u)
    np.testing.assert_allclose(g.constant([1.0, -1.0]),
                               [1, -1, 1, -1, 1, -1, 1, -1])


def test_weighted_norm_is_l2_of_step_function():
    # ||u||_X^2 = sum (T/P) u_k^2 = integral of the step function squared
    ep = pl.endpoint_problem("single-integrator", [0.0], 2.0, 4)
    u = np.array([1.0, 2.0, -1.0, 0.5])
    assert ep.norm(u) ** 2 == pytest.approx(0.5 * np.sum(u ** 2))


def test_single_integrator_endpoint_is_mean_control():
    ep = pl.endpoint_problem("single-integrator", [0.3], 1.0, 5)
    u = np.array([1.0, -2.0, 0.5, 0.0, 3.0])
    assert ep.eval(u)[0] == pytest.approx(0.3 + 0.2 * np.sum(u))
    # Jacobian row is the segment weights
    np.testing.assert_allclose(ep.jacobian(u), np.full((1, 5), 0.2),
                               atol=1e-12)


def test_lti_endpoint_matches_expm():
    A = np.array([[0.0, 1.0], [-2.0, -0.3]])
    B = np.array([[0.0], [1.0]])
    ep = pl.endpoint_problem("lti", [1.0, -0.5], 1.0, 8,
                             system_params={"A": A, "B": B})
    rng = np.random.default_rng(0)
    u = rng.standard_normal(8)
    x = np.array([1.0, -0.5])
    dt = 1.0 / 8
    for uk in u:
        big = expm(np.block([[A, B * uk], [np.zeros((1, 3))]]) * dt)
        x = big[:2, :2] @ x + big[:2, 2]
    np.testing.assert_allclose(ep.eval(u), x, atol=1e-8)
    np.testing.assert_allclose(ep.endpoint_refined(u, refine=4), x,
                               atol=1e-10)


def test_jacobian_matches_fd():
    rng = np.random.default_rng(1)
    for name in ("brockett", "unicycle"):
        ep = pl.endpoint_problem(name, [0.0, 0.0, 0.0], 1.0, 4)
        u = rng.standard_normal(ep.dim_domain)
        ja = ep.jacobian(u)
        jf = ep.fd_jacobian(u)
        assert np.linalg.norm(ja - jf) <= 1e-6 * max(np.linalg.norm(ja), 1.0)


def test_brockett_endpoint_closed_form():
    ep = pl.endpoint_problem("brockett", [0.0, 0.0, 0.0], 1.0, 20)
    u = ep.grid.constant([1.0, 1.0])
    # x1 = t, x2 = t, x3 = t^2/2 under u = (1, 1)
    np.testing.assert_allclose(ep.eval(u), [1.0, 1.0, 0.5], atol=1e-10)


def test_brockett_gramian_singular_at_zero():
    ep = pl.endpoint_problem("brockett", [0.0, 0.0, 0.0], 1.0, 10)
    with pytest.warns(RuntimeWarning, match="degenerate"):
        spec = pl.spectral_decompose(pl.gramian(ep, np.zeros(ep.dim_domain)))
    assert spec.lambdas[0] <= 1e-10
    np.testing.assert_allclose(sorted(spec.lambdas[1:]), [1.0, 1.0],
                               atol=1e-10)
    assert abs(spec.vectors[2, 0]) >= 1.0 - 1e-8  # z1 = +-e3


def test_brockett_second_variation_closed_form():
    # z = e3, v = w constant (1, 1): z* d2E(v, v) = 2 int_0^1 t dt = 1
    ep = pl.endpoint_problem("brockett", [0.0, 0.0, 0.0], 1.0, 20)
    u = np.zeros(ep.dim_domain)
    v = ep.grid.constant([1.0, 1.0])
    z = np.array([0.0, 0.0, 1.0])
    assert ep.bilinear_second(u, z, v, v) == pytest.approx(1.0, abs=1e-6)
    assert ep.second_variation(u, z, v, v) == pytest.approx(1.0, abs=1e-6)


def test_kernel_nodes_shapes_and_terminal_value():
    ep = pl.endpoint_problem("unicycle", [0.0, 0.0, 0.0], 1.0, 3)
    u = 0.3 * np.ones(ep.dim_domain)
    times, bands = ep.kernel_nodes(u)
    assert times[0] == pytest.approx(0.0)
    assert times[-1] == pytest.approx(1.0)
    assert bands.shape[1:] == (3, 2)
    # K(T) = I, so the terminal band is f_u at the endpoint
    _, states = ep.trajectory(u)
    np.testing.assert_allclose(bands[-1],
                               ep.system.f_u(states[-1], u[-2:]),
                               atol=1e-12)


def test_trajectory_cache_reuses_results():
    ep = pl.endpoint_problem("unicycle", [0.0, 0.0, 0.0], 1.0, 4)
    u = 0.2 * np.ones(ep.dim_domain)
    t1, s1 = ep.trajectory(u)
    t2, s2 = ep.trajectory(u)
    assert s1 is s2
    assert ep.jacobian(u) is ep.jacobian(u)


def test_blowup_detection():
    ep = pl.endpoint_problem("lti", [1.0], 1.0, 2,
                             system_params={"A": [[30.0]], "B": [[1.0]]})
    with pytest.raises(TrajectoryBlowup) as info:
        ep.eval(np.zeros(2))
    assert 0.0 < info.value.escape_time <= 1.0


def test_constructor_validation():
    with pytest.raises(ConfigurationError):
        pl.endpoint_problem("nope", [0.0], 1.0, 2)
    with pytest.raises(ConfigurationError):
        pl.endpoint_problem("brockett", [0.0], 1.0, 2)  # x0 wrong length
    with pytest.raises(ConfigurationError):
        pl.endpoint_problem("brockett", [0.0, 0.0, 0.0], 1.0, 2, substeps=3)
    with pytest.raises(ConfigurationError):
        pl.ControlGrid(horizon=-1.0, segments=2, control_dim=1)


def test_endpoint_lift_plans_single_integrator():
    ep = pl.endpoint_problem("single-integrator", [0.0, 0.0], 1.0, 4,
                             system_params={"dim": 2})
    u0 = np.zeros(ep.dim_domain)
    target = np.array([0.5, -0.25])
    rep = pl.lift(ep, pl.line_to_target(ep, u0, target), u0)
    assert rep.status == pl.REACHED
    np.testing.assert_allclose(ep.eval(rep.final_u), target, atol=1e-9)
    # least-norm control is constant in time
    vals = ep.grid.unpack(rep.final_u)
    np.testing.assert_allclose(vals, np.tile(vals[0], (4, 1)), atol=1e-8)
