"""Sampling-based falsification checks."""

import numpy as np
import pytest

import pathlift as pl
from pathlift.errors import InvalidXi


def _plan(**kw):
    base = dict(radii=(1.0, 2.0, 4.0), per_radius=6, z_samples=6, seed=0)
    base.update(kw)
    return pl.SamplingPlan(**base)


def test_sampling_plan_validation():
    with pytest.raises(ValueError):
        pl.SamplingPlan(radii=())
    with pytest.raises(ValueError):
        pl.SamplingPlan(radii=(2.0, 1.0))
    with pytest.raises(ValueError):
        pl.SamplingPlan(radii=(1.0,), per_radius=0)


def test_power_law_xi():
    xi = pl.PowerLawXi(c=2.0, p=0.5)
    assert xi(4.0) == pytest.approx(4.0)
    with pytest.raises(InvalidXi):
        pl.PowerLawXi(c=2.0, p=1.5)
    with pytest.raises(InvalidXi):
        pl.PowerLawXi(c=-1.0, p=1.0)


def test_sphere_estimates_are_exact():
    # |z d2F(v, w)| = 2 |z <v, w>| peaks at 2; coercivity ratio is
    # identically 2 since d2F(phi, phi) = 2 ||phi||^2
    o = pl.SphereMap(3)
    rep = pl.check_report(o, _plan())
    assert rep.c_est == pytest.approx(2.0, abs=1e-3)
    assert rep.k_est == pytest.approx(2.0, abs=1e-3)
    assert not rep.falsified


def test_sphere_xi_margin_closed_form():
    # phi_z = 2 r z, curvature = 2 ||phi||^2, margin = 2 ||phi|| xi(r)^2
    # = 4 r^3 with xi(s) = s
    o = pl.SphereMap(3)
    xi = pl.PowerLawXi(c=1.0, p=1.0)
    rng = np.random.default_rng(0)
    for r in (1.0, 2.0, 3.0):
        u = rng.standard_normal(3)
        u *= r / np.linalg.norm(u)
        m = pl.xi_margin(o, u, np.array([1.0]), xi)
        assert m == pytest.approx(4.0 * r ** 3, rel=1e-10)


def test_sphere_growth_slope_is_negative():
    # 1 / lambda_1 = 1 / (4 r^2) shrinks with radius
    o = pl.SphereMap(3)
    rep = pl.check_report(o, _plan())
    assert rep.growth_slope <= 0.0
    assert rep.growth_pass


def test_linear_map_is_falsified():
    rng = np.random.default_rng(1)
    o = pl.LinearMap(rng.standard_normal((3, 6)))
    rep = pl.check_report(o, _plan())
    assert rep.c_est == 0.0
    assert rep.k_est == 0.0
    assert rep.falsified


def test_determinism_and_monotone_refinement():
    o = pl.SphereMap(4)
    r1 = pl.check_report(o, _plan())
    r2 = pl.check_report(o, _plan())
    assert r1.c_est == r2.c_est and r1.k_est == r2.k_est
    # doubling the sample counts keeps the earlier draws, so the
    # one-sided estimates can only tighten
    r4 = pl.check_report(o, _plan(per_radius=12, z_samples=12))
    assert r4.c_est >= r1.c_est - 1e-12
    assert r4.k_est <= r1.k_est + 1e-12


def test_seed_changes_samples():
    o = pl.FoldMap()
    r1 = pl.check_report(o, _plan(radii=(0.5, 1.0)))
    r2 = pl.check_report(o, _plan(radii=(0.5, 1.0), seed=123))
    assert r1.k_est != r2.k_est


def test_gap_condition_detects_small_floor():
    o = pl.FoldMap()  # lambda_2 = 1 on most samples, lambda can dip
    ok = pl.check_report(o, _plan(radii=(1.0,)), lambda0=1e-6)
    bad = pl.check_report(o, _plan(radii=(1.0,)), lambda0=100.0)
    assert ok.gap_pass
    assert not bad.gap_pass and bad.falsified


def test_coercivity_ratio_skips_degenerate_switching():
    o = pl.FoldMap()
    # at u1 = 0 with z = e1 the switching function vanishes
    assert pl.coercivity_ratio(o, np.array([0.0, 1.0]),
                               np.array([1.0, 0.0])) is None
    got = pl.coercivity_ratio(o, np.array([0.5, 0.0]),
                              np.array([1.0, 0.0]))
    assert got == pytest.approx(2.0, abs=1e-8)


def test_estimate_bilinear_norm_power_iteration():
    o = pl.SphereMap(5)
    u = np.ones(5)
    got = pl.estimate_bilinear_norm(o, u, z_count=2, v_count=2, seed=0)
    assert got == pytest.approx(2.0, abs=1e-6)


def test_report_text_and_rows():
    o = pl.SphereMap(2)
    rep = pl.check_report(o, _plan(radii=(1.0, 2.0)),
                          xi=pl.PowerLawXi(1.0, 1.0))
    text = rep.to_text()
    assert "C_est" in text and "K_est" in text
    assert "seed = 0" in text
    assert "sample" in text  # never claims more than the sample shows
    header, rows = rep.shell_rows()
    assert len(rows) == 2 and len(rows[0]) == len(header)


def test_gramian_inverse_growth_flags_singular_samples():
    o = pl.SphereMap(3)
    shell_max, slope, intercept, passed, sing = \
        pl.gramian_inverse_growth(o, _plan(radii=(1.0, 2.0)))
    assert len(shell_max) == 2
    assert shell_max[0] == pytest.approx(1.0 / 4.0, rel=1e-10)
    assert shell_max[1] == pytest.approx(1.0 / 16.0, rel=1e-10)
    assert passed and sing == [0, 0]
