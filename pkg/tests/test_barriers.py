import numpy as np
import pytest

from warpends.barriers import (AuditGrid, CapChart, SigmaProfile, audit_refinement,
                               audit_superharmonic, barrier_2d, build_barrier, cap_eigenfunction,
                               conformal_rescale, sigma_profile)
from warpends.criteria import SampleGrid, check_criterion, comparison_warp
from warpends.expr import WarpField
from warpends.geometry import CrossSection, EndSpec

CIRCLE = CrossSection("circle")
TORUS = CrossSection("torus")


# -- cap eigenfunctions --------------------------------------------------------


def test_interval_eigenfunction_is_minus_cosine():
    eig = cap_eigenfunction(CapChart.interval(1.0, np.pi / 2))
    th = np.linspace(1.0 - np.pi / 2, 1.0 + np.pi / 2, 41)
    assert eig.lambda1 == 1.0 and eig.A == -1.0
    assert np.allclose(eig((th,)), -np.cos(th - 1.0), atol=1e-15)
    assert eig((np.array([1.0]),))[0] == -1.0
    assert abs(eig((np.array([1.0 + np.pi / 2]),))[0]) < 1e-15


def test_rectangle_eigenvalue_and_boundary():
    chart = CapChart.rectangle((np.pi, np.pi), np.pi / 2, np.pi / 2)
    eig = cap_eigenfunction(chart)
    assert eig.lambda1**2 == pytest.approx(2.0, rel=1e-15)
    u = np.linspace(np.pi / 2, 3 * np.pi / 2, 9)
    edge = eig((u, np.full_like(u, np.pi / 2)))
    assert np.all(np.abs(edge) < 1e-15)
    inside = eig(tuple(np.meshgrid(u[1:-1], u[1:-1], indexing="ij")))
    assert np.all(inside < 0) and inside.min() == -1.0


def test_eigenfunction_satisfies_the_eigen_equation_discretely():
    chart = CapChart.rectangle((2.0, 3.0), 0.8, 1.1)
    eig = cap_eigenfunction(chart)
    for n in (33, 65):
        u, v = chart.nodes(n)
        U, V = np.meshgrid(u, v, indexing="ij")
        f = eig((U, V))
        hu, hv = u[1] - u[0], v[1] - v[0]
        lap = ((f[2:, 1:-1] - 2 * f[1:-1, 1:-1] + f[:-2, 1:-1]) / hu**2
               + (f[1:-1, 2:] - 2 * f[1:-1, 1:-1] + f[1:-1, :-2]) / hv**2)
        err = np.abs(lap + eig.lambda1**2 * f[1:-1, 1:-1]).max()
        assert err < 0.02 * (33 / n) ** 2


def test_eigenfunction_gradient_against_differences():
    chart = CapChart.rectangle((2.0, 3.0), 0.8, 1.1)
    eig = cap_eigenfunction(chart)
    u, v, h = 2.3, 2.6, 1e-6
    gu, gv = eig.gradient((np.array(u), np.array(v)))
    fd_u = (eig((np.array(u + h), np.array(v))) - eig((np.array(u - h), np.array(v)))) / (2 * h)
    fd_v = (eig((np.array(u), np.array(v + h))) - eig((np.array(u), np.array(v - h)))) / (2 * h)
    assert gu == pytest.approx(fd_u, abs=1e-8) and gv == pytest.approx(fd_v, abs=1e-8)


def test_degenerate_and_oversized_caps():
    with pytest.raises(ValueError):
        cap_eigenfunction(CapChart.interval(0.0, 0.0))
    with pytest.raises(ValueError):
        CapChart.interval(0.0, np.pi)
    with pytest.raises(ValueError):
        CapChart.rectangle((0, 0), 1.0, 1.0, periods=(2.0, 6.0))


# -- sigma ---------------------------------------------------------------------


def test_sigma_for_exponential_comparison():
    comp = comparison_warp("exp(r)", 0.0)
    r = np.linspace(0.0, 12.0, 49)
    s = sigma_profile(comp, 1.0, r)
    assert np.allclose(s.values, np.exp(-np.exp(-r)), rtol=1e-12, atol=0)
    assert s.monotone and np.all(np.diff(s.values) > 0)
    assert s.interpolate(6.1) == pytest.approx(np.exp(-np.exp(-6.1)), rel=1e-3)


def test_sigma_normalisation_against_tail():
    comp = comparison_warp("r*log(r)^2", 2.0)
    prof = SigmaProfile(comp, 1.5)
    # T(r) = 1 / log r exactly for this comparison
    r = np.array([2.0, 3.0, 10.0, 50.0, 400.0])
    assert np.allclose(prof.tail(r), 1 / np.log(r), rtol=0, atol=1e-10)
    assert np.allclose(prof(r), np.exp(-1.5 / np.log(r)), atol=1e-10)
    assert prof(1e6) == pytest.approx(np.exp(-1.5 / np.log(1e6)), abs=1e-9)
    # far targets stay cheap and accurate
    far = np.array([1e8, 1e12])
    assert np.allclose(prof(far), np.exp(-1.5 / np.log(far)), atol=1e-9)


def test_sigma_derivatives_against_differences():
    prof = SigmaProfile(comparison_warp("sin(r) + r*log(r)^2", 10.0), 1.0)
    r = np.array([11.0, 17.3, 42.0])
    s, d1, d2 = prof.derivatives(r)
    h = 1e-3
    fd1 = (prof(r + h) - prof(r - h)) / (2 * h)
    fd2 = (prof(r + h) - 2 * prof(r) + prof(r - h)) / h**2
    assert np.allclose(d1, fd1, rtol=1e-6)
    assert np.allclose(d2, fd2, rtol=1e-4, atol=1e-9)


def test_sigma_refuses_divergent_tail():
    with pytest.raises(ValueError, match="convergent"):
        SigmaProfile(comparison_warp("r", 1.0), 1.0)


# -- analytic Laplacian ----------------------------------------------------------


def test_analytic_laplacian_closed_form_in_3d():
    end = EndSpec(TORUS, "sinh(r)", r_start=1.0)
    comp = comparison_warp("sinh(r)", 1.0)
    b = build_barrier(CapChart.rectangle((np.pi, np.pi), 1.2, 0.9), comp)
    rng = np.random.default_rng(1)
    u = np.pi + rng.uniform(-1.2, 1.2, 40)
    v = np.pi + rng.uniform(-0.9, 0.9, 40)
    r = rng.uniform(1.0, 9.0, 40)
    lap = b.analytic_laplacian(end, (u, v), r)
    # with phi = phi_bar: vartheta sigma lambda1 phi_r / phi^2
    expected = b.eig((u, v)) * b.sigma(r) * b.eig.lambda1 * np.cosh(r) / np.sinh(r) ** 2
    assert np.allclose(lap, expected, rtol=1e-10, atol=1e-15)
    assert np.all(lap <= 0)


def test_analytic_laplacian_vanishes_in_2d_when_warps_agree():
    end = EndSpec(CIRCLE, "r*log(r)^2", r_start=2.0)
    b = barrier_2d(0.5, comparison_warp("r*log(r)^2", 2.0))
    th = np.linspace(0.5 - 1.0, 0.5 + 1.0, 11)
    r = np.geomspace(5.0, 500.0, 11)
    T, R = np.meshgrid(th, r, indexing="ij")
    assert np.abs(b.analytic_laplacian(end, (T,), R)).max() < 1e-15


# -- audits ----------------------------------------------------------------------


def test_hyperbolic_rectangle_audit_on_fine_grid():
    end = EndSpec(TORUS, "sinh(r)", r_start=1.0)
    b = build_barrier(CapChart.rectangle((np.pi, np.pi), np.pi / 2, np.pi / 2), comparison_warp("sinh(r)", 1.0))
    rep = audit_superharmonic(b, end, AuditGrid(65, 257, 10.0))
    assert rep.max_discrete_laplacian <= 1e-6
    assert rep.ok and rep.min_value >= 0 and rep.value_at_p_rmax <= 1e-3
    text = rep.to_text()
    assert "max_discrete_laplacian:" in text and "grid: n_omega=65 n_radial=257" in text


def test_two_dimensional_sinh_barrier_audit():
    end = EndSpec(CIRCLE, "sinh(r)", r_start=1.0)
    b = barrier_2d(0.0, comparison_warp("sinh(r)", 1.0))
    reports = audit_refinement(b, end, AuditGrid(17, 129, 10.0), levels=3)
    assert all(r.ok for r in reports)
    assert reports[-1].max_discrete_laplacian <= 1e-6
    assert min(reports[0].refinement_orders) >= 1.8


def test_audit_domain_of_2d_barrier():
    b = barrier_2d(0.0, comparison_warp("r*log(r)^2", 2.0))
    assert b.audit_half_widths == (np.pi / 3,)
    assert b.sigma(b.audit_r_min) == pytest.approx(0.5, abs=1e-9)
    # the value is negative at the full cap edge below infinity, as noted for the 2-D barrier
    assert b.value((np.array(np.pi / 2),), 10.0) == pytest.approx(1.0)
    assert b.value((np.array(0.0),), b.audit_r_min) == pytest.approx(0.5, abs=1e-9)


def test_coarse_audit_is_flagged_underresolved():
    end = EndSpec(TORUS, "exp(3*r)", r_start=0.0)
    b = build_barrier(CapChart.rectangle((np.pi, np.pi), 1.0, 1.0), comparison_warp("exp(3*r)", 0.0))
    rep = audit_superharmonic(b, end, AuditGrid(9, 9, 20.0))
    assert rep.underresolved and not rep.ok and rep.notes


def test_barrier_boundary_behaviour():
    comp = comparison_warp("sinh(r)", 1.0)
    b = build_barrier(CapChart.interval(0.0, 1.0), comp)
    r = np.linspace(1.0, 30.0, 200)
    at_p = b.value((np.zeros_like(r),), r)
    assert np.all(np.diff(at_p) < 0) and at_p[-1] < 1e-12
    assert b.value_at_infinity((np.array(0.0),)) == 0.0
    # delta(rho) >= (1 - cos(pi rho / (2 w))) sigma(r_max)
    r_max = 10.0
    for rho in (0.1, 0.4, 0.8, 1.0):
        got = b.value((np.array(rho),), r_max)
        assert got >= (1 - np.cos(np.pi * rho / 2)) * b.sigma(r_max) - 1e-15


def test_sign_convention_superharmonic():
    """Delta v <= 0 is superharmonic: the audit rejects a subharmonic candidate."""
    end = EndSpec(TORUS, "sinh(r)", r_start=1.0)
    b = build_barrier(CapChart.rectangle((np.pi, np.pi), 1.0, 1.0), comparison_warp("sinh(r)", 1.0))
    flipped = build_barrier(CapChart.rectangle((np.pi, np.pi), 1.0, 1.0), comparison_warp("sinh(r)", 1.0))
    flipped.sigma = type("Neg", (), {
        "__call__": lambda self, r: -b.sigma(r),
        "derivatives": lambda self, r: tuple(-x for x in b.sigma.derivatives(r)),
    })()
    good = audit_superharmonic(b, end, AuditGrid(17, 65, 8.0))
    bad = audit_superharmonic(flipped, end, AuditGrid(17, 65, 8.0))
    assert good.superharmonic and not bad.superharmonic


# -- cross-module soundness ------------------------------------------------------------


@pytest.mark.parametrize("cs, warp, comp_text, r0, chart", [
    (TORUS, "sinh(r)", "sinh(r)", 1.0, CapChart.rectangle((1.0, 2.0), 1.0, 0.7)),
    (TORUS, "sinh(r)*(1.5 + cos(u)*cos(v))", "0.5*sinh(r)", 1.0, CapChart.rectangle((0.5, 0.5), 1.0, 1.0)),
    (TORUS, "exp(r)*(2 + sin(u))", "exp(r)", 0.0, CapChart.rectangle((np.pi, 1.0), 1.2, 1.2)),
])
def test_solvable_implies_superharmonic_barrier(cs, warp, comp_text, r0, chart):
    end = EndSpec(cs, warp, r_start=r0)
    comp = comparison_warp(comp_text, r0)
    assert check_criterion(end, comp, SampleGrid(16, 128)).overall == "Solvable"
    b = build_barrier(chart, comp)
    rep = audit_superharmonic(b, end, AuditGrid(33, 129, r0 + 6.0))
    assert rep.superharmonic and rep.min_value >= 0
    assert rep.max_analytic_laplacian <= 0
    assert rep.min_inequality_residual >= -1e-12


def test_conformal_rescale_keeps_the_criterion():
    psi = WarpField("2 + cos(theta)", ("theta",))
    chart = CapChart((0.0,), (1.0,), (2 * np.pi,), psi)
    assert chart.eta == pytest.approx(2 + np.cos(1.0), rel=1e-12)
    end = EndSpec(CIRCLE, "sinh(r)", r_start=1.0)
    comp = comparison_warp("sinh(r)", 1.0)
    mu_end, mu_bar = conformal_rescale(end, chart, comp)
    assert mu_end.warp.value(2.0, (np.array(0.3),)) == pytest.approx((2 + np.cos(0.3)) * np.sinh(2.0))
    assert mu_bar.phi_bar.value(2.0) == pytest.approx(chart.eta * np.sinh(2.0))
    # on the cap mu >= mu_bar and the log-derivatives agree
    th = np.linspace(-1.0, 1.0, 21)
    r = np.linspace(1.0, 8.0, 30)
    T, R = np.meshgrid(th, r, indexing="ij")
    assert np.all(mu_end.warp.value(R, (T,)) >= mu_bar.phi_bar.value(R) - 1e-12)
    assert np.allclose(mu_end.warp.d_r(R, (T,)) / mu_end.warp.value(R, (T,)),
                       mu_bar.phi_bar.d_r(R) / mu_bar.phi_bar.value(R))
