import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from warpends.criteria import (CurvatureBoundError, SampleGrid, check_criterion, comparison_warp,
                               hyperbolic_comparison_warp, sturm_compare, tail_integral)
from warpends.expr import WarpField
from warpends.geometry import CrossSection, EndSpec

CIRCLE = CrossSection("circle")
TORUS = CrossSection("torus")


# -- tail integral ---------------------------------------------------------------


def test_tail_of_r_log2_r_is_one_over_log_two():
    v = tail_integral(WarpField.radial("r*log(r)^2"), 2.0)
    assert v.kind == "Convergent"
    assert abs(v.value - 1 / np.log(2)) <= 1e-8
    assert v.error_bound < 1e-8


def test_tail_of_sinh_against_independent_quadrature():
    # oracle: plain adaptive quadrature to 1e-12 on [1, 60] plus the analytic
    # tail 2 atan(e^-60); closed form log(coth(1/2)) for comparison
    body, _ = quad(lambda s: 1 / np.sinh(s), 1, 60, epsabs=1e-14, epsrel=1e-12, limit=200)
    oracle = body + 2 * np.arctan(np.exp(-60.0))
    assert oracle == pytest.approx(np.log(1 / np.tanh(0.5)), abs=1e-12)
    v = tail_integral(WarpField.radial("sinh(r)"), 1.0)
    assert v.kind == "Convergent" and abs(v.value - oracle) <= 1e-10


@pytest.mark.parametrize("text, r0, kind", [
    ("r", 1.0, "Divergent"),
    ("r*log(r)", 3.0, "Inconclusive"),  # q = 1 sits inside the band
    ("r*log(r)^0.5", 3.0, "Divergent"),
    ("sqrt(r)", 1.0, "Divergent"),
    ("2 + 0*r", 1.0, "Divergent"),
    ("r^2", 1.0, "Convergent"),
    ("r*log(r)^1.5", 3.0, "Convergent"),
    ("exp(r)", 0.0, "Convergent"),
])
def test_tail_verdicts(text, r0, kind):
    assert tail_integral(WarpField.radial(text), r0).kind == kind


def test_tail_values_against_closed_forms():
    assert tail_integral(WarpField.radial("r^2"), 1.0).value == pytest.approx(1.0, abs=1e-10)
    v = tail_integral(WarpField.radial("r*log(r)^1.5"), 3.0)
    assert v.value == pytest.approx(2 / np.sqrt(np.log(3.0)), abs=1e-8)
    assert tail_integral(WarpField.radial("exp(r)"), 0.0).value == pytest.approx(1.0, abs=1e-10)


def test_tail_non_finite_is_inconclusive():
    v = tail_integral(WarpField.radial("log(r - 50)"), 1.0)
    assert v.kind == "Inconclusive"


# -- check_criterion -----------------------------------------------------------


@pytest.mark.parametrize("warp, cs, r_start, r0, overall, integral", [
    ("sinh(r)", TORUS, 0.5, 1.0, "Solvable", "Convergent"),
    ("r", CIRCLE, 1.0, 1.0, "NotEstablished", "Divergent"),
    ("sin(r) + r*log(r)^2", CIRCLE, 1.0, 10.0, "Solvable", "Convergent"),
])
def test_criterion_examples(warp, cs, r_start, r0, overall, integral):
    end = EndSpec(cs, warp, r_start=r_start)
    rep = check_criterion(end, comparison_warp(warp, r0), SampleGrid(16, 256))
    assert rep.overall == overall
    assert rep.integral_verdict.kind == integral
    text = rep.to_text()
    assert f"overall: {overall}\n" in text and "domination_ok: True" in text


def test_domination_failure_is_reported():
    end = EndSpec(CIRCLE, "sinh(r)", r_start=0.5)
    rep = check_criterion(end, comparison_warp("2*sinh(r)", 1.0), SampleGrid(8, 64))
    assert not rep.domination_ok and rep.log_derivative_ok and rep.overall == "NotEstablished"


def test_log_derivative_failure_is_reported():
    # phi_bar = exp(2r) grows faster than phi = exp(r) in log-derivative
    end = EndSpec(CIRCLE, "exp(r)", r_start=0.0)
    rep = check_criterion(end, comparison_warp("exp(2*r - 40)", 1.0), SampleGrid(8, 64))
    assert rep.domination_ok and not rep.log_derivative_ok


def test_nonradial_end_is_sampled_over_the_cross_section():
    end = EndSpec(TORUS, "sinh(r)*(1.5 + cos(u)*cos(v))", r_start=0.5)
    good = check_criterion(end, comparison_warp("0.5*sinh(r)", 1.0), SampleGrid(16, 64))
    bad = check_criterion(end, comparison_warp("0.6*sinh(r)", 1.0), SampleGrid(16, 64))
    assert good.overall == "Solvable"
    assert not bad.domination_ok


@pytest.mark.parametrize("c", [1.0, 0.5, 0.1, 1e-3])
def test_scaling_comparison_down_preserves_the_checks(c):
    for warp, r_start, r0 in [("sinh(r)", 0.5, 1.0), ("sin(r) + r*log(r)^2", 1.0, 10.0)]:
        end = EndSpec(CIRCLE, warp, r_start=r_start)
        comp = comparison_warp(warp, r0)
        rep = check_criterion(end, comp.scaled(c), SampleGrid(8, 128))
        assert rep.domination_ok and rep.log_derivative_ok


def test_sample_grid_seed_is_deterministic():
    end = EndSpec(TORUS, "sinh(r)*(1.5 + cos(u))", r_start=0.5)
    comp = comparison_warp("0.5*sinh(r)", 1.0)
    a = check_criterion(end, comp, SampleGrid(8, 32, seed=3)).to_text()
    b = check_criterion(end, comp, SampleGrid(8, 32, seed=3)).to_text()
    assert a == b


# -- Sturm comparison ------------------------------------------------------------


def test_sturm_explicit_sinh_pair():
    # u = sinh r and v = sinh(2r)/2 + c, with quotient 1 <= 4
    a = 1.0
    res = sturm_compare(np.sinh(a), np.cosh(a), np.sinh(2 * a), 2 * np.cosh(2 * a),
                        lambda r: 1.0 + 0 * np.asarray(r), lambda r: 4.0 + 0 * np.asarray(r), a, 5.0)
    assert res.max_violation == 0.0
    assert np.allclose(res.u, np.sinh(res.radii), rtol=1e-9)


def test_sturm_reflexive_case():
    q = lambda r: 1.0 + 0.5 * np.sin(np.asarray(r)) ** 2
    for part in "ab":
        res = sturm_compare(1.0, 0.5, 1.0, 0.5, q, q, 0.0, 4.0, part=part)
        assert res.max_violation <= 1e-12


def test_sturm_hyperbolic_comparison_case():
    # quotient a^2 for alpha sinh(a r + 1) against the warp phi = sinh(r + 1) with phi''/phi = 1 >= a^2
    a = 0.8
    res = sturm_compare(np.sinh(1.0), a * np.cosh(1.0), np.sinh(1.0), np.cosh(1.0),
                        lambda r: a * a + 0 * np.asarray(r), lambda r: 1.0 + 0 * np.asarray(r),
                        0.0, 10.0, part="b")
    assert res.max_violation <= 1e-8


def test_sturm_randomized_pairs(rng):
    for _ in range(20):
        c = rng.uniform(0.1, 2.0, 3)
        d = rng.uniform(0.0, 1.0, 2)
        qu = lambda r, c=c: c[0] + c[1] * np.sin(c[2] * np.asarray(r)) ** 2
        qv = lambda r, c=c, d=d: qu(r) + d[0] + d[1] * np.cos(np.asarray(r)) ** 2
        part = "a" if rng.random() < 0.5 else "b"
        u0, up = rng.uniform(0.5, 1.0), rng.uniform(0.0, 1.0)
        v0 = u0 + rng.uniform(0, 0.5)
        if part == "a":
            vp = up + rng.uniform(0, 0.5)
        else:
            vp = v0 * (up / u0 + rng.uniform(0, 0.5))
        assert sturm_compare(u0, up, v0, vp, qu, qv, 0.0, 4.0, part=part).max_violation <= 1e-8


def test_sturm_preconditions():
    one = lambda r: 1.0 + 0 * np.asarray(r)
    with pytest.raises(ValueError):
        sturm_compare(2.0, 1.0, 1.0, 1.0, one, one, 0, 1)
    with pytest.raises(ValueError):
        sturm_compare(1.0, 1.0, 1.0, 1.0, lambda r: 2.0 + 0 * np.asarray(r), one, 0, 1)
    with pytest.raises(ValueError):
        sturm_compare(1.0, 2.0, 1.0, 1.0, one, one, 0, 1, part="b")


# -- hyperbolic comparison warp ---------------------------------------------------


def test_hyperbolic_construction_satisfies_the_three_bounds():
    end = EndSpec(CIRCLE, "sinh(r + 1)")
    comp = hyperbolic_comparison_warp(end, 1.0)
    alpha = comp.phi_bar.value(0.0) / np.sinh(1.0)
    assert alpha == pytest.approx(0.9, rel=1e-12)
    phi0, dphi0 = np.sinh(1.0), np.cosh(1.0)
    assert alpha * np.sinh(1.0) < phi0
    assert alpha * 1.0 < dphi0 / phi0
    assert alpha * np.cosh(1.0) < dphi0
    rep = check_criterion(end, comp, SampleGrid(8, 128))
    assert rep.overall == "Solvable"


def test_hyperbolic_construction_on_exponential_end():
    end = EndSpec(TORUS, "exp(2*r)")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        comp1 = hyperbolic_comparison_warp(end, 1.0)
        comp2 = hyperbolic_comparison_warp(end, 2.0)
    assert check_criterion(end, comp1, SampleGrid(8, 128)).overall == "Solvable"
    # with a = 2 the log-derivative 2 coth(2r + 1) of the construction exceeds phi_r/phi = 2
    rep = check_criterion(end, comp2, SampleGrid(8, 128))
    assert rep.domination_ok and not rep.log_derivative_ok


def test_hyperbolic_construction_warns_on_log_derivative_risk():
    end = EndSpec(CIRCLE, "exp(2*r)")
    with pytest.warns(UserWarning, match="coth"):
        hyperbolic_comparison_warp(end, 2.0)


def test_hyperbolic_construction_errors():
    end = EndSpec(CIRCLE, "sinh(r + 1)")
    with pytest.raises(ValueError):
        hyperbolic_comparison_warp(end, 0.0)
    with pytest.raises(CurvatureBoundError):
        hyperbolic_comparison_warp(end, 1.5)
    plane = EndSpec(CIRCLE, "r", r_start=1.0)
    with pytest.raises(CurvatureBoundError):
        hyperbolic_comparison_warp(plane, 0.5)


def test_hyperbolic_construction_is_shifted_to_r_start():
    # phi = sinh(r - 1) from r_start = 2 matches alpha sinh((r - 2) + 1) in log-derivative
    end = EndSpec(CIRCLE, "sinh(r - 1)", r_start=2.0)
    comp = hyperbolic_comparison_warp(end, 1.0)
    assert comp.r0 == 2.0
    assert comp.phi_bar.value(2.0) == pytest.approx(0.9 * np.sinh(1.0), rel=1e-12)
    assert check_criterion(end, comp, SampleGrid(8, 128)).overall == "Solvable"


def test_hyperbolic_construction_can_miss_the_log_derivative_ordering():
    # for sinh r from r_start = 2: coth(r - 1) > coth(r), flagged up front
    end = EndSpec(CIRCLE, "sinh(r)", r_start=2.0)
    with pytest.warns(UserWarning, match="coth"):
        comp = hyperbolic_comparison_warp(end, 1.0)
    rep = check_criterion(end, comp, SampleGrid(8, 128))
    assert rep.domination_ok and not rep.log_derivative_ok
