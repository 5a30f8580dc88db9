"""Solvability criteria for the Dirichlet problem at infinity on one end.

An end is declared ``Solvable`` when a radial comparison warp ``phi_bar`` with
``phi_bar <= phi``, ``0 < phi_bar_r/phi_bar <= phi_r/phi`` and a convergent
``int^oo dr/phi_bar`` is found on the sample grid.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp

from .expr import DomainError, WarpField
from .geometry import EndSpec, radial_sectional_curvature

__all__ = [
    "TailVerdict",
    "ComparisonWarp",
    "SampleGrid",
    "CriterionReport",
    "SturmResult",
    "tail_integral",
    "comparison_warp",
    "check_criterion",
    "sturm_compare",
    "hyperbolic_comparison_warp",
    "CurvatureBoundError",
]

CONVERGENT, DIVERGENT, INCONCLUSIVE = "Convergent", "Divergent", "Inconclusive"
SOLVABLE, NOT_ESTABLISHED = "Solvable", "NotEstablished"

# exponent band in which the power-law test cannot decide
BAND = (0.9, 1.1)
# |p - 1| below which the joint fit is read as r (log r)^q growth
P_LINEAR_TOL = 0.02
# end of the direct quadrature range
R_SPLIT = 1e4
# log(log(r)) at which float64 evaluation of a warp stops being meaningful
_X_FLOAT_LIMIT = float(np.log(np.log(1e300)))


@dataclass(frozen=True)
class TailVerdict:
    """Outcome of :func:`tail_integral`.

    ``value`` and ``error_bound`` are set only for ``Convergent``. ``exponent``
    is the fitted growth exponent ``p`` of ``phi_bar ~ r^p``; ``log_exponent``
    is the refined ``q`` of ``phi_bar ~ r (log r)^q`` used inside the band.
    """

    kind: str
    value: float | None = None
    error_bound: float | None = None
    exponent: float | None = None
    log_exponent: float | None = None
    detail: str = ""

    @property
    def convergent(self) -> bool:
        return self.kind == CONVERGENT


def _slope(x, y) -> float:
    return float(np.polyfit(x, y, 1)[0])


def _quiet_quad(f, a, b, limit):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(f, a, b, limit=limit, epsabs=1e-15, epsrel=1e-13)


def _loglog_tail(phi_bar: WarpField, r_from: float, limit: int) -> tuple[float, float]:
    """``int_{r_from}^oo dr/phi_bar`` in the variable ``x = log log r``.

    The integrand ``r log r / phi_bar`` decays at least exponentially in ``x``
    for every tail that passes the growth test. Quadrature runs up to the
    float64 range; the remainder is the exponential extrapolation
    ``g(X)/kappa``, which is exact for ``phi_bar = r (log r)^q``.
    """
    x0 = float(np.log(np.log(r_from)))

    def g(x):
        r = np.exp(np.exp(x))
        try:
            return float(r * np.log(r) / phi_bar.value(r))
        except DomainError:
            return np.nan

    xs = np.linspace(x0, _X_FLOAT_LIMIT, 400)
    vals = np.array([g(x) for x in xs])
    ok = np.isfinite(vals)
    if not ok[0]:
        raise DomainError("tail integrand not evaluable", str(phi_bar))
    # last x before the warp overflows
    k = int(np.argmin(ok)) - 1 if not ok.all() else len(xs) - 1
    X = float(xs[k])
    if X <= x0:
        return 0.0, 0.0
    body, err = _quiet_quad(g, x0, X, limit)
    gX = vals[k]
    if gX <= 0:
        return body, err

    def extrapolate(j):
        with np.errstate(divide="ignore"):
            kappa = -(np.log(vals[k]) - np.log(vals[j])) / (xs[k] - xs[j]) if k > j else 0.0
        return float(gX / kappa) if kappa > 0 else np.inf

    # two decay-rate fits; their spread measures how far g is from exponential
    remainder = extrapolate(max(0, k - 20))
    alt = extrapolate(max(0, k - 40))
    spread = abs(remainder - alt) if np.isfinite(alt) else abs(remainder)
    return body + remainder, err + spread


def _panel_quad(phi_bar: WarpField, a: float, b: float, max_panels: int,
                rtol: float = 1e-14) -> tuple[float, float]:
    """Composite Gauss-Legendre for ``int_a^b dr/phi_bar``; returns (value, error estimate).

    Starts from panels of width at most 1 and bisects every panel whose
    20- and 10-point rules disagree by more than its share of ``rtol``, until
    the estimate is met or ``max_panels`` is reached.
    """
    x20, w20 = np.polynomial.legendre.leggauss(20)
    x10, w10 = np.polynomial.legendre.leggauss(10)
    edges = np.linspace(a, b, int(min(max_panels, max(1, np.ceil(b - a)))) + 1)
    lo, hi = edges[:-1], edges[1:]
    while True:
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        fine = np.sum(half[:, None] * w20 / phi_bar.value(mid[:, None] + half[:, None] * x20), axis=1)
        coarse = np.sum(half[:, None] * w10 / phi_bar.value(mid[:, None] + half[:, None] * x10), axis=1)
        err = np.abs(fine - coarse)
        total = float(fine.sum())
        target = rtol * max(1.0, abs(total))
        bad = err > target / len(lo)
        if err.sum() <= target or not bad.any() or len(lo) + bad.sum() > max_panels:
            return total, float(err.sum())
        m = mid[bad]
        lo = np.concatenate([lo[~bad], lo[bad], m])
        hi = np.concatenate([hi[~bad], m, hi[bad]])


def _finite_at(f: WarpField, r: float) -> bool:
    try:
        return bool(np.isfinite(f.value(r)))
    except DomainError:
        return False


def tail_integral(phi_bar: WarpField, r0: float, r_max: float | None = None,
                  budget: int = 400_000) -> TailVerdict:
    """Decide convergence of ``int_{r0}^oo dr/phi_bar`` and estimate its value.

    Growth is fitted over the last decade ``[r_max/10, r_max]``. The power
    exponent ``p1`` is the slope of ``log phi_bar`` against ``log r``;
    ``p1 < 0.9`` is Divergent. Otherwise ``log phi_bar`` is fitted jointly as
    ``c + p log r + q log log r``, which is exact for ``r^p (log r)^q``:
    ``p1, p > 1.1`` is Convergent; ``|p - 1| <= 0.02`` hands the decision to
    ``q`` with the same 0.9/1.1 band; anything else is Inconclusive.

    ``r_max`` defaults to ``max(10 r0, 1000)``, halved while ``phi_bar``
    overflows there (exponential warps).

    The value is composite Gauss-Legendre on ``[r0, max(r_max, 1e4)]``
    (panels of width at most 1, at most ``budget`` nodes; the error is the
    gap between 20- and 10-point rules) plus the tail in ``x = log log r``.
    """
    if r_max is None:
        r_max = max(10.0 * r0, 1000.0)
        floor = max(10.0 * r0, 100.0)
        while r_max > floor and not _finite_at(phi_bar, r_max):
            r_max = max(r_max / 2, floor)
    if not r_max > r0:
        raise ValueError("need r_max > r0")
    lo = max(r0, r_max / 10.0)
    rs = np.geomspace(max(lo, 1e-12), r_max, 64)
    try:
        vals = phi_bar.value(rs)
        inner = phi_bar.value(np.linspace(r0, r_max, 512))
    except DomainError as exc:
        return TailVerdict(INCONCLUSIVE, detail=f"evaluation failed: {exc}")
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(inner))):
        return TailVerdict(INCONCLUSIVE, detail="non-finite samples")
    if np.any(inner <= 0):
        return TailVerdict(INCONCLUSIVE, detail="phi_bar not positive on [r0, r_max]")

    p = _slope(np.log(rs), np.log(vals))
    q = None
    if p < BAND[0]:
        kind = DIVERGENT
    elif lo <= 1.0:
        kind = CONVERGENT if p > BAND[1] else INCONCLUSIVE
    else:
        design = np.column_stack([np.ones_like(rs), np.log(rs), np.log(np.log(rs))])
        _, pj, q = (float(c) for c in np.linalg.lstsq(design, np.log(vals), rcond=None)[0])
        if p > BAND[1] and pj > BAND[1]:
            kind, q = CONVERGENT, None
        elif abs(pj - 1.0) <= P_LINEAR_TOL:
            kind = CONVERGENT if q > BAND[1] else DIVERGENT if q < BAND[0] else INCONCLUSIVE
        else:
            kind = INCONCLUSIVE
    if kind != CONVERGENT:
        return TailVerdict(kind, exponent=p, log_exponent=q,
                           detail=f"growth exponent p={p:.4g}" + (f", q={q:.4g}" if q is not None else ""))

    # direct quadrature well past the fit window, so oscillatory terms are
    # resolved before the change of variables
    r_split = max(r_max, R_SPLIT)
    while r_split > r_max and not _finite_at(phi_bar, r_split):
        r_split = max(r_split / 2, r_max)
    try:
        body, err = _panel_quad(phi_bar, r0, r_split, max(1, budget // 20))
    except DomainError as exc:
        return TailVerdict(INCONCLUSIVE, exponent=p, log_exponent=q, detail=f"evaluation failed: {exc}")
    try:
        tail, tail_err = _loglog_tail(phi_bar, r_split, 400)
    except DomainError:
        # crude power-law bound from the fitted exponent
        tail = float(r_split / ((p - 1.0) * phi_bar.value(r_split)))
        tail_err = tail
    if not np.isfinite(tail):
        return TailVerdict(INCONCLUSIVE, exponent=p, log_exponent=q,
                           detail="tail remainder could not be bounded")
    return TailVerdict(CONVERGENT, body + tail, err + tail_err + 1e-15 * abs(body + tail),
                       exponent=p, log_exponent=q, detail=f"growth exponent p={p:.4g}")


@dataclass
class ComparisonWarp:
    """Radial comparison warp ``phi_bar`` asserted from ``r0`` on."""

    phi_bar: WarpField
    r0: float
    tail: TailVerdict | None = None
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if isinstance(self.phi_bar, str):
            self.phi_bar = WarpField.radial(self.phi_bar)
        if not self.phi_bar.is_radial:
            raise ValueError("comparison warp must depend on r only")
        if self.phi_bar.coords:
            self.phi_bar = self.phi_bar.with_coords(())
        if self.tail is None:
            self.tail = tail_integral(self.phi_bar, self.r0)

    def log_derivative(self, r):
        return self.phi_bar.d_r(r) / self.phi_bar.value(r)

    def scaled(self, c: float) -> "ComparisonWarp":
        t = self.tail
        if t is not None and t.convergent:
            t = TailVerdict(t.kind, t.value / c, t.error_bound / c, t.exponent, t.log_exponent, t.detail)
        return ComparisonWarp(self.phi_bar.scaled(c), self.r0, t, list(self.notes))


def comparison_warp(text: str | WarpField, r0: float, r_max: float | None = None) -> ComparisonWarp:
    field_ = WarpField.radial(text) if isinstance(text, str) else text
    return ComparisonWarp(field_, r0, tail_integral(field_.with_coords(()), r0, r_max))


@dataclass(frozen=True)
class SampleGrid:
    """Sample grid for the "for all omega" hypotheses.

    ``seed`` shifts the periodic omega nodes by a random fraction of a cell.
    """

    n_omega: int = 128
    n_radial: int = 256
    r_max: float | None = None
    seed: int = 0


@dataclass
class CriterionReport:
    domination_ok: bool
    log_derivative_ok: bool
    integral_verdict: TailVerdict
    worst_domination: float = np.nan
    worst_log_derivative: float = np.nan
    diagnostics: list[str] = field(default_factory=list)

    @property
    def overall(self) -> str:
        ok = self.domination_ok and self.log_derivative_ok and self.integral_verdict.convergent
        return SOLVABLE if ok else NOT_ESTABLISHED

    def to_text(self) -> str:
        v = self.integral_verdict
        lines = [
            f"overall: {self.overall}",
            f"domination_ok: {self.domination_ok}",
            f"log_derivative_ok: {self.log_derivative_ok}",
            f"integral_verdict: {v.kind}",
            f"integral_value: {v.value if v.value is not None else 'n/a'}",
            f"integral_error_bound: {v.error_bound if v.error_bound is not None else 'n/a'}",
            f"growth_exponent: {v.exponent if v.exponent is not None else 'n/a'}",
            f"worst_domination_margin: {self.worst_domination:.6g}",
            f"worst_log_derivative_margin: {self.worst_log_derivative:.6g}",
        ]
        lines += [f"note: {d}" for d in self.diagnostics]
        return "\n".join(lines) + "\n"


def check_criterion(end: EndSpec, comparison: ComparisonWarp,
                    sample_grid: SampleGrid | None = None) -> CriterionReport:
    """Check domination, log-derivative ordering and tail convergence on samples.

    Margins are reported as ``min(phi - phi_bar)`` and
    ``min(phi_r/phi - phi_bar_r/phi_bar)``; ties up to a relative 1e-12 pass.
    """
    grid = sample_grid or SampleGrid()
    if comparison.r0 < end.r_start:
        raise ValueError("comparison.r0 must be >= end.r_start")
    r_hi = grid.r_max if grid.r_max is not None else max(comparison.r0 + 20.0, 2 * comparison.r0)
    rng = np.random.default_rng(grid.seed)
    offset = float(rng.random()) if grid.seed else 0.0
    nodes = end.cross_section.nodes(grid.n_omega, offset=offset)
    rs = np.linspace(comparison.r0, r_hi, grid.n_radial)
    mesh = np.meshgrid(*nodes, rs, indexing="ij")
    om, rr = tuple(mesh[:-1]), mesh[-1]
    diagnostics = []
    try:
        phi = end.warp.value(rr, om)
        phi_r = end.warp.d_r(rr, om)
        bar = comparison.phi_bar.value(rs)
        bar_r = comparison.phi_bar.d_r(rs)
    except DomainError as exc:
        verdict = TailVerdict(INCONCLUSIVE, detail=str(exc))
        return CriterionReport(False, False, verdict, diagnostics=[f"evaluation failed: {exc}"])

    dom = phi - bar
    dom_ok = bool(np.all(dom >= -1e-12 * np.abs(phi)))
    lhs = bar_r / bar
    rhs = phi_r / phi
    gap = rhs - lhs
    log_ok = bool(np.all(lhs > 0) and np.all(gap >= -1e-12 * np.abs(rhs)))
    if not dom_ok:
        i = np.unravel_index(np.argmin(dom), dom.shape)
        diagnostics.append(f"phi_bar > phi at r={rr[i]:.6g}")
    if not log_ok:
        i = np.unravel_index(np.argmin(gap), gap.shape)
        diagnostics.append(f"log-derivative ordering fails at r={rr[i]:.6g}")
    return CriterionReport(dom_ok, log_ok, comparison.tail, float(dom.min()),
                           float(gap.min()), diagnostics)


@dataclass(frozen=True)
class SturmResult:
    part: str
    max_violation: float
    radii: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray

    @property
    def holds(self) -> bool:
        return self.max_violation <= 1e-8


def sturm_compare(u0: float, u0p: float, v0: float, v0p: float,
                  quotient_u: Callable, quotient_v: Callable, a: float, b: float,
                  part: str = "a", n_check: int = 2001, rtol: float = 1e-11) -> SturmResult:
    """Integrate ``u'' = q_u u`` and ``v'' = q_v v`` and measure the comparison conclusion.

    Part ``"a"`` (``u(a) <= v(a)``, ``u'(a) <= v'(a)``) concludes ``u <= v``;
    part ``"b"`` (``u'/u <= v'/v`` at ``a``) concludes ``u'/u <= v'/v``.
    Returns the largest violation of the conclusion on ``[a, b]`` (0 when it
    holds). Non-strict initial inequalities are accepted; the conclusion
    holds in the limit.
    """
    if part not in ("a", "b"):
        raise ValueError("part must be 'a' or 'b'")
    if min(u0, v0) <= 0:
        raise ValueError("u and v must be positive at a")
    if part == "a" and not (u0 <= v0 and u0p <= v0p):
        raise ValueError("part (a) needs u(a) <= v(a) and u'(a) <= v'(a)")
    if part == "b" and not (u0p / u0 <= v0p / v0):
        raise ValueError("part (b) needs u'(a)/u(a) <= v'(a)/v(a)")
    rs = np.linspace(a, b, n_check)
    qu = np.broadcast_to(np.asarray(quotient_u(rs), float), rs.shape)
    qv = np.broadcast_to(np.asarray(quotient_v(rs), float), rs.shape)
    if np.any(qu > qv + 1e-12 * np.abs(qv)):
        i = int(np.argmax(qu - qv))
        raise ValueError(f"quotient_u > quotient_v at r={rs[i]:.6g}")

    def rhs(r, y):
        return [y[1], float(quotient_u(r)) * y[0], y[3], float(quotient_v(r)) * y[2]]

    sol = solve_ivp(rhs, (a, b), [u0, u0p, v0, v0p], method="RK45", t_eval=rs,
                    rtol=rtol, atol=1e-14 * max(1.0, abs(v0), abs(u0)))
    if not sol.success or sol.y.shape[1] != rs.size:
        raise RuntimeError(f"ODE integration failed before b: {sol.message}")
    u, du, v, dv = sol.y
    if not np.all(np.isfinite(sol.y)):
        raise RuntimeError("ODE blow-up before b")
    if np.any(u <= 0) or np.any(v <= 0):
        raise RuntimeError("solutions left the positive cone")
    if part == "a":
        viol = np.maximum(u - v, 0.0) / np.maximum(1.0, np.abs(v))
    else:
        lu, lv = du / u, dv / v
        viol = np.maximum(lu - lv, 0.0) / np.maximum(1.0, np.abs(lv))
    return SturmResult(part, float(viol.max()), rs, u, v, du, dv)


class CurvatureBoundError(ValueError):
    pass


def hyperbolic_comparison_warp(end: EndSpec, a: float, n_omega: int = 128,
                               n_radial: int = 256, r_max: float | None = None) -> ComparisonWarp:
    """Comparison warp ``alpha sinh(a (r - r_start) + 1)`` for an end with ``K <= -a^2``.

    ``alpha`` is 0.9 times the smallest of the three upper bounds
    ``min phi / sinh 1``, ``min(phi_r/phi) / a`` and ``min phi_r / (a cosh 1)``,
    the minima taken over the sampled cross-section at ``r_start``.
    """
    if a == 0:
        raise ValueError("the curvature constant a must be nonzero")
    a = abs(float(a))
    r_s = end.r_start
    hi = r_max if r_max is not None else r_s + 20.0
    nodes = end.cross_section.nodes(n_omega)
    mesh = np.meshgrid(*nodes, np.linspace(r_s, hi, n_radial), indexing="ij")
    om, rr = tuple(mesh[:-1]), mesh[-1]
    K = radial_sectional_curvature(end, om, rr)
    tol = 1e-10 * a * a
    if np.any(K > -a * a + tol):
        i = np.unravel_index(np.argmax(K), K.shape)
        raise CurvatureBoundError(
            f"curvature {K[i]:.6g} > -a^2 = {-a * a:.6g} at omega={tuple(float(o[i]) for o in om)}, "
            f"r={rr[i]:.6g}"
        )
    base = tuple(np.meshgrid(*nodes, indexing="ij"))
    phi0 = end.warp.value(r_s, base)
    phi0_r = end.warp.d_r(r_s, base)
    m_phi = float(np.min(phi0))
    m_log = float(np.min(phi0_r / phi0))
    m_dr = float(np.min(phi0_r))
    if min(m_phi, m_log, m_dr) <= 0:
        raise ValueError("a minimum over the cross-section at r_start is non-positive")
    bounds = (m_phi / np.sinh(1.0), m_log / a, m_dr / (a * np.cosh(1.0)))
    alpha = float(0.9 * min(bounds))
    shift = f" - {float(r_s)!r}" if r_s else ""
    text = f"{alpha!r}*sinh({a!r}*(r{shift}) + 1)"
    notes = [f"alpha bounds: {bounds[0]:.6g}, {bounds[1]:.6g}, {bounds[2]:.6g}"]
    if a / np.tanh(1.0) > m_log * (1 + 1e-12):
        # log-derivative of alpha sinh(.) at r_start is a coth 1, independent of alpha
        msg = (f"a*coth(1) = {a / np.tanh(1.0):.6g} exceeds min phi_r/phi = {m_log:.6g} at r_start; "
               "the log-derivative ordering may fail")
        notes.append(msg)
        warnings.warn(msg, stacklevel=2)
    return ComparisonWarp(WarpField.radial(text), r_s, None, notes)
