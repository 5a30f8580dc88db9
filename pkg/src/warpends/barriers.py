"""Local barriers at points at infinity and their discrete superharmonicity audit.

On a cap ``U`` around ``p`` with first Dirichlet eigenfunction ``vartheta < 0``
(``Delta vartheta = -lambda1^2 vartheta``), the barrier is

    Theta_A(omega, r) = sigma(r) vartheta(omega) - A,
    sigma(r) = exp(-lambda1 * int_r^oo ds / phi_bar(s)),   A = vartheta(p) = -1.

In two dimensions with the half-circle cap this is ``1 - sigma(r) cos(theta - theta0)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .criteria import ComparisonWarp, tail_integral
from .expr import WarpField
from .geometry import EndSpec, laplacian_coefficients

__all__ = [
    "CapChart",
    "CapEigenfunction",
    "SigmaProfile",
    "Barrier",
    "AuditGrid",
    "AuditReport",
    "cap_eigenfunction",
    "sigma_profile",
    "build_barrier",
    "barrier_2d",
    "audit_superharmonic",
    "audit_refinement",
    "conformal_rescale",
]


def _wrap(x, center, period):
    """Signed periodic offset of ``x`` from ``center`` in ``[-period/2, period/2)``."""
    return (np.asarray(x, float) - center + period / 2) % period - period / 2


@dataclass
class CapChart:
    """A coordinate cap centred at ``center``: an interval on S^1 or a rectangle on T^2.

    ``psi`` is the conformal factor of the cross-section metric on the cap
    (``None`` means the flat factor 1); ``eta`` is its infimum over the cap.
    """

    center: tuple[float, ...]
    half_widths: tuple[float, ...]
    periods: tuple[float, ...] = (2 * np.pi,)
    psi: WarpField | None = None
    eta: float = field(default=1.0, init=False)

    def __post_init__(self):
        self.center = tuple(float(c) for c in np.atleast_1d(self.center))
        self.half_widths = tuple(float(w) for w in np.atleast_1d(self.half_widths))
        if len(self.periods) != len(self.center):
            self.periods = tuple(self.periods) * len(self.center)
        if len(self.half_widths) != len(self.center):
            raise ValueError("one half-width per cross-section dimension")
        for w, L in zip(self.half_widths, self.periods):
            if w > 0 and not 2 * w < L:
                raise ValueError("cap must lie strictly inside the fundamental domain")
        if self.psi is not None:
            pts = self.nodes(65, closed=True)
            mesh = np.meshgrid(*pts, indexing="ij")
            vals = self.psi.value(0.0, tuple(mesh))
            self.eta = float(np.min(vals))
            if self.eta <= 0:
                raise ValueError("conformal factor must be positive on the cap")

    @classmethod
    def interval(cls, theta0: float, w: float = np.pi / 2) -> "CapChart":
        return cls((theta0,), (w,), (2 * np.pi,))

    @classmethod
    def rectangle(cls, center: Sequence[float], w_u: float, w_v: float,
                  periods: Sequence[float] = (2 * np.pi, 2 * np.pi)) -> "CapChart":
        return cls(tuple(center), (w_u, w_v), tuple(periods))

    @property
    def kind(self) -> str:
        return "interval" if len(self.center) == 1 else "rectangle"

    def nodes(self, n: int | Sequence[int], closed: bool = True,
              half_widths: Sequence[float] | None = None) -> tuple[np.ndarray, ...]:
        hw = self.half_widths if half_widths is None else tuple(half_widths)
        if np.isscalar(n):
            n = (int(n),) * len(self.center)
        return tuple(np.linspace(c - w, c + w, k) for c, w, k in zip(self.center, hw, n))

    def offsets(self, omega: Sequence) -> tuple:
        return tuple(_wrap(x, c, L) for x, c, L in zip(omega, self.center, self.periods))


@dataclass(frozen=True)
class CapEigenfunction:
    """Closed-form first Dirichlet eigenfunction of a flat cap, negative inside."""

    chart: CapChart
    lambda1: float
    A: float = -1.0

    def _factors(self, omega):
        offs = self.chart.offsets(omega)
        return [np.pi / (2 * w) for w in self.chart.half_widths], offs

    def __call__(self, omega: Sequence):
        ks, offs = self._factors(omega)
        out = -np.ones(np.broadcast_shapes(*(np.shape(o) for o in offs)))
        for k, x in zip(ks, offs):
            out = out * np.where(np.abs(x) * k <= np.pi / 2, np.cos(k * x), 0.0)
        return out

    def laplacian(self, omega: Sequence):
        return -self.lambda1**2 * self(omega)

    def gradient(self, omega: Sequence) -> tuple:
        ks, offs = self._factors(omega)
        cos = [np.cos(k * x) for k, x in zip(ks, offs)]
        grads = []
        for i, (k, x) in enumerate(zip(ks, offs)):
            g = k * np.sin(k * x)
            for j, c in enumerate(cos):
                if j != i:
                    g = g * c
            grads.append(g)
        return tuple(grads)


def cap_eigenfunction(chart: CapChart) -> CapEigenfunction:
    """``vartheta = -prod cos(pi x_i / (2 w_i))`` with ``lambda1^2 = sum (pi/(2 w_i))^2``."""
    if any(w <= 0 for w in chart.half_widths):
        raise ValueError("degenerate cap: half-width must be positive")
    lam2 = sum((np.pi / (2 * w)) ** 2 for w in chart.half_widths)
    return CapEigenfunction(chart, float(np.sqrt(lam2)), -1.0)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


class SigmaProfile:
    """``sigma(r) = exp(-lambda1 T(r))`` with ``T(r) = int_r^oo ds/phi_bar(s)``.

    ``T`` is anchored at ``r_anchor`` by :func:`~warpends.criteria.tail_integral`
    and continued by composite Gauss-Legendre quadrature, so values and the
    exact derivatives ``sigma' = lambda1 sigma / phi_bar``,
    ``sigma'' = lambda1 sigma (lambda1 - phi_bar_r) / phi_bar^2`` are
    available at any ``r >= comparison.r0``.
    """

    def __init__(self, comparison: ComparisonWarp, lambda1: float, r_anchor: float | None = None):
        tail = comparison.tail
        if tail is None or not tail.convergent:
            kind = None if tail is None else tail.kind
            raise ValueError(f"sigma needs a convergent tail integral (got {kind}); sigma would vanish")
        self.comparison = comparison
        self.phi_bar = comparison.phi_bar
        self.lambda1 = float(lambda1)
        self.r_anchor = float(r_anchor if r_anchor is not None else comparison.r0)
        if self.r_anchor == comparison.r0:
            self.T_anchor, self.T_error = tail.value, tail.error_bound
        else:
            t = tail_integral(self.phi_bar, self.r_anchor)
            if not t.convergent:
                raise ValueError("tail integral from r_anchor is not convergent")
            self.T_anchor, self.T_error = t.value, t.error_bound

    def _segment(self, a, b):
        mid, half = (a + b) / 2, (b - a) / 2
        s = mid[:, None] + half[:, None] * _GL_X[None, :]
        return half * (_GL_W[None, :] / self.phi_bar.value(s)).sum(axis=1)

    def tail(self, r):
        """``T(r)`` for scalar or array ``r``."""
        r = np.asarray(r, float)
        flat = r.ravel()
        pts = np.unique(np.concatenate([flat, [self.r_anchor]]))
        # Gauss-Legendre panels of width max(0.25, r/32): geometric growth keeps
        # far targets cheap while 1/phi_bar varies little per panel
        fine = [pts[:1]]
        for a, b in zip(pts[:-1], pts[1:]):
            if b <= 8.0:
                edges = np.linspace(a, b, max(1, int(np.ceil((b - a) / 0.25))) + 1)
            else:
                lo = max(a, 8.0)
                head = np.linspace(a, lo, max(1, int(np.ceil((lo - a) / 0.25))) + 1) if lo > a else np.array([a])
                k = max(1, int(np.ceil(np.log(b / lo) / np.log1p(1 / 32))))
                edges = np.concatenate([head, np.geomspace(lo, b, k + 1)[1:]])
            fine.append(edges[1:])
        grid = np.concatenate(fine)
        seg = self._segment(grid[:-1], grid[1:])
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        ia = np.searchsorted(grid, self.r_anchor)
        T_grid = self.T_anchor + (cum[ia] - cum)
        out = T_grid[np.searchsorted(grid, flat)]
        return out.reshape(r.shape) if r.shape else float(out[0])

    def __call__(self, r):
        return np.exp(-self.lambda1 * self.tail(r))

    def derivatives(self, r):
        s = self(r)
        pb = self.phi_bar.value(r)
        pb_r = self.phi_bar.d_r(r)
        d1 = self.lambda1 * s / pb
        d2 = self.lambda1 * s * (self.lambda1 - pb_r) / pb**2
        return s, d1, d2


@dataclass(frozen=True)
class SampledSigma:
    radii: np.ndarray
    values: np.ndarray
    profile: SigmaProfile

    def interpolate(self, r):
        return np.interp(r, self.radii, self.values)

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0))


def sigma_profile(comparison: ComparisonWarp, lambda1: float, r_grid: Sequence[float]) -> SampledSigma:
    r_grid = np.asarray(r_grid, float)
    prof = SigmaProfile(comparison, lambda1, r_anchor=float(r_grid.max()))
    return SampledSigma(r_grid, prof(r_grid), prof)


@dataclass
class Barrier:
    """``Theta_A = sigma(r) vartheta(omega) - A`` on ``cap x [r0, oo)``."""

    chart: CapChart
    eig: CapEigenfunction
    sigma: SigmaProfile
    r0: float
    audit_half_widths: tuple[float, ...] | None = None
    audit_r_min: float | None = None

    @property
    def A(self) -> float:
        return self.eig.A

    def value(self, omega: Sequence, r):
        return self.sigma(r) * self.eig(omega) - self.A

    __call__ = value

    def value_at_infinity(self, omega: Sequence):
        return self.eig(omega) - self.A

    def analytic_laplacian(self, end: EndSpec, omega: Sequence, r):
        """Exact ``Delta_g Theta_A`` from the closed forms of sigma and vartheta."""
        s, d1, d2 = self.sigma.derivatives(r)
        c = laplacian_coefficients(end, omega, r)
        th = self.eig(omega)
        tangential = c.c_N * self.eig.laplacian(omega)
        for cg, g in zip(c.c_grad, self.eig.gradient(omega)):
            tangential = tangential + cg * g
        return th * (d2 + c.c_r * d1) + s * tangential

    def inequality_residual(self, end: EndSpec, omega: Sequence, r):
        """``sigma'' + c_r sigma' - lambda1^2 c_N sigma``; nonnegative when the criterion holds."""
        s, d1, d2 = self.sigma.derivatives(r)
        c = laplacian_coefficients(end, omega, r)
        return d2 + c.c_r * d1 - self.eig.lambda1**2 * c.c_N * s


def build_barrier(chart: CapChart, comparison: ComparisonWarp, r_anchor: float | None = None) -> Barrier:
    eig = cap_eigenfunction(chart)
    sigma = SigmaProfile(comparison, eig.lambda1, r_anchor)
    return Barrier(chart, eig, sigma, comparison.r0)


def barrier_2d(theta0: float, comparison: ComparisonWarp, r_grid: Sequence[float] | None = None) -> Barrier:
    """Two-dimensional local barrier ``1 - sigma(r) cos(theta - theta0)``.

    The audit domain is restricted to ``|theta - theta0| <= pi/3`` and
    ``r >= R`` with ``sigma(R) >= 1/2``.
    """
    chart = CapChart.interval(theta0, np.pi / 2)
    anchor = None if r_grid is None else float(np.max(r_grid))
    b = build_barrier(chart, comparison, anchor)
    b.audit_half_widths = (np.pi / 3,)
    b.audit_r_min = _sigma_half_radius(b.sigma, comparison.r0)
    return b


def _sigma_half_radius(sigma: SigmaProfile, r0: float) -> float:
    if sigma(r0) >= 0.5:
        return r0
    hi = max(2 * r0, r0 + 1.0)
    while sigma(hi) < 0.5:
        hi = 2 * hi
    lo = r0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if sigma(mid) < 0.5 else (lo, mid)
    return hi


@dataclass(frozen=True)
class AuditGrid:
    """Tensor grid ``cap nodes x radial nodes`` (endpoints included)."""

    n_omega: int = 64
    n_radial: int = 256
    r_max: float = 10.0
    r_min: float | None = None

    def refined(self, factor: int = 2) -> "AuditGrid":
        return replace(self, n_omega=(self.n_omega - 1) * factor + 1,
                       n_radial=(self.n_radial - 1) * factor + 1)


@dataclass
class AuditReport:
    max_discrete_laplacian: float
    max_analytic_laplacian: float
    max_abs_error: float
    min_inequality_residual: float
    min_value: float
    value_at_p_rmax: float
    h_omega: float
    h_r: float
    grid: AuditGrid
    r_range: tuple[float, float]
    underresolved: bool = False
    notes: list[str] = field(default_factory=list)
    refinement_orders: list[float] = field(default_factory=list)

    @property
    def superharmonic(self) -> bool:
        """Discrete Laplacian nonpositive up to the measured stencil error."""
        return self.max_discrete_laplacian <= self.max_abs_error + 1e-14

    @property
    def ok(self) -> bool:
        return self.superharmonic and self.min_value >= 0 and not self.underresolved

    def to_text(self) -> str:
        lines = [
            f"ok: {self.ok}",
            f"max_discrete_laplacian: {self.max_discrete_laplacian:.6e}",
            f"max_analytic_laplacian: {self.max_analytic_laplacian:.6e}",
            f"max_stencil_error: {self.max_abs_error:.6e}",
            f"min_inequality_residual: {self.min_inequality_residual:.6e}",
            f"min_value: {self.min_value:.6e}",
            f"value_at_p_rmax: {self.value_at_p_rmax:.6e}",
            f"grid: n_omega={self.grid.n_omega} n_radial={self.grid.n_radial} "
            f"r=[{self.r_range[0]:g},{self.r_range[1]:g}]",
            f"h_omega: {self.h_omega:.6g}",
            f"h_r: {self.h_r:.6g}",
            f"underresolved: {self.underresolved}",
        ]
        if self.refinement_orders:
            lines.append("refinement_orders: " + ", ".join(f"{o:.4f}" for o in self.refinement_orders))
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def _d1(f, h, axis):
    sl = [slice(1, -1)] * f.ndim
    hi, lo = list(sl), list(sl)
    hi[axis] = slice(2, None)
    lo[axis] = slice(None, -2)
    return (f[tuple(hi)] - f[tuple(lo)]) / (2 * h)


def _d2(f, h, axis):
    sl = [slice(1, -1)] * f.ndim
    hi, lo = list(sl), list(sl)
    hi[axis] = slice(2, None)
    lo[axis] = slice(None, -2)
    return (f[tuple(hi)] - 2 * f[tuple(sl)] + f[tuple(lo)]) / h**2


def audit_superharmonic(barrier: Barrier, end: EndSpec, grid: AuditGrid | None = None) -> AuditReport:
    """Second-order stencil evaluation of ``Delta_g Theta_A`` on a cap x radial grid.

    Stencil error is measured against :meth:`Barrier.analytic_laplacian` at
    the interior nodes. The grid is flagged underresolved when a radial step
    exceeds ``2 / |c_r|`` (the drift term would dominate the stencil) or the
    warp changes by more than half between neighbouring radial nodes.
    """
    grid = grid or AuditGrid()
    r_min = grid.r_min
    if r_min is None:
        r_min = barrier.audit_r_min if barrier.audit_r_min is not None else barrier.r0
    r_min = max(r_min, barrier.r0)
    if not grid.r_max > r_min:
        raise ValueError("audit grid needs r_max > r_min")
    nodes = barrier.chart.nodes(grid.n_omega, closed=True, half_widths=barrier.audit_half_widths)
    rs = np.linspace(r_min, grid.r_max, grid.n_radial)
    mesh = np.meshgrid(*nodes, rs, indexing="ij")
    om, rr = tuple(mesh[:-1]), mesh[-1]
    h_om = [float(x[1] - x[0]) for x in nodes]
    h_r = float(rs[1] - rs[0])

    theta = barrier.value(om, rr)
    inner = tuple(slice(1, -1) for _ in mesh)
    om_i = tuple(o[inner] for o in om)
    r_i = rr[inner]
    c = laplacian_coefficients(end, om_i, r_i)
    rax = theta.ndim - 1
    disc = c.c_rr * _d2(theta, h_r, rax) + c.c_r * _d1(theta, h_r, rax)
    for ax, h in enumerate(h_om):
        disc = disc + c.c_N * _d2(theta, h, ax)
        disc = disc + c.c_grad[ax] * _d1(theta, h, ax)
    exact = barrier.analytic_laplacian(end, om_i, r_i)
    resid = barrier.inequality_residual(end, om_i, r_i)

    notes = []
    underresolved = False
    drift = float(np.max(np.abs(c.c_r)))
    if h_r * drift > 2:
        underresolved = True
        notes.append(f"radial step {h_r:.3g} exceeds 2/max|c_r| = {2 / drift:.3g}")
    phi_line = end.warp.value(rs, tuple(np.full_like(rs, p) for p in barrier.chart.center))
    if np.any(np.abs(np.diff(np.log(phi_line))) > np.log(1.5)):
        underresolved = True
        notes.append("warp varies by more than 50% between radial nodes")
    if end.n != 3 and not end.warp.is_radial:
        notes.append("inequality residual ignores the tangential gradient term (n != 3)")

    p_line = barrier.value(tuple(np.asarray(p) for p in barrier.chart.center), grid.r_max)
    return AuditReport(
        max_discrete_laplacian=float(disc.max()),
        max_analytic_laplacian=float(exact.max()),
        max_abs_error=float(np.max(np.abs(disc - exact))),
        min_inequality_residual=float(resid.min()),
        min_value=float(theta.min()),
        value_at_p_rmax=float(p_line),
        h_omega=max(h_om),
        h_r=h_r,
        grid=grid,
        r_range=(float(r_min), float(grid.r_max)),
        underresolved=underresolved,
        notes=notes,
    )


def audit_refinement(barrier: Barrier, end: EndSpec, coarse: AuditGrid, levels: int = 3) -> list[AuditReport]:
    """Audit on ``levels`` nested grids (each halving the mesh) and record observed orders."""
    grids = [coarse]
    for _ in range(levels - 1):
        grids.append(grids[-1].refined())
    reports = [audit_superharmonic(barrier, end, g) for g in grids]
    orders = [
        float(np.log2(a.max_abs_error / b.max_abs_error))
        for a, b in zip(reports[:-1], reports[1:])
    ]
    for rep in reports:
        rep.refinement_orders = orders
    return reports


def conformal_rescale(end: EndSpec, chart: CapChart, comparison: ComparisonWarp) -> tuple[EndSpec, ComparisonWarp]:
    """Rewrite the end over the flat chart metric: ``mu = psi phi`` and ``mu_bar = eta phi_bar``."""
    if chart.psi is None:
        return end, comparison
    psi = chart.psi.with_coords(end.coords)
    mu = end.warp.times(psi)
    new_end = EndSpec(end.cross_section, mu, end.r_start, end.expansive_from, end.boundary,
                      end.check_until, validate=end.validate, label=end.label)
    return new_end, comparison.scaled(chart.eta)
