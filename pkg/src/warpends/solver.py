"""Bounded harmonic functions on truncated ends by finite differences and exhaustion.

A single end ``N x [r_start, R]`` (Dirichlet data on both walls) or a
two-ended cylinder ``N x [-R, R]`` glued at ``r = 0`` is discretised with
second-order stencils of

    Delta_g = d_rr + (n-1) (phi_r/phi) d_r + phi^-2 Delta_N + (n-3) phi^-3 grad_N phi . grad_N

periodic in the cross-section. Data at infinity is imposed at ``r = R_k`` for a
growing schedule ``R_0 < R_1 < ...`` and probe values are watched for Cauchy
convergence.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .expr import WarpField
from .geometry import EndSpec, laplacian_coefficients

__all__ = [
    "ManifoldConfig",
    "Resolution",
    "DiscreteProblem",
    "SolveResult",
    "ExhaustionStep",
    "MaximumPrincipleError",
    "SolveError",
    "RadialProfile",
    "assemble",
    "solve",
    "solve_config",
    "exhaust",
    "exhaust_ends",
    "radial_mode_oracle",
    "two_end_mode_oracle",
    "liouville_witness",
    "WitnessResult",
]

log = logging.getLogger(__name__)

CONVERGED, NOT_CONVERGED = "Converged", "NotConverged"


class MaximumPrincipleError(ValueError):
    """Stencil coefficients lost the sign pattern that gives a discrete maximum principle."""


class SolveError(RuntimeError):
    pass


def _datum(value, coords) -> WarpField:
    if isinstance(value, WarpField):
        return value if value.coords == tuple(coords) else value.with_coords(coords)
    return WarpField(str(value) if not isinstance(value, str) else value, coords)


def _eval_datum(f: WarpField, omega):
    return f.value(0.0, omega)


@dataclass
class ManifoldConfig:
    """Truncatable manifold: one end with an inner wall, or two ends glued at ``r = 0``.

    ``boundary`` holds the data at infinity per end (``[f]`` or ``[f_plus, f_minus]``);
    ``inner_data`` is the Dirichlet datum on the inner wall of a single end.
    """

    topology: str
    ends: list[EndSpec]
    boundary: list[WarpField]
    inner_data: WarpField | None = None
    uniform_bounds: tuple[float, float] | None = None
    gluing_tol: float = 1e-8

    def __post_init__(self):
        if self.topology not in ("single", "two"):
            raise ValueError("topology must be 'single' or 'two'")
        want = 1 if self.topology == "single" else 2
        if len(self.ends) != want or len(self.boundary) != want:
            raise ValueError(f"{self.topology} topology needs {want} end(s) and data")
        coords = self.ends[0].coords
        self.boundary = [_datum(f, coords) for f in self.boundary]
        if self.topology == "single":
            self.inner_data = _datum(0.0 if self.inner_data is None else self.inner_data, coords)
        else:
            self._check_gluing()
        lo, hi = self.data_range()
        if self.uniform_bounds is None:
            self.uniform_bounds = (lo, hi)
        m, M = self.uniform_bounds
        if lo < m - 1e-12 or hi > M + 1e-12:
            raise ValueError(f"boundary data range [{lo:.6g}, {hi:.6g}] violates uniform bounds [{m}, {M}]")

    @classmethod
    def single_end(cls, end: EndSpec, boundary, inner_data=0.0, **kw) -> "ManifoldConfig":
        return cls("single", [end], [boundary], inner_data, **kw)

    @classmethod
    def two_ends(cls, plus: EndSpec, minus: EndSpec, f_plus, f_minus, **kw) -> "ManifoldConfig":
        return cls("two", [plus, minus], [f_plus, f_minus], None, **kw)

    @property
    def cross_section(self):
        return self.ends[0].cross_section

    def _check_gluing(self):
        plus, minus = self.ends
        if plus.cross_section != minus.cross_section:
            raise ValueError("glued ends must share the cross-section")
        if plus.r_start != 0 or minus.r_start != 0:
            raise ValueError("glued ends must start at r = 0")
        om = tuple(np.meshgrid(*plus.cross_section.nodes(16), indexing="ij"))
        dv = np.abs(plus.warp.value(0.0, om) - minus.warp.value(0.0, om))
        # outward radii are opposite, so first derivatives must cancel
        dd = np.abs(plus.warp.d_r(0.0, om) + minus.warp.d_r(0.0, om))
        if dv.max() > self.gluing_tol or dd.max() > self.gluing_tol:
            raise ValueError(f"warps are not C^1-glued at r = 0 (value gap {dv.max():.3g}, "
                             f"derivative gap {dd.max():.3g})")

    def data_range(self, n: int = 64) -> tuple[float, float]:
        om = tuple(np.meshgrid(*self.cross_section.nodes(n), indexing="ij"))
        vals = [_eval_datum(f, om) for f in self.boundary]
        if self.inner_data is not None:
            vals.append(_eval_datum(self.inner_data, om))
        return float(min(np.min(v) for v in vals)), float(max(np.max(v) for v in vals))


@dataclass(frozen=True)
class Resolution:
    """``n_omega`` nodes per cross-section dimension and target radial spacing ``h_r``."""

    n_omega: int | tuple[int, ...] = 32
    h_r: float = 0.05

    def omega_counts(self, dim: int) -> tuple[int, ...]:
        if np.isscalar(self.n_omega):
            return (int(self.n_omega),) * dim
        return tuple(int(k) for k in self.n_omega)


@dataclass
class DiscreteProblem:
    """Sparse system for one truncation.

    ``operator`` maps all grid values to the (diagonally normalised) discrete
    Laplacian at interior nodes; ``matrix``/``rhs`` is the reduced system for
    interior unknowns with Dirichlet values eliminated.
    """

    config: ManifoldConfig
    R: float
    omega_nodes: tuple[np.ndarray, ...]
    radii: np.ndarray
    operator: sp.csr_matrix
    matrix: sp.csc_matrix
    rhs: np.ndarray
    dirichlet_values: np.ndarray
    interior: np.ndarray
    row_scale: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(x) for x in self.omega_nodes) + (len(self.radii),)

    @property
    def boundary_range(self) -> tuple[float, float]:
        vals = self.dirichlet_values[~self.interior]
        return float(vals.min()), float(vals.max())

    def constant_residual(self) -> float:
        return float(np.max(np.abs(self.operator @ np.ones(self.operator.shape[1]))))


def _radial_grid(a: float, b: float, h: float) -> np.ndarray:
    n = max(2, int(np.ceil((b - a) / h - 1e-9)))
    return np.linspace(a, b, n + 1)


def _drift_and_coeffs(config: ManifoldConfig, om, t):
    """Coefficients at nodes with signed radius ``t`` (negative on the minus end)."""
    if config.topology == "single":
        c = laplacian_coefficients(config.ends[0], om, t)
        return c.c_r, c.c_N, c.c_grad
    plus, minus = config.ends
    pos = t >= 0
    c_r = np.empty_like(t)
    c_N = np.empty_like(t)
    c_g = [np.empty_like(t) for _ in plus.coords]
    if pos.any():
        cp = laplacian_coefficients(plus, tuple(o[pos] for o in om), t[pos])
        c_r[pos], c_N[pos] = cp.c_r, cp.c_N
        for g, v in zip(c_g, cp.c_grad):
            g[pos] = v
    neg = ~pos
    if neg.any():
        cm = laplacian_coefficients(minus, tuple(o[neg] for o in om), -t[neg])
        # d/dr = -d/dt on the minus end
        c_r[neg], c_N[neg] = -cm.c_r, cm.c_N
        for g, v in zip(c_g, cm.c_grad):
            g[neg] = v
    return c_r, c_N, tuple(c_g)


def assemble(config: ManifoldConfig, R: float, resolution: Resolution | None = None) -> DiscreteProblem:
    """Build the sparse system on the truncation at radius ``R``.

    Raises
    ------
    MaximumPrincipleError
        If some off-diagonal coefficient is negative; the message gives the
        largest admissible radial spacing.
    """
    res = resolution or Resolution()
    cs = config.cross_section
    for end in config.ends:
        if R < end.expansive_from:
            raise ValueError(f"R = {R} is below expansive_from = {end.expansive_from} of {end.label}")
    counts = res.omega_counts(cs.dimension)
    nodes = cs.nodes(counts)
    h_om = [L / n for L, n in zip(cs.periods, counts)]
    if config.topology == "single":
        radii = _radial_grid(config.ends[0].r_start, R, res.h_r)
    else:
        half = _radial_grid(0.0, R, res.h_r)
        radii = np.concatenate([-half[:0:-1], half])
    h = float(radii[1] - radii[0])
    shape = tuple(counts) + (len(radii),)
    n_tot = int(np.prod(shape))
    idx = np.arange(n_tot).reshape(shape)
    mesh = np.meshgrid(*nodes, radii, indexing="ij")
    om, tt = tuple(mesh[:-1]), mesh[-1]

    inner = (slice(None),) * cs.dimension + (slice(1, -1),)
    om_i = tuple(o[inner] for o in om)
    t_i = tt[inner]
    c_r, c_N, c_g = _drift_and_coeffs(config, om_i, t_i)

    rows, cols, vals = [], [], []
    row_ids = idx[inner].ravel()

    def add(nbr, coef):
        rows.append(row_ids)
        cols.append(nbr.ravel())
        vals.append(np.broadcast_to(coef, t_i.shape).ravel())

    lo_r = 1.0 / h**2 - c_r / (2 * h)
    hi_r = 1.0 / h**2 + c_r / (2 * h)
    if np.min(lo_r) < 0 or np.min(hi_r) < 0:
        need = 2.0 / float(np.max(np.abs(c_r)))
        raise MaximumPrincipleError(
            f"radial spacing h_r = {h:.4g} too coarse for the drift term (max |c_r| = "
            f"{np.max(np.abs(c_r)):.4g}); use h_r <= {need:.4g}"
        )
    rax = cs.dimension
    add(np.roll(idx, 1, axis=rax)[inner], lo_r)
    add(np.roll(idx, -1, axis=rax)[inner], hi_r)
    offdiag_sum = lo_r + hi_r
    for ax, hw in enumerate(h_om):
        lo = c_N / hw**2 - c_g[ax] / (2 * hw)
        hi = c_N / hw**2 + c_g[ax] / (2 * hw)
        if np.min(lo) < 0 or np.min(hi) < 0:
            raise MaximumPrincipleError(
                f"cross-section spacing {hw:.4g} too coarse for the tangential gradient term; "
                "increase n_omega"
            )
        add(np.roll(idx, 1, axis=ax)[inner], lo)
        add(np.roll(idx, -1, axis=ax)[inner], hi)
        offdiag_sum = offdiag_sum + lo + hi
    # diagonal from the off-diagonals so constants are annihilated to rounding
    add(idx[inner], -offdiag_sum)

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    scale = 1.0 / offdiag_sum.ravel()
    interior = np.zeros(n_tot, bool)
    interior[row_ids] = True
    pos_of = np.full(n_tot, -1)
    pos_of[row_ids] = np.arange(row_ids.size)
    L = sp.csr_matrix((vals * scale[pos_of[rows]], (pos_of[rows], cols)), shape=(row_ids.size, n_tot))
    L.sum_duplicates()

    g = np.zeros(shape)
    om_b = tuple(o[..., 0] for o in om)
    if config.topology == "single":
        g[..., 0] = _eval_datum(config.inner_data, om_b)
        g[..., -1] = _eval_datum(config.boundary[0], om_b)
    else:
        g[..., -1] = _eval_datum(config.boundary[0], om_b)
        g[..., 0] = _eval_datum(config.boundary[1], om_b)
    g = g.ravel()
    boundary_cols = np.flatnonzero(~interior)
    A = L[:, row_ids].tocsc()
    b = -(L[:, boundary_cols] @ g[boundary_cols])
    return DiscreteProblem(config, float(R), nodes, radii, L, A, b, g, interior, scale)


DIRECT_LIMIT = 20000


def solve(problem: DiscreteProblem, tol: float = 1e-10, method: str = "auto",
          maxiter: int = 2000) -> np.ndarray:
    """Solve the reduced system; returns the full grid field with boundary values.

    ``"direct"`` uses a sparse LU factorisation with iterative refinement;
    ``"bicgstab"`` uses ILU-preconditioned BiCGSTAB. ``"auto"`` picks LU below
    ``DIRECT_LIMIT`` unknowns (LU fill on 3-D grids is prohibitive beyond
    that). All choices are deterministic.
    """
    A, b = problem.matrix, problem.rhs
    if method == "auto":
        method = "direct" if A.shape[0] <= DIRECT_LIMIT else "bicgstab"
    bnorm = np.linalg.norm(b)
    scale = bnorm if bnorm > 0 else 1.0
    if method == "direct":
        lu = spla.splu(A, permc_spec="COLAMD")
        x = lu.solve(b)
        for _ in range(5):
            r = b - A @ x
            if np.linalg.norm(r) <= tol * scale:
                break
            x = x + lu.solve(r)
    elif method == "bicgstab":
        ilu = spla.spilu(A, drop_tol=1e-5, fill_factor=20)
        M = spla.LinearOperator(A.shape, ilu.solve)
        x, info = spla.bicgstab(A, b, rtol=tol, atol=0.0, maxiter=maxiter, M=M)
        if info != 0:
            rn = np.linalg.norm(b - A @ x) / scale
            raise SolveError(f"BiCGSTAB did not converge (info={info}, relative residual {rn:.3e})")
    else:
        raise ValueError(f"unknown method {method!r}")
    rn = np.linalg.norm(b - A @ x) / scale
    if rn > tol:
        raise SolveError(f"relative residual {rn:.3e} above tolerance {tol:.1e}")
    u = problem.dirichlet_values.copy()
    u[problem.interior] = x
    return u.reshape(problem.shape)


def residual_norm(problem: DiscreteProblem, u: np.ndarray) -> float:
    x = u.ravel()[problem.interior]
    b = problem.rhs
    return float(np.linalg.norm(b - problem.matrix @ x) / max(np.linalg.norm(b), 1.0))


# -- probes -------------------------------------------------------------------


def _stencil(nodes: np.ndarray, x: float, period: float | None):
    """Indices and 4-point Lagrange weights (a single node when ``x`` hits one)."""
    n = len(nodes)
    h = nodes[1] - nodes[0]
    if period is not None:
        s = ((x - nodes[0]) % period) / h
    else:
        s = (x - nodes[0]) / h
        if s < -1e-9 or s > n - 1 + 1e-9:
            raise ValueError(f"probe coordinate {x} outside [{nodes[0]}, {nodes[-1]}]")
    k = int(np.floor(s + 1e-9))
    if abs(s - round(s)) < 1e-9:
        j = int(round(s))
        return np.array([j % n if period else j]), np.array([1.0])
    base = k - 1
    if period is None:
        base = min(max(base, 0), n - 4)
    pts = np.arange(base, base + 4)
    w = np.ones(4)
    for i in range(4):
        for j in range(4):
            if i != j:
                w[i] *= (s - pts[j]) / (pts[i] - pts[j])
    return (pts % n if period else pts), w


def probe_values(problem: DiscreteProblem, u: np.ndarray, probes: Sequence) -> np.ndarray:
    """Interpolate ``u`` at ``(omega, r)`` probes (``r`` signed on two-ended grids)."""
    periods = problem.config.cross_section.periods
    out = []
    for omega, r in probes:
        omega = tuple(np.atleast_1d(omega).astype(float))
        sten = [_stencil(nd, w, L) for nd, w, L in zip(problem.omega_nodes, omega, periods)]
        sten.append(_stencil(problem.radii, float(r), None))
        idx = np.ix_(*[s[0] for s in sten])
        block = u[idx]
        for s in reversed(sten):
            block = block @ s[1]
        out.append(float(block))
    return np.array(out)


# -- results ------------------------------------------------------------------


@dataclass(frozen=True)
class ExhaustionStep:
    R: float
    probe_values: np.ndarray
    oscillation: float
    sup_change: float | None
    residual_norm: float
    u_min: float
    u_max: float


@dataclass
class SolveResult:
    u: np.ndarray
    problem: DiscreteProblem
    residual_norm: float
    exhaustion_trace: list[ExhaustionStep] = field(default_factory=list)
    verdict: str = NOT_CONVERGED
    limit: np.ndarray | None = None
    tol_exhaustion: float | None = None

    @property
    def sup_changes(self) -> list[float]:
        return [s.sup_change for s in self.exhaustion_trace if s.sup_change is not None]

    @property
    def decay_ratios(self) -> list[float]:
        c = self.sup_changes
        return [b / a for a, b in zip(c[:-1], c[1:]) if a > 0]

    def max_principle_gap(self) -> float:
        """Largest excursion of ``u`` outside the range of its Dirichlet data (0 if none)."""
        lo, hi = self.problem.boundary_range
        return float(max(lo - self.u.min(), self.u.max() - hi, 0.0))

    def trace_text(self) -> str:
        lines = ["R,oscillation,sup_change,residual,u_min,u_max,probes"]
        for s in self.exhaustion_trace:
            sc = "" if s.sup_change is None else f"{s.sup_change:.10e}"
            pv = ";".join(f"{v:.12g}" for v in s.probe_values)
            lines.append(f"{s.R:g},{s.oscillation:.10e},{sc},{s.residual_norm:.3e},"
                         f"{s.u_min:.12g},{s.u_max:.12g},{pv}")
        lines.append(f"# verdict: {self.verdict}")
        return "\n".join(lines) + "\n"


def solve_config(config: ManifoldConfig, R: float, resolution: Resolution | None = None,
                 tol: float = 1e-10, method: str = "auto") -> SolveResult:
    problem = assemble(config, R, resolution)
    u = solve(problem, tol, method)
    return SolveResult(u, problem, residual_norm(problem, u))


def exhaust(config: ManifoldConfig, schedule: Sequence[float], probes: Sequence,
            tol_exhaustion: float = 1e-3, resolution: Resolution | None = None,
            tol: float = 1e-10, method: str = "auto") -> SolveResult:
    """Solve on each truncation of ``schedule`` and test probe values for Cauchy convergence.

    ``Converged`` when the last two probe sup-changes are below
    ``tol_exhaustion``; otherwise ``NotConverged``.
    """
    schedule = [float(R) for R in schedule]
    if any(b <= a for a, b in zip(schedule[:-1], schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    for _, r in probes:
        if abs(r) > schedule[0]:
            raise ValueError(f"probe radius {r} exceeds the first truncation {schedule[0]}")
    trace = []
    prev = None
    result = None
    for R in schedule:
        try:
            result = solve_config(config, R, resolution, tol, method)
        except (SolveError, MaximumPrincipleError, ValueError) as exc:
            raise type(exc)(f"at R = {R:g}: {exc}") from exc
        pv = probe_values(result.problem, result.u, probes)
        change = None if prev is None else float(np.max(np.abs(pv - prev)))
        trace.append(ExhaustionStep(R, pv, float(pv.max() - pv.min()), change,
                                    result.residual_norm, float(result.u.min()), float(result.u.max())))
        log.info("R=%g probes=%s change=%s", R, pv, change)
        prev = pv
    result.exhaustion_trace = trace
    result.tol_exhaustion = tol_exhaustion
    changes = [s.sup_change for s in trace if s.sup_change is not None]
    if len(changes) >= 2 and changes[-1] < tol_exhaustion and changes[-2] < tol_exhaustion:
        result.verdict = CONVERGED
        result.limit = trace[-1].probe_values
    return result


def exhaust_ends(configs: Sequence[ManifoldConfig], uniform_bounds: tuple[float, float],
                 **kw) -> list[SolveResult]:
    """Independent single-end exhaustions sharing one uniform data bound (finite-K model of many ends)."""
    m, M = uniform_bounds
    out = []
    for cfg in configs:
        lo, hi = cfg.data_range()
        if lo < m or hi > M:
            raise ValueError(f"end data [{lo:.6g}, {hi:.6g}] outside uniform bounds [{m}, {M}]")
        out.append(exhaust(cfg, **kw))
    return out


# -- radial mode oracle -------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    """Dense solution ``h(r)`` of a linear two-point radial problem."""

    a: float
    b: float
    _h: Callable
    _dh: Callable

    def __call__(self, r):
        return self._h(np.asarray(r, float))

    def derivative(self, r):
        return self._dh(np.asarray(r, float))


def _linear_bvp(drift: Callable, potential: Callable, a: float, b: float,
                ha: float, hb: float, rtol: float = 1e-12) -> RadialProfile:
    """``h'' + drift h' - potential h = 0``, ``h(a)=ha``, ``h(b)=hb``, by superposed shooting."""

    def rhs(r, y):
        return [y[1], potential(r) * y[0] - drift(r) * y[1],
                y[3], potential(r) * y[2] - drift(r) * y[3]]

    sol = solve_ivp(rhs, (a, b), [1.0, 0.0, 0.0, 1.0], method="DOP853",
                    rtol=rtol, atol=1e-14, dense_output=True)
    if not sol.success:
        raise SolveError(f"radial ODE failed: {sol.message}")
    y1b, y2b = sol.y[0, -1], sol.y[2, -1]
    if y2b == 0:
        raise SolveError("singular shooting problem")
    c = (hb - ha * y1b) / y2b
    dense = sol.sol

    def h(r):
        y = dense(r.ravel())
        return (ha * y[0] + c * y[2]).reshape(r.shape)

    def dh(r):
        y = dense(r.ravel())
        return (ha * y[1] + c * y[3]).reshape(r.shape)

    return RadialProfile(a, b, h, dh)


def radial_mode_oracle(end: EndSpec, nu2: float, R: float, inner: float = 0.0,
                       outer: float = 1.0, r_start: float | None = None,
                       rtol: float = 1e-12) -> RadialProfile:
    """Radial factor of a separated harmonic function ``h(r) * mode(omega)``.

    Solves ``h'' + (n-1)(phi_r/phi) h' - (nu^2/phi^2) h = 0`` with
    ``h(r_start) = inner`` and ``h(R) = outer`` for a radial warp.
    """
    if not end.warp.is_radial:
        raise ValueError("the mode oracle needs an omega-independent warp")
    n = end.n
    zero = tuple(0.0 for _ in end.coords)
    a = end.r_start if r_start is None else r_start

    def drift(r):
        return (n - 1) * end.warp.d_r(r, zero) / end.warp.value(r, zero)

    def potential(r):
        return nu2 / end.warp.value(r, zero) ** 2

    return _linear_bvp(drift, potential, a, R, inner, outer, rtol)


def two_end_mode_oracle(plus: EndSpec, minus: EndSpec, nu2: float, R: float,
                        value_plus: float = 1.0, value_minus: float = 0.0,
                        rtol: float = 1e-12) -> RadialProfile:
    """Mode oracle on the glued cylinder in the signed radius ``t in [-R, R]``."""
    n = plus.n
    zero = tuple(0.0 for _ in plus.coords)

    def drift(t):
        if t >= 0:
            return (n - 1) * plus.warp.d_r(t, zero) / plus.warp.value(t, zero)
        return -(n - 1) * minus.warp.d_r(-t, zero) / minus.warp.value(-t, zero)

    def potential(t):
        w = plus if t >= 0 else minus
        return nu2 / w.warp.value(abs(t), zero) ** 2

    return _linear_bvp(drift, potential, -R, R, value_minus, value_plus, rtol)


# -- Liouville witness --------------------------------------------------------


@dataclass
class WitnessResult:
    result: SolveResult
    separation: float
    osc_f: float
    distinguished: str

    @property
    def nonconstant(self) -> bool:
        return self.separation > 0.5 * self.osc_f * 1e-6

    def to_text(self) -> str:
        lo, hi = self.result.problem.boundary_range
        return (
            f"verdict: {self.result.verdict}\n"
            f"distinguished_end: {self.distinguished}\n"
            f"osc_f: {self.osc_f:.10g}\n"
            f"probe_separation: {self.separation:.10g}\n"
            f"u_range: [{self.result.u.min():.10g}, {self.result.u.max():.10g}]\n"
            f"data_range: [{lo:.10g}, {hi:.10g}]\n"
            f"max_principle_gap: {self.result.max_principle_gap():.3e}\n"
        )


def liouville_witness(config: ManifoldConfig, f, distinguished: str = "plus",
                      schedule: Sequence[float] = (4.0, 6.0, 8.0), probes: Sequence | None = None,
                      tol_exhaustion: float = 1e-3, resolution: Resolution | None = None,
                      tol: float = 1e-10) -> WitnessResult:
    """Bounded harmonic function with datum ``f`` at one end and ``min f`` at the others.

    ``probes`` default to the cross-section extremes of ``f`` at radius 3 on the
    distinguished end; their spread is the reported separation.
    """
    coords = config.cross_section.coords
    f = _datum(f, coords)
    om = tuple(np.meshgrid(*config.cross_section.nodes(256), indexing="ij"))
    fv = _eval_datum(f, om)
    fmin, fmax = float(fv.min()), float(fv.max())
    sign = 1.0
    if config.topology == "two":
        k = 0 if distinguished == "plus" else 1
        sign = 1.0 if k == 0 else -1.0
        data = [fmin, fmin]
        data[k] = f
        cfg = ManifoldConfig.two_ends(config.ends[0], config.ends[1], data[0], data[1])
    else:
        cfg = ManifoldConfig.single_end(config.ends[0], f, fmin)
    if probes is None:
        i_max = np.unravel_index(np.argmax(fv), fv.shape)
        i_min = np.unravel_index(np.argmin(fv), fv.shape)
        rp = min(3.0, 0.75 * schedule[0])
        probes = [(tuple(float(o[i_max]) for o in om), sign * rp),
                  (tuple(float(o[i_min]) for o in om), sign * rp)]
    res = exhaust(cfg, schedule, probes, tol_exhaustion, resolution, tol)
    pv = res.exhaustion_trace[-1].probe_values
    return WitnessResult(res, float(pv.max() - pv.min()), fmax - fmin, distinguished)
