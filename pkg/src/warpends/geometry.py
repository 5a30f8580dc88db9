"""Geometry of warped ends ``g = dr^2 + phi(omega, r)^2 g_N`` over flat cross-sections."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expr import COORDS, DomainError, WarpField

__all__ = [
    "CrossSection",
    "EndSpec",
    "ExpansivenessError",
    "LaplacianCoefficients",
    "CurvatureProfile",
    "radial_sectional_curvature",
    "curvature_sign_profile",
    "laplacian_coefficients",
    "christoffel_curvature_oracle",
]


class ExpansivenessError(ValueError):
    """The sampled warp violates positivity or ``phi_r > 0`` past ``expansive_from``."""

    def __init__(self, message: str, point: tuple):
        super().__init__(f"{message} at (omega..., r) = {point}")
        self.point = point


@dataclass(frozen=True)
class CrossSection:
    """Flat closed cross-section: the unit circle or a flat torus.

    Parameters
    ----------
    kind : {"circle", "torus"}
    L_u, L_v : float
        Torus side lengths (ignored for the circle, whose circumference is 2*pi).
    """

    kind: str = "circle"
    L_u: float = 2 * np.pi
    L_v: float = 2 * np.pi

    def __post_init__(self):
        if self.kind not in ("circle", "torus"):
            raise ValueError(f"unsupported cross-section {self.kind!r}")
        if self.L_u <= 0 or self.L_v <= 0:
            raise ValueError("torus side lengths must be positive")

    @property
    def dimension(self) -> int:
        return 1 if self.kind == "circle" else 2

    @property
    def n(self) -> int:
        """Dimension of the end (cross-section dimension + 1)."""
        return self.dimension + 1

    @property
    def coords(self) -> tuple[str, ...]:
        return COORDS[self.kind]

    @property
    def periods(self) -> tuple[float, ...]:
        return (2 * np.pi,) if self.kind == "circle" else (self.L_u, self.L_v)

    def nodes(self, n_per_dim: int | Sequence[int], offset: float = 0.0) -> tuple[np.ndarray, ...]:
        """Uniform periodic nodes, one array per coordinate."""
        if np.isscalar(n_per_dim):
            n_per_dim = (int(n_per_dim),) * self.dimension
        return tuple(
            L * (np.arange(n) + offset) / n for L, n in zip(self.periods, n_per_dim)
        )

    def fourier_eigenvalue(self, *wavenumbers: int) -> float:
        """Eigenvalue ``nu^2`` of ``-Delta_N`` for the mode with the given integer wavenumbers."""
        return float(sum((2 * np.pi * k / L) ** 2 for k, L in zip(wavenumbers, self.periods)))


def _mesh(omega_nodes: Sequence[np.ndarray], rs: np.ndarray):
    grids = np.meshgrid(*omega_nodes, rs, indexing="ij")
    return tuple(grids[:-1]), grids[-1]


@dataclass
class EndSpec:
    """One expansive end ``N x [r_start, oo)``.

    Positivity of the warp on ``[r_start, check_until]`` and ``phi_r > 0`` on
    ``[expansive_from, check_until]`` are verified on a sample grid (about
    10^3 points) at construction.
    """

    cross_section: CrossSection
    warp: WarpField
    r_start: float = 0.0
    expansive_from: float | None = None
    boundary: WarpField | None = None
    check_until: float | None = None
    validate: bool = True
    label: str = field(default="end")

    def __post_init__(self):
        if isinstance(self.warp, str):
            self.warp = WarpField(self.warp, self.cross_section.coords)
        elif self.warp.coords != self.cross_section.coords:
            self.warp = self.warp.with_coords(self.cross_section.coords)
        if isinstance(self.boundary, str):
            self.boundary = WarpField(self.boundary, self.cross_section.coords)
        if self.r_start < 0:
            raise ValueError("r_start must be >= 0")
        if self.expansive_from is None:
            self.expansive_from = self.r_start
        if self.check_until is None:
            self.check_until = max(self.r_start, self.expansive_from) + 20.0
        if self.validate:
            self.verify()

    @property
    def n(self) -> int:
        return self.cross_section.n

    @property
    def coords(self) -> tuple[str, ...]:
        return self.cross_section.coords

    def sample_omega(self, n_per_dim: int = 8) -> tuple[np.ndarray, ...]:
        return self.cross_section.nodes(n_per_dim)

    def verify(self, n_omega: int = 8, n_r: int = 128):
        nodes = self.sample_omega(n_omega)
        om, rs = _mesh(nodes, np.linspace(self.r_start, self.check_until, n_r))
        try:
            vals = self.warp.value(rs, om)
        except DomainError as exc:
            raise ExpansivenessError(f"warp not evaluable: {exc}", ()) from exc
        if not np.all(vals > 0):
            i = np.unravel_index(np.argmin(vals), vals.shape)
            raise ExpansivenessError(
                "warp not positive", tuple(float(g[i]) for g in (*om, rs))
            )
        self.warp.positivity_domain = (float(self.r_start), float(self.check_until))
        om, rs = _mesh(nodes, np.linspace(self.expansive_from, self.check_until, n_r))
        dr = self.warp.d_r(rs, om)
        if not np.all(dr > 0):
            i = np.unravel_index(np.argmin(dr), dr.shape)
            raise ExpansivenessError(
                "phi_r <= 0 past expansive_from", tuple(float(g[i]) for g in (*om, rs))
            )


def _positive_warp(end: EndSpec, omega, r):
    phi = end.warp.value(r, omega)
    if not np.all(np.asarray(phi) > 0):
        raise DomainError("warp is not positive at the evaluation point", str(end.warp))
    return phi


def radial_sectional_curvature(end: EndSpec, omega: Sequence, r):
    """Sectional curvature ``-phi_rr / phi`` of planes containing ``d/dr``."""
    phi = _positive_warp(end, omega, r)
    return -end.warp.d_rr(r, omega) / phi


@dataclass(frozen=True)
class CurvatureProfile:
    radii: np.ndarray
    values: np.ndarray

    @property
    def signs(self) -> np.ndarray:
        return np.sign(self.values).astype(int)

    @property
    def pairs(self) -> list[tuple[float, int]]:
        return list(zip(self.radii.tolist(), self.signs.tolist()))

    @property
    def both_signs(self) -> bool:
        return bool(np.any(self.values > 0) and np.any(self.values < 0))

    def summary(self) -> str:
        if self.both_signs:
            kind = "both signs present"
        elif np.all(self.values < 0):
            kind = "all negative"
        elif np.all(self.values > 0):
            kind = "all positive"
        else:
            kind = "non-strict sign"
        return f"{kind} on [{self.radii[0]:g},{self.radii[-1]:g}]"


def curvature_sign_profile(end: EndSpec, r_min: float, r_max: float, samples: int,
                           omega: Sequence | None = None) -> CurvatureProfile:
    if not r_min < r_max:
        raise ValueError("need r_min < r_max")
    if omega is None:
        omega = tuple(0.0 for _ in end.coords)
    rs = np.linspace(r_min, r_max, samples)
    return CurvatureProfile(rs, np.asarray(radial_sectional_curvature(end, omega, rs), float))


@dataclass(frozen=True)
class LaplacianCoefficients:
    """``Delta_g = c_rr d_rr + c_r d_r + c_N Delta_N + c_grad . grad_N``."""

    c_rr: float | np.ndarray
    c_r: float | np.ndarray
    c_N: float | np.ndarray
    c_grad: tuple


def laplacian_coefficients(end: EndSpec, omega: Sequence, r) -> LaplacianCoefficients:
    """Laplace-Beltrami coefficients of the warped metric at ``(omega, r)``.

    For ``n = dim N + 1`` the first-order tangential term is
    ``(n - 3) phi^-3 grad_N phi``; it vanishes identically when ``n = 3``.
    """
    phi = _positive_warp(end, omega, r)
    n = end.n
    phi_r = end.warp.d_r(r, omega)
    c_r = (n - 1) * phi_r / phi
    c_N = 1.0 / phi**2
    if n == 3:
        c_grad = tuple(np.zeros_like(np.asarray(phi, float)) for _ in end.coords)
    else:
        grads = end.warp.d_omega(r, omega)
        c_grad = tuple((n - 3) * g / phi**3 for g in grads)
    return LaplacianCoefficients(np.ones_like(np.asarray(phi, float)), c_r, c_N, c_grad)


def christoffel_curvature_oracle(end: EndSpec, omega: Sequence, r, h: float = 1e-2,
                                 psi: float = 1.0):
    """Radial sectional curvature via finite-differenced Christoffel symbols.

    Only the warp values are used, never its symbolic derivatives, so this is an
    independent check on :func:`radial_sectional_curvature` with O(h^2) error.
    ``psi`` is a conformal factor of the cross-section metric; it cancels.
    """
    _positive_warp(end, omega, r)

    def g_aa(s):
        return (end.warp.value(s, omega) * psi) ** 2

    def gamma_r_aa(s):
        # Gamma^r_{aa} = -1/2 d_r g_aa
        return -(g_aa(s + h) - g_aa(s - h)) / (4 * h)

    def gamma_a_ra(s):
        # Gamma^a_{ra} = 1/2 g^aa d_r g_aa
        return (g_aa(s + h) - g_aa(s - h)) / (4 * h * g_aa(s))

    d_gamma = (gamma_r_aa(r + h) - gamma_r_aa(r - h)) / (2 * h)
    riemann = d_gamma - gamma_r_aa(r) * gamma_a_ra(r)
    return riemann / g_aa(r)
