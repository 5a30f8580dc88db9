"""
Barriers at infinity
====================

The barrier ``sigma(r) vartheta(omega) + 1`` combines the first Dirichlet
eigenfunction of a cap with the radial profile
``sigma = exp(-lambda_1 int_r^inf 1/phi_bar)``. Its superharmonicity is
audited on nested grids.
"""
# %%
import numpy as np

from warpends import CrossSection, EndSpec, comparison_warp
from warpends.barriers import AuditGrid, CapChart, audit_refinement, barrier_2d, build_barrier

# %% Hyperbolic 3-space end over a torus with a square cap
end = EndSpec(CrossSection("torus"), "sinh(r)", r_start=1.0)
b = build_barrier(CapChart.rectangle((np.pi, np.pi), np.pi / 2, np.pi / 2), comparison_warp("sinh(r)", 1.0))
for rep in audit_refinement(b, end, AuditGrid(17, 65, 10.0), 3):
    print(f"h_r {rep.h_r:.4f}  max discrete Lap {rep.max_discrete_laplacian:+.2e}  "
          f"Theta(p, r_max) {rep.value_at_p_rmax:.2e}")

# %% Surface end r log^2 r: the barrier is harmonic but decays only like 1/log r
end2 = EndSpec(CrossSection("circle"), "r*log(r)^2", r_start=2.0)
b2 = barrier_2d(0.0, comparison_warp("r*log(r)^2", 2.0))
print("audited from r =", round(b2.audit_r_min, 3), "on |theta| <=", b2.audit_half_widths[0])
for r in (10.0, 1e2, 1e4, 1e8):
    print(f"Theta(p, {r:g}) = {b2.value((np.array(0.0),), r):.4f}")
