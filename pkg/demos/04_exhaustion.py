"""
Exhaustion: solvable ends against the flat plane
================================================

Boundary data ``cos theta`` is imposed on growing truncations. On a
solvable end the probe values settle; on the plane the solution forgets
the data at rate ``r/R``.
"""
# %%
import numpy as np

from warpends import CrossSection, EndSpec
from warpends.solver import ManifoldConfig, Resolution, exhaust, radial_mode_oracle, solve_config, probe_values

circle = CrossSection("circle")
probes = [((0.0,), 2.0), ((np.pi,), 2.0)]

# %%
for text in ("sin(r) + r*log(r)^2", "r"):
    cfg = ManifoldConfig.single_end(EndSpec(circle, text, r_start=1.0), "cos(theta)")
    res = exhaust(cfg, [4, 6, 8, 10], probes, 0.05, Resolution(64, 0.02))
    print(f"--- {text}: {res.verdict}")
    print(res.trace_text())

# %% A single Fourier mode against the radial ODE oracle on hyperbolic 3-space
end = EndSpec(CrossSection("torus"), "sinh(r)", r_start=1.0)
cfg = ManifoldConfig.single_end(end, "cos(u)*cos(v)")
h = radial_mode_oracle(end, 2.0, 4.0)
for n, hr in ((8, 0.2), (16, 0.1)):
    res = solve_config(cfg, 4.0, Resolution(n, hr))
    got = probe_values(res.problem, res.u, [((0.0, 0.0), 2.0)])[0]
    print(f"n_omega {n:3d}: u = {got:.6f}, oracle {float(h(2.0)):.6f}")
