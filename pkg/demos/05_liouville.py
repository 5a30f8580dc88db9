"""
A bounded nonconstant harmonic function
=======================================

Two hyperbolic ends glued along a torus. Data ``1 + cos u`` on one end
and ``0`` on the other give a converged, visibly nonconstant solution.
"""
# %%
import numpy as np

from warpends import CrossSection, EndSpec
from warpends.solver import ManifoldConfig, Resolution, liouville_witness, two_end_mode_oracle

end = EndSpec(CrossSection("torus"), "cosh(r)", r_start=0.0, expansive_from=1.0)
cfg = ManifoldConfig.two_ends(end, end, "0", "0")

# %%
w = liouville_witness(cfg, "1 + cos(u)", "plus", (4.0, 6.0, 8.0),
                      [((0.0, 0.0), 3.0), ((np.pi, 0.0), 3.0)], 0.01, Resolution((32, 4), 0.05))
print(w.to_text())
print("mode oracle prediction:", 2 * float(two_end_mode_oracle(end, end, 1.0, 8.0)(3.0)))
