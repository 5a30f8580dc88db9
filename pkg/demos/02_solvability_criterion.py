"""
Checking the solvability criterion
==================================

An end is certified when a radial comparison warp ``phi_bar`` sits below
``phi``, grows no faster in log-derivative, and has a finite tail
integral of ``1/phi_bar``.
"""
# %%
from warpends import CrossSection, EndSpec, SampleGrid, check_criterion, comparison_warp
from warpends.criteria import hyperbolic_comparison_warp, tail_integral
from warpends.expr import WarpField

circle = CrossSection("circle")

# %% Three surface ends
for text, r0 in (("sinh(r)", 1.0), ("sin(r) + r*log(r)^2", 10.0), ("r", 1.0)):
    end = EndSpec(circle, text, r_start=1.0)
    rep = check_criterion(end, comparison_warp(text, r0), SampleGrid(64, 256))
    print(f"{text:22s} -> {rep.overall:15s} tail {rep.integral_verdict.kind}")

# %% The tail integral, its error bound and the borderline growth rates
for text, r0 in (("r*log(r)^2", 2.0), ("r*log(r)", 3.0), ("r*log(r)^0.5", 3.0)):
    v = tail_integral(WarpField.radial(text), r0)
    print(f"{text:14s} {v.kind:12s} value {v.value} bound {v.error_bound}")

# %% Hyperbolic comparison warps alpha sinh(a (r - r_start) + 1) from a curvature bound
end = EndSpec(circle, "sinh(r + 1)")
comp = hyperbolic_comparison_warp(end, 1.0)
print(comp.phi_bar, "->", check_criterion(end, comp, SampleGrid(16, 128)).overall)
