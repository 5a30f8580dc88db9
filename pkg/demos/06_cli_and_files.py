"""
Configs, the command line and exported fields
=============================================

Every bundled config can be run from Python or as ``warpends <command>
--config <name>``; the solve command writes CSV and ``ENDS`` binary fields.
"""
# %%
import io
import tempfile
from pathlib import Path

from warpends.cli import bundled_configs, run
from warpends.io import read_csv, read_ends

print("bundled:", ", ".join(bundled_configs()))

# %%
with tempfile.TemporaryDirectory() as tmp:
    status = run("solve", "plane_annulus", out=tmp, stream=io.StringIO())
    print("exit status", status)
    print(Path(tmp, "solve.txt").read_text())
    header, table = read_csv(Path(tmp, "solution.csv"))
    u = read_ends(Path(tmp, "solution.ends"))
    print(header, table.shape, u.shape)
