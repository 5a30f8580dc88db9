import io
import re
import subprocess
import sys
import time

import pytest

from warpends import cli
from warpends.cli import bundled_configs, main, run
from warpends.config import COMMANDS, ConfigError, load_config
from warpends.io import read_ends


def _commands_with_expectations():
    out = []
    for name in bundled_configs():
        cfg = load_config(cli.resolve_config(name))
        out += [(name, c) for c in COMMANDS if c in cfg.expects]
    return out


@pytest.mark.parametrize("name, command", _commands_with_expectations())
def test_bundled_configs_meet_their_expectations(name, command, tmp_path):
    t0 = time.perf_counter()
    buf = io.StringIO()
    assert run(command, name, out=str(tmp_path), stream=buf) == 0, buf.getvalue()
    assert time.perf_counter() - t0 < 60
    assert "FAIL" not in buf.getvalue()
    assert (tmp_path / f"{command}.txt").read_text() == buf.getvalue()


def test_every_command_is_exercised_by_some_config():
    assert {c for _, c in _commands_with_expectations()} == set(COMMANDS)


def test_reruns_are_byte_identical(tmp_path):
    for sub in ("a", "b"):
        run("solve", "plane_annulus", out=str(tmp_path / sub), stream=io.StringIO())
        run("criterion", "sinr_rlog2", out=str(tmp_path / sub), stream=io.StringIO())
    for f in ("solve.txt", "solution.csv", "solution.ends", "criterion.txt"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    u = read_ends(tmp_path / "a" / "solution.ends")
    assert u.ndim == 2


def _write(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    return str(path)


@pytest.mark.parametrize("text, line, match", [
    ("[manifold]\nwarp = sinh(\nboundary = 1\n[comparison]\nwarp = sinh(r)\n", 2, "warp"),
    ("[manifold]\nwarp = sinh(r)\n[nonsense]\nx = 1\n", 3, "nonsense"),
    ("[manifold]\nwarp = sinh(r)\nwarp = r\n", 3, "duplicate"),
    ("[manifold]\nwarp = sinh(r)\nr_start = 0.5\nboundary = 1\n[comparison]\nwarp = sinh(r)\n"
     "[expect.criterion]\nbogus = 1\n", 8, "bogus"),
])
def test_config_errors_carry_file_and_line(tmp_path, text, line, match):
    path = _write(tmp_path, text)
    with pytest.raises(ConfigError, match=match) as info:
        run("criterion", path, out=str(tmp_path / "o"), stream=io.StringIO())
    assert str(info.value).startswith(f"{path}:{line}:")


def test_main_reports_config_errors_with_status_two(tmp_path, capsys):
    path = _write(tmp_path, "[manifold]\nwarp = foo(r)\nboundary = 1\n[comparison]\nwarp = r\n")
    assert main(["criterion", "--config", path, "--out", str(tmp_path / "o")]) == 2
    assert re.search(rf"{re.escape(path)}:2: ", capsys.readouterr().err)


def test_failed_expectation_gives_status_one(tmp_path):
    path = _write(tmp_path, "[manifold]\nwarp = r\nr_start = 1\nboundary = 1\n[comparison]\nwarp = r\nr0 = 1\n"
                            "[expect.criterion]\noverall = Solvable\n")
    buf = io.StringIO()
    assert run("criterion", path, out=str(tmp_path / "o"), stream=buf) == 1
    assert "expect: FAIL overall" in buf.getvalue()


def test_expect_strict(tmp_path):
    path = _write(tmp_path, "[manifold]\nwarp = sinh(r)\nr_start = 0.5\nboundary = 1\n"
                            "[comparison]\nwarp = sinh(r)\n")
    assert run("criterion", path, out=str(tmp_path / "o"), stream=io.StringIO()) == 0
    assert run("criterion", path, out=str(tmp_path / "o"), expect_strict=True, stream=io.StringIO()) == 1


def test_unknown_config_name():
    with pytest.raises(ConfigError, match="no such config"):
        cli.resolve_config("does-not-exist")


def test_console_entry_point_lists_configs():
    out = subprocess.run([sys.executable, "-m", "warpends.cli", "list"], capture_output=True, text=True,
                         check=True).stdout.split()
    assert out == bundled_configs() and "hyperbolic" in " ".join(out)
