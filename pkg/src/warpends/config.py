"""Experiment configuration files.

Configs are INI-style text read with :mod:`configparser` (``key = value``
lines grouped in ``[sections]``, ``#`` comments). Recognised sections:

``[experiment]``
    ``seed`` (default 0), ``label``.
``[manifold]``
    ``topology`` = ``single`` | ``two``; ``cross_section`` = ``circle`` |
    ``torus``; ``L_u``, ``L_v``; for a single end ``warp``, ``r_start``,
    ``expansive_from``, ``boundary``, ``inner_data``; for two ends
    ``warp_plus``, ``warp_minus``, ``boundary_plus``, ``boundary_minus``,
    ``expansive_from``.
``[comparison]``
    either ``warp`` (explicit ``phi_bar``) or ``a`` (hyperbolic construction),
    plus ``r0`` and optionally ``r_max``.
``[curvature]``, ``[criterion]``, ``[barrier]``, ``[solve]``, ``[exhaust]``, ``[liouville]``
    per-command parameters, see :mod:`warpends.cli`.
``[expect.<command>]``
    asserted observables of a command. A value is either a literal (string or
    boolean, compared case-insensitively), ``<op> number`` with ``op`` one of
    ``<= >= < > ==``, or ``~ number tol`` for an absolute tolerance.

Errors are reported as ``path:line: message``.
"""
from __future__ import annotations

import configparser
import math
import operator
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["ConfigError", "ExperimentConfig", "Expectation", "load_config", "parse_config"]

COMMANDS = ("curvature", "criterion", "barrier-audit", "solve", "exhaust", "liouville")
_OPS = {"<=": operator.le, ">=": operator.ge, "<": operator.lt, ">": operator.gt, "==": operator.eq}


class ConfigError(ValueError):
    def __init__(self, path, line, message):
        loc = f"{path}:{line}" if line else str(path)
        super().__init__(f"{loc}: {message}")
        self.path, self.line = path, line


@dataclass(frozen=True)
class Expectation:
    key: str
    raw: str
    line: int

    def check(self, observed) -> tuple[bool, str]:
        raw = self.raw.strip()
        m = re.fullmatch(r"(<=|>=|==|<|>)\s*(\S+)", raw)
        if m:
            target = float(m.group(2))
            ok = observed is not None and _OPS[m.group(1)](float(observed), target)
            return bool(ok), f"{observed!s} {m.group(1)} {target:g}"
        m = re.fullmatch(r"~\s*(\S+)\s+(\S+)", raw)
        if m:
            target, tol = float(m.group(1)), float(m.group(2))
            ok = observed is not None and abs(float(observed) - target) <= tol
            return bool(ok), f"|{observed!s} - {target:g}| <= {tol:g}"
        ok = str(observed).strip().lower() == raw.lower()
        return ok, f"{observed!s} == {raw}"

    def validate(self, path):
        raw = self.raw.strip()
        for pat in (r"(<=|>=|==|<|>)\s*(\S+)", r"~\s*(\S+)\s+(\S+)"):
            m = re.fullmatch(pat, raw)
            if m:
                try:
                    [float(g) for g in m.groups() if g not in _OPS]
                except ValueError:
                    raise ConfigError(path, self.line, f"bad numeric expectation {raw!r}") from None


@dataclass
class ExperimentConfig:
    path: str
    sections: dict[str, dict[str, str]]
    lines: dict[tuple[str, str], int]
    expects: dict[str, list[Expectation]] = field(default_factory=dict)

    # -- raw access ------------------------------------------------------------

    def has(self, section: str, key: str | None = None) -> bool:
        if key is None:
            return section in self.sections
        return key in self.sections.get(section, {})

    def line_of(self, section: str, key: str | None = None) -> int:
        return self.lines.get((section, key), self.lines.get((section, None), 0))

    def error(self, section: str, key: str | None, message: str) -> ConfigError:
        return ConfigError(self.path, self.line_of(section, key), message)

    def get(self, section: str, key: str, default=None, required: bool = False) -> str | None:
        sec = self.sections.get(section, {})
        if key not in sec:
            if required:
                raise self.error(section, None, f"missing key {key!r} in [{section}]")
            return default
        return sec[key]

    def get_float(self, section, key, default=None, required=False) -> float | None:
        raw = self.get(section, key, None, required)
        if raw is None:
            return default
        try:
            return float(eval_number(raw))
        except ValueError as exc:
            raise self.error(section, key, f"{key}: {exc}") from None

    def get_int(self, section, key, default=None, required=False) -> int | None:
        raw = self.get(section, key, None, required)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise self.error(section, key, f"{key}: expected an integer, got {raw!r}") from None

    def get_floats(self, section, key, default=None, required=False) -> list[float] | None:
        raw = self.get(section, key, None, required)
        if raw is None:
            return default
        try:
            return [float(eval_number(x)) for x in raw.split(",") if x.strip()]
        except ValueError as exc:
            raise self.error(section, key, f"{key}: {exc}") from None

    def get_probes(self, section, key) -> list[tuple[tuple[float, ...], float]] | None:
        """``omega1, omega2 : r ; ...`` -> list of ``((omega...), r)``."""
        raw = self.get(section, key)
        if raw is None:
            return None
        out = []
        try:
            for item in raw.split(";"):
                if not item.strip():
                    continue
                om, r = item.split(":")
                out.append((tuple(float(eval_number(x)) for x in om.split(",")), float(eval_number(r))))
        except ValueError as exc:
            raise self.error(section, key, f"bad probe list {raw!r}: {exc}") from None
        return out

    @property
    def seed(self) -> int:
        return self.get_int("experiment", "seed", 0)


def eval_number(text: str) -> float:
    """A float literal, optionally using ``pi`` (e.g. ``pi/2``, ``2*pi``)."""
    t = text.strip()
    try:
        return float(t)
    except ValueError:
        pass
    m = re.fullmatch(r"([-+]?[\d.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([\d.eE+-]+))?", t)
    if not m:
        raise ValueError(f"not a number: {text!r}")
    coef = m.group(1)
    c = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
    d = float(m.group(2)) if m.group(2) else 1.0
    if d == 0 or not math.isfinite(c / d):
        raise ValueError(f"not a number: {text!r}")
    return c * np.pi / d


def _line_index(text: str) -> dict[tuple[str, str | None], int]:
    lines: dict[tuple[str, str | None], int] = {}
    section = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            lines.setdefault((section, None), i)
            continue
        m = re.match(r"([^=:]+?)\s*[=:]", s)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), i)
    return lines


def parse_config(text: str, path: str = "<string>") -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        cp.read_string(text, source=path)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(path, exc.lineno, f"duplicate key {exc.option!r} in [{exc.section}]") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(path, exc.lineno, f"duplicate section [{exc.section}]") from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(path, exc.lineno, "key outside of any [section]") from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else 0
        raise ConfigError(path, lineno, f"cannot parse line {exc.errors[0][1] if exc.errors else ''}") from None
    lines = _line_index(text)
    sections = {s: dict(cp[s]) for s in cp.sections()}
    cfg = ExperimentConfig(path, sections, lines)
    known = {"experiment", "manifold", "comparison", "curvature", "criterion", "barrier",
             "solve", "exhaust", "liouville"}
    for s, body in sections.items():
        if s.startswith("expect."):
            cmd = s[len("expect."):]
            if cmd not in COMMANDS:
                raise cfg.error(s, None, f"unknown command {cmd!r} in [{s}]")
            exps = [Expectation(k, v, cfg.line_of(s, k)) for k, v in body.items()]
            for e in exps:
                e.validate(path)
            cfg.expects[cmd] = exps
        elif s not in known:
            raise cfg.error(s, None, f"unknown section [{s}]")
    return cfg


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(path, 0, f"cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path))
