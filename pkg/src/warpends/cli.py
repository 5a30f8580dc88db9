"""Command-line front end: ``warpends <command> --config FILE``.

Each command reads its section of the config, writes a text report (and CSV
or ``ENDS`` artifacts where relevant) to ``--out``, prints the report and the
outcome of every ``[expect.<command>]`` entry. The exit status is 0 iff all
expectations hold.
"""
from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import io as wio
from .barriers import AuditGrid, CapChart, SigmaProfile, audit_refinement, barrier_2d, build_barrier
from .config import COMMANDS, ConfigError, ExperimentConfig, load_config
from .criteria import (ComparisonWarp, SampleGrid, check_criterion, comparison_warp,
                       hyperbolic_comparison_warp)
from .expr import WarpError
from .geometry import CrossSection, EndSpec, ExpansivenessError, curvature_sign_profile
from .solver import (ManifoldConfig, MaximumPrincipleError, Resolution, SolveError,
                     exhaust, liouville_witness, radial_mode_oracle, solve_config)

log = logging.getLogger(__name__)

__all__ = ["main", "build_parser", "run", "bundled_configs", "resolve_config"]


# -- config -> objects ---------------------------------------------------------


def bundled_configs() -> list[str]:
    root = resources.files("warpends") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".cfg"))


def resolve_config(name: str) -> Path:
    """A filesystem path, or the name of a bundled config (with or without ``.cfg``)."""
    p = Path(name)
    if p.exists():
        return p
    root = resources.files("warpends") / "configs"
    for cand in (p.name, p.name + ".cfg"):
        q = root / cand
        if q.is_file():
            return Path(str(q))
    raise ConfigError(name, 0, f"no such config (bundled: {', '.join(bundled_configs())})")


def _cross_section(cfg: ExperimentConfig) -> CrossSection:
    kind = cfg.get("manifold", "cross_section", "circle")
    try:
        return CrossSection(kind, cfg.get_float("manifold", "l_u", 2 * np.pi),
                            cfg.get_float("manifold", "l_v", 2 * np.pi))
    except ValueError as exc:
        raise cfg.error("manifold", "cross_section", str(exc)) from None


def _end(cfg: ExperimentConfig, key: str, r_start: float, label: str) -> EndSpec:
    text = cfg.get("manifold", key, required=True)
    try:
        return EndSpec(_cross_section(cfg), text, r_start=r_start,
                       expansive_from=cfg.get_float("manifold", "expansive_from"), label=label)
    except (WarpError, ExpansivenessError) as exc:
        raise cfg.error("manifold", key, f"{key}: {exc}") from None


def build_ends(cfg: ExperimentConfig) -> list[EndSpec]:
    topology = cfg.get("manifold", "topology", "single")
    if topology == "single":
        return [_end(cfg, "warp", cfg.get_float("manifold", "r_start", 0.0), "end")]
    if topology == "two":
        return [_end(cfg, "warp_plus", 0.0, "plus"), _end(cfg, "warp_minus", 0.0, "minus")]
    raise cfg.error("manifold", "topology", f"unknown topology {topology!r}")


def build_manifold(cfg: ExperimentConfig) -> ManifoldConfig:
    ends = build_ends(cfg)
    try:
        if len(ends) == 1:
            return ManifoldConfig.single_end(ends[0], cfg.get("manifold", "boundary", required=True),
                                             cfg.get("manifold", "inner_data", "0"))
        return ManifoldConfig.two_ends(ends[0], ends[1],
                                       cfg.get("manifold", "boundary_plus", required=True),
                                       cfg.get("manifold", "boundary_minus", required=True))
    except WarpError as exc:
        raise cfg.error("manifold", None, f"boundary data: {exc}") from None
    except ValueError as exc:
        raise cfg.error("manifold", None, str(exc)) from None


def build_comparison(cfg: ExperimentConfig, end: EndSpec) -> ComparisonWarp:
    r0 = cfg.get_float("comparison", "r0", max(end.r_start, 1.0))
    r_max = cfg.get_float("comparison", "r_max")
    if cfg.has("comparison", "warp"):
        try:
            return comparison_warp(cfg.get("comparison", "warp"), r0, r_max)
        except WarpError as exc:
            raise cfg.error("comparison", "warp", str(exc)) from None
    if cfg.has("comparison", "a"):
        try:
            return hyperbolic_comparison_warp(end, cfg.get_float("comparison", "a"))
        except ValueError as exc:
            raise cfg.error("comparison", "a", str(exc)) from None
    raise cfg.error("comparison", None, "[comparison] needs either 'warp' or 'a'")


def _resolution(cfg: ExperimentConfig, section: str, args) -> Resolution:
    n = cfg.get(section, "n_omega")
    n_omega = 32 if n is None else tuple(int(x) for x in n.split(","))
    if isinstance(n_omega, tuple) and len(n_omega) == 1:
        n_omega = n_omega[0]
    if args.resolution is not None:
        n_omega = args.resolution
    return Resolution(n_omega, cfg.get_float(section, "h_r", 0.05))


# -- commands ------------------------------------------------------------------


def cmd_curvature(cfg, args, out: Path) -> tuple[str, dict]:
    end = build_ends(cfg)[0]
    omega = cfg.get_floats("curvature", "omega", [0.0] * end.cross_section.dimension)
    samples = cfg.get_int("curvature", "samples", 200)
    if args.resolution is not None:
        samples = args.resolution
    prof = curvature_sign_profile(end, cfg.get_float("curvature", "r_min", max(end.r_start, 1.0)),
                                  cfg.get_float("curvature", "r_max", 50.0), samples, tuple(omega))
    with open(out / "curvature.csv", "w") as fh:
        fh.write("r,curvature,sign\n")
        for r, k, s in zip(prof.radii, prof.values, prof.signs):
            fh.write(f"{r!r},{k!r},{s}\n")
    obs = {
        "summary": prof.summary(),
        "both_signs": prof.both_signs,
        "min": float(prof.values.min()),
        "max": float(prof.values.max()),
        "spread": float(prof.values.max() - prof.values.min()),
    }
    text = "".join(f"{k}: {v}\n" for k, v in obs.items())
    return text, obs


def cmd_criterion(cfg, args, out: Path) -> tuple[str, dict]:
    end = build_ends(cfg)[0]
    comp = build_comparison(cfg, end)
    seed = cfg.seed if args.seed is None else args.seed
    grid = SampleGrid(cfg.get_int("criterion", "n_omega", 128), cfg.get_int("criterion", "n_radial", 256),
                      cfg.get_float("criterion", "r_max"), seed)
    if args.resolution is not None:
        grid = SampleGrid(args.resolution, grid.n_radial, grid.r_max, seed)
    rep = check_criterion(end, comp, grid)
    text = f"comparison: {comp.phi_bar}\nr0: {comp.r0:g}\nseed: {seed}\n" + rep.to_text()
    obs = {
        "overall": rep.overall,
        "domination_ok": rep.domination_ok,
        "log_derivative_ok": rep.log_derivative_ok,
        "integral_verdict": rep.integral_verdict.kind,
        "integral_value": rep.integral_verdict.value,
    }
    return text, obs


def cmd_barrier_audit(cfg, args, out: Path) -> tuple[str, dict]:
    end = build_ends(cfg)[0]
    comp = build_comparison(cfg, end)
    cs = end.cross_section
    center = cfg.get_floats("barrier", "center", [np.pi] * cs.dimension)
    r_max = cfg.get_float("barrier", "r_max", 10.0)
    try:
        if cs.kind == "circle":
            barrier = barrier_2d(center[0], comp)
        else:
            w = cfg.get_floats("barrier", "half_widths", [np.pi / 2, np.pi / 2])
            barrier = build_barrier(CapChart.rectangle(tuple(center), w[0], w[1], cs.periods), comp)
    except ValueError as exc:
        raise cfg.error("barrier", None, str(exc)) from None
    n_omega = cfg.get_int("barrier", "n_omega", 17)
    if args.resolution is not None:
        n_omega = args.resolution
    coarse = AuditGrid(n_omega, cfg.get_int("barrier", "n_radial", 129), r_max)
    reports = audit_refinement(barrier, end, coarse, cfg.get_int("barrier", "levels", 3))
    fine = reports[-1]
    parts = []
    for i, rep in enumerate(reports):
        parts.append(f"[level {i}]\n" + rep.to_text())
    text = "\n".join(parts)
    orders = fine.refinement_orders
    obs = {
        "ok": all(r.ok for r in reports),
        "superharmonic": all(r.superharmonic for r in reports),
        "underresolved": any(r.underresolved for r in reports),
        "max_discrete_laplacian": fine.max_discrete_laplacian,
        "max_stencil_error": fine.max_abs_error,
        "min_value": min(r.min_value for r in reports),
        "value_at_p_rmax": fine.value_at_p_rmax,
        "order_min": min(orders) if orders else None,
    }
    return text, obs


def _write_field(out: Path, stem: str, result) -> None:
    pr = result.problem
    coords = pr.config.cross_section.coords
    wio.write_csv(out / f"{stem}.csv", coords, pr.omega_nodes, pr.radii, result.u)
    wio.write_ends(out / f"{stem}.ends", result.u)


def cmd_solve(cfg, args, out: Path) -> tuple[str, dict]:
    man = build_manifold(cfg)
    R = cfg.get_float("solve", "r", required=True)
    res = solve_config(man, R, _resolution(cfg, "solve", args), cfg.get_float("solve", "tol", 1e-10),
                       cfg.get("solve", "method", "auto"))
    _write_field(out, "solution", res)
    obs = {
        "residual_norm": res.residual_norm,
        "u_min": float(res.u.min()),
        "u_max": float(res.u.max()),
        "max_principle_gap": res.max_principle_gap(),
    }
    if cfg.has("solve", "oracle_nu2"):
        if man.topology != "single":
            raise cfg.error("solve", "oracle_nu2", "the mode oracle needs a single end")
        end = man.ends[0]
        pr = res.problem
        h = radial_mode_oracle(end, cfg.get_float("solve", "oracle_nu2"), R,
                               inner=cfg.get_float("solve", "oracle_inner", 0.0))
        mesh = np.meshgrid(*pr.omega_nodes, pr.radii, indexing="ij")
        f = man.boundary[0].value(0.0, tuple(mesh[:-1]))
        obs["oracle_error"] = float(np.max(np.abs(res.u - h(mesh[-1]) * f)))
    text = "".join(f"{k}: {v}\n" for k, v in obs.items())
    text += f"grid: {'x'.join(str(s) for s in res.problem.shape)}\nR: {R:g}\n"
    return text, obs


def _exhaust_observables(res, probes, osc_f) -> dict:
    trace = res.exhaustion_trace
    rp = max(abs(r) for _, r in probes)
    ratios = [(s.oscillation / osc_f) / (rp / s.R) for s in trace] if osc_f > 0 else []
    changes = res.sup_changes
    return {
        "verdict": res.verdict,
        "last_sup_change": changes[-1] if changes else None,
        "sup_changes_decreasing": all(b < a for a, b in zip(changes[:-1], changes[1:])),
        "final_oscillation": trace[-1].oscillation,
        "oscillation_ratio_min": min(ratios) if ratios else None,
        "oscillation_ratio_max": max(ratios) if ratios else None,
        "max_principle_gap": res.max_principle_gap(),
    }


def cmd_exhaust(cfg, args, out: Path) -> tuple[str, dict]:
    man = build_manifold(cfg)
    schedule = cfg.get_floats("exhaust", "schedule", [4.0, 6.0, 8.0, 10.0])
    probes = cfg.get_probes("exhaust", "probes")
    if probes is None:
        raise cfg.error("exhaust", None, "[exhaust] needs 'probes'")
    try:
        res = exhaust(man, schedule, probes, cfg.get_float("exhaust", "tol_exhaustion", 1e-3),
                      _resolution(cfg, "exhaust", args), cfg.get_float("exhaust", "tol", 1e-10))
    except (SolveError, MaximumPrincipleError) as exc:
        raise SystemExit(f"error: {exc}") from None
    except ValueError as exc:
        raise cfg.error("exhaust", None, str(exc)) from None
    (out / "trace.csv").write_text(res.trace_text())
    _write_field(out, "solution", res)
    lo, hi = man.data_range()
    obs = _exhaust_observables(res, probes, hi - lo)
    text = "".join(f"{k}: {v}\n" for k, v in obs.items()) + res.trace_text()
    return text, obs


def cmd_liouville(cfg, args, out: Path) -> tuple[str, dict]:
    man = build_manifold(cfg)
    f = cfg.get("liouville", "f", required=True)
    schedule = cfg.get_floats("liouville", "schedule", [4.0, 6.0, 8.0])
    try:
        w = liouville_witness(man, f, cfg.get("liouville", "distinguished", "plus"), schedule,
                              cfg.get_probes("liouville", "probes"),
                              cfg.get_float("liouville", "tol_exhaustion", 1e-3),
                              _resolution(cfg, "liouville", args))
    except WarpError as exc:
        raise cfg.error("liouville", "f", str(exc)) from None
    (out / "trace.csv").write_text(w.result.trace_text())
    _write_field(out, "solution", w.result)
    obs = {
        "verdict": w.result.verdict,
        "separation": w.separation,
        "osc_f": w.osc_f,
        "nonconstant": w.nonconstant,
        "max_principle_gap": w.result.max_principle_gap(),
    }
    if cfg.has("comparison"):
        comp = build_comparison(cfg, man.ends[0])
        probes = cfg.get_probes("liouville", "probes")
        rp = abs(probes[0][1]) if probes else min(3.0, 0.75 * schedule[0])
        sig = float(SigmaProfile(comp, 1.0)(rp))
        obs["sigma_probe"] = sig
        obs["separation_ratio"] = w.separation / (w.osc_f * sig)
    text = "".join(f"{k}: {v}\n" for k, v in obs.items()) + w.result.trace_text()
    return text, obs


HANDLERS = {
    "curvature": cmd_curvature,
    "criterion": cmd_criterion,
    "barrier-audit": cmd_barrier_audit,
    "solve": cmd_solve,
    "exhaust": cmd_exhaust,
    "liouville": cmd_liouville,
}


def check_expectations(cfg: ExperimentConfig, command: str, obs: dict, strict: bool) -> tuple[bool, list[str]]:
    exps = cfg.expects.get(command, [])
    lines = []
    ok = True
    if strict and not exps:
        return False, [f"FAIL no [expect.{command}] block (--expect-strict)"]
    for e in exps:
        if e.key not in obs:
            raise ConfigError(cfg.path, e.line,
                              f"unknown observable {e.key!r} for {command} (known: {', '.join(obs)})")
        good, detail = e.check(obs[e.key])
        ok &= good
        lines.append(f"{'PASS' if good else 'FAIL'} {e.key}: {detail}")
    return ok, lines


def run(command: str, config: str, out: str | None = None, resolution: int | None = None,
        seed: int | None = None, expect_strict: bool = False, stream=None) -> int:
    """Run one command; returns the exit status."""
    stream = stream or sys.stdout
    path = resolve_config(config)
    cfg = load_config(path)
    out_dir = Path(out) if out else Path("warpends-out") / path.stem
    out_dir.mkdir(parents=True, exist_ok=True)
    args = argparse.Namespace(resolution=resolution, seed=seed)
    text, obs = HANDLERS[command](cfg, args, out_dir)
    report = f"command: {command}\nconfig: {path.name}\n" + text
    ok, lines = check_expectations(cfg, command, obs, expect_strict)
    report += "".join(f"expect: {ln}\n" for ln in lines)
    (out_dir / f"{command}.txt").write_text(report)
    stream.write(report)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="warpends", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True,
                       help="config file, or a bundled name (see 'warpends list')")
        s.add_argument("--out", help="output directory (default warpends-out/<config>)")
        s.add_argument("--resolution", type=int, help="override the cross-section node count")
        s.add_argument("--seed", type=int, help="override the sampling seed")
        s.add_argument("--expect-strict", action="store_true",
                       help="fail when the config has no expectations for this command")
    sub.add_parser("list", help="list bundled configs")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list":
        print("\n".join(bundled_configs()))
        return 0
    try:
        return run(args.command, args.config, args.out, args.resolution, args.seed, args.expect_strict)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
