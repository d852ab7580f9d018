"""Command line front end: run, brackets, verify, export.

run executes a scene end to end (jet -> solve -> assemble -> verify), writes
the verification report as JSON and optional meshes, and exits 0 when every
pass flag is true, 2 on a verification failure, 1 on an input error (with a
machine-readable JSON error on stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import expr as ex
from .config import ConfigError, SceneConfig, load_config, serialize_config
from .desitter import crosscheck_null2ff
from .families import builtin_hypersurface
from .hypersurface import load_chart_csv
from .immersion import MTImmersion, Tolerances, verify_null_curve
from .mtsolve import (HeightField, MTEquation, UmbilicRecipe, brackets,
                      build_null_curve, corollary_count, equation_at,
                      null_2ff_mode, recipe_chart, slice_check, solve_field)
from .meshexport import export_grid_csv, export_triangle_mesh
from .spaceforms import GeometryError, spaceform
from .warp import Interval, WarpProfile


def _build_chart(cfg: SceneConfig):
    M = spaceform(cfg.c, cfg.n)
    if cfg.csv:
        chart = load_chart_csv(cfg.csv)
        if chart.spaceform.c != cfg.c or chart.dim != cfg.n:
            raise ConfigError("csv chart does not match the configured space form")
        return chart
    return builtin_hypersurface(M, cfg.family, resolution=cfg.resolution,
                                **cfg.chart_params)


def _build_warp(cfg: SceneConfig) -> WarpProfile:
    return WarpProfile(cfg.warp_expr, Interval(cfg.t_min, cfg.t_max), t0=cfg.t0)


def _tolerances(cfg: SceneConfig) -> Tolerances:
    return Tolerances.from_dict(cfg.tolerances)


def run_scene(cfg: SceneConfig, out_dir: str | None = None) -> dict:
    """Execute one scene; returns the report document."""
    warp = _build_warp(cfg)
    tol = _tolerances(cfg)
    doc: dict = {"schema": 1, "mode": cfg.mode, "seed": cfg.seed}

    if cfg.mode == "mt":
        chart = _build_chart(cfg)
        branch = cfg.branch if cfg.branch is not None else 0
        field = solve_field(chart, warp, branch=branch,
                            period_shift=cfg.period_shift)
        doc["max_equation_residual"] = field.max_residual()
        doc["partial_field"] = field.partial
        imm = MTImmersion.from_height_field(field)
        report = imm.verify("mt", tol)
        doc.update(json.loads(report.to_json()))
        doc["passed"]["equation"] = bool(
            field.max_residual() <= 1e-9 and not field.partial)
        _emit_immersion(cfg, out_dir, doc, field, imm)
    elif cfg.mode == "slice":
        chart = _build_chart(cfg)
        srep = slice_check(chart, warp, cfg.T, tol.slice_defect)
        imm = MTImmersion.from_slice(chart, warp, cfg.T)
        report = imm.verify("slice", tol)
        doc.update(json.loads(report.to_json()))
        doc["slice_defect"] = srep.max_defect
        doc["wprime"] = srep.wprime
        doc["passed"]["slice_cmc"] = srep.is_mt
        _emit_immersion(cfg, out_dir, doc, None, imm)
    elif cfg.mode == "curve":
        tau_expr = cfg.tau_expr or repr(warp.t0)
        curve = build_null_curve(warp, cfg.c, tau_expr,
                                 length=cfg.curve_length, step=cfg.curve_step)
        crep = verify_null_curve(curve)
        doc["max_metric_defect"] = math.nan
        doc["max_Hnull"] = crep.max_acc_null
        doc["max_Hnu"] = crep.max_acc_nu
        doc["max_2ff_defect"] = math.nan
        doc["spacelike_min_eig"] = crep.min_speed
        doc["collinearity"] = crep.max_collinearity
        doc["passed"] = {"acc_null": bool(crep.max_acc_null <= tol.h_null),
                         "spacelike": bool(crep.min_speed > 0.0)}
    elif cfg.mode == "null2ff":
        recipe = null_2ff_mode(warp, spaceform(cfg.c, cfg.n), cfg.T)
        doc["recipe"] = {
            "kind": type(recipe).__name__,
            "family": recipe.family,
            "params": recipe.params,
            "curvature": (recipe.c0 if isinstance(recipe, UmbilicRecipe)
                          else recipe.curvature),
        }
        chart = recipe_chart(recipe, cfg.n, resolution=cfg.resolution)
        if isinstance(recipe, UmbilicRecipe):
            tree = ex.parse(cfg.tau_expr) if cfg.tau_expr else None

            def tau_fn(u, _tree=tree):
                if _tree is None:
                    return warp.t0 + 0.25
                return float(ex.evaluate(_tree, float(np.asarray(u)[0])))

            imm = MTImmersion(chart, warp, tau_fn=tau_fn)
        else:
            imm = MTImmersion.from_slice(chart, warp, recipe.T)
        report = imm.verify("null2ff", tol)
        doc.update(json.loads(report.to_json()))
        _emit_immersion(cfg, out_dir, doc, None, imm)
    elif cfg.mode == "desitter-check":
        profiles = [lambda x: 0.5,
                    lambda x: (1.0 + x[0] / 4.0) / 2.0,
                    lambda x: 0.5 + 0.1 * x[1]]
        worst = None
        for prof in profiles:
            rep = crosscheck_null2ff(cfg.n, prof, resolution=cfg.resolution,
                                     t0=cfg.t0, tol=tol)
            if worst is None or not rep.all_passed():
                worst = rep
        doc.update(json.loads(worst.null2ff.to_json()))
        doc["constraint_defect"] = worst.constraint_defect
        doc["roundtrip_defect"] = worst.roundtrip_defect
        doc["isometry_defect"] = worst.isometry_defect
        doc["phi2_defect"] = worst.phi2_defect
        doc["passed"]["isometry"] = bool(worst.isometry_defect <= 1e-8)
        doc["passed"]["constraint"] = bool(worst.constraint_defect <= 1e-10)
        doc["passed"]["phi2"] = bool(worst.phi2_defect <= 1e-8)
    else:  # pragma: no cover - validate() rejects other modes
        raise ConfigError(f"unhandled mode {cfg.mode}")
    return doc


def _emit_immersion(cfg: SceneConfig, out_dir: str | None, doc: dict,
                    field: HeightField | None, imm: MTImmersion) -> None:
    """Write the report, saved-immersion record, and meshes."""
    if out_dir is None and not (cfg.report_path or cfg.mesh_path):
        return
    base = out_dir or "."
    os.makedirs(base, exist_ok=True)
    if field is not None:
        saved = {
            "schema": 1,
            "config": serialize_config(cfg),
            "branch": field.branch,
            "pair_index": field.pair_index,
            "period_shift": field.period_shift,
            "tau": field.tau.tolist(),
            "conformal": field.conformal.tolist(),
            "residual": field.residual.tolist(),
            "solved": field.solved.astype(int).tolist(),
        }
        with open(os.path.join(base, "immersion.json"), "w") as fh:
            json.dump(saved, fh)
    mesh_target = cfg.mesh_path or (os.path.join(base, "mesh")
                                    if out_dir else None)
    if mesh_target and imm.chart.dim == 2:
        export_grid_csv(imm, mesh_target + ".csv")
        export_triangle_mesh(imm, mesh_target + ".tri", which="phibar")
        export_triangle_mesh(imm, mesh_target + "_psi.tri", which="psi")
        doc["meshes"] = [mesh_target + ".csv", mesh_target + ".tri",
                         mesh_target + "_psi.tri"]


def _write_report(doc: dict, cfg: SceneConfig, out_dir: str | None,
                  to_stdout: bool) -> None:
    path = cfg.report_path
    if path is None and out_dir is not None:
        path = os.path.join(out_dir, "report.json")
    if path:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
    if to_stdout:
        print(json.dumps(doc, indent=2))
    else:
        failures = [k for k, v in doc.get("passed", {}).items() if not v]
        status = "PASS" if not failures else f"FAIL ({', '.join(failures)})"
        print(f"[{doc['mode']}] {status}")
        for key in ("max_metric_defect", "max_Hnull", "max_Hnu",
                    "max_2ff_defect", "spacelike_min_eig"):
            if key in doc and isinstance(doc[key], float) and not math.isnan(doc[key]):
                print(f"  {key} = {doc[key]:.3e}")


def cmd_run(args) -> int:
    cfg = _load_cfg(args)
    doc = run_scene(cfg, args.out)
    _write_report(doc, cfg, args.out, args.json)
    return 0 if all(doc.get("passed", {}).values()) else 2


def cmd_brackets(args) -> int:
    cfg = _load_cfg(args)
    if cfg.mode != "mt":
        raise ConfigError("brackets listing needs an mt-mode scene")
    chart = _build_chart(cfg)
    warp = _build_warp(cfg)
    center = np.array([0.5 * (a[0] + a[-1]) for a in chart.axes])
    eq = equation_at(chart, warp, center)
    brs = brackets(eq, period_shifts=abs(cfg.period_shift))
    q = corollary_count(eq)
    rows = []
    for b in brs:
        rows.append({
            "pair": b.pair_index,
            "kappa_lo": b.kappa_lo,
            "kappa_hi": b.kappa_hi,
            "admissible": b.admissible,
            "reason": b.reason,
            "s_lo": None if math.isnan(b.s_lo) else b.s_lo,
            "s_hi": None if math.isnan(b.s_hi) else b.s_hi,
            "g_sign_lo": (None if math.isnan(b.g_lo)
                          else int(math.copysign(1, b.g_lo))),
            "g_sign_hi": (None if math.isnan(b.g_hi)
                          else int(math.copysign(1, b.g_hi))),
            "period_shift": b.period_shift,
        })
    doc = {"schema": 1, "q": q,
           "admissible_count": sum(1 for b in brs if b.admissible
                                   and b.period_shift == 0),
           "brackets": rows}
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        print(f"q = {q}, admissible (fundamental) = {doc['admissible_count']}")
        hdr = f"{'pair':>4} {'kappa_lo':>12} {'kappa_hi':>12} {'adm':>4} " \
              f"{'s_lo':>12} {'s_hi':>12} {'G(lo)':>6} {'G(hi)':>6}  reason"
        print(hdr)
        for r in rows:
            print(f"{r['pair']:>4} {r['kappa_lo']:>12.6g} {r['kappa_hi']:>12.6g} "
                  f"{str(r['admissible']):>4} "
                  f"{r['s_lo'] if r['s_lo'] is not None else '-':>12} "
                  f"{r['s_hi'] if r['s_hi'] is not None else '-':>12} "
                  f"{r['g_sign_lo'] if r['g_sign_lo'] is not None else '-':>6} "
                  f"{r['g_sign_hi'] if r['g_sign_hi'] is not None else '-':>6}"
                  f"  {r['reason']}")
    return 0


def cmd_verify(args) -> int:
    """Re-verify a saved immersion record produced by run --out."""
    with open(args.saved) as fh:
        saved = json.load(fh)
    from .config import parse_config
    cfg = parse_config(saved["config"])
    if args.grid:
        cfg.resolution = args.grid
    chart = _build_chart(cfg)
    warp = _build_warp(cfg)
    tau = np.asarray(saved["tau"], dtype=float)
    field = HeightField(
        chart=chart, warp=warp, branch=saved["branch"], tau=tau,
        residual=np.asarray(saved["residual"], dtype=float),
        conformal=np.asarray(saved["conformal"], dtype=float),
        solved=np.asarray(saved["solved"], dtype=bool),
        pair_index=saved["pair_index"], period_shift=saved["period_shift"])
    if field.tau.shape != chart.grid_shape:
        raise ConfigError("saved height grid does not match the chart grid")
    imm = MTImmersion.from_height_field(field)
    report = imm.verify("mt", _tolerances(cfg))
    doc = {"schema": 1, "mode": "mt", "seed": cfg.seed}
    doc.update(json.loads(report.to_json()))
    _write_report(doc, cfg, args.out, args.json)
    return 0 if report.all_passed() else 2


def cmd_export(args) -> int:
    cfg = _load_cfg(args)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    warp = _build_warp(cfg)
    if cfg.mode == "mt":
        chart = _build_chart(cfg)
        field = solve_field(chart, warp,
                            branch=cfg.branch if cfg.branch is not None else 0,
                            period_shift=cfg.period_shift)
        imm = MTImmersion.from_height_field(field)
    elif cfg.mode == "slice":
        imm = MTImmersion.from_slice(_build_chart(cfg), warp, cfg.T)
    else:
        raise ConfigError("export supports mt and slice scenes")
    prefix = os.path.join(out, "mesh")
    export_grid_csv(imm, prefix + ".csv")
    written = [prefix + ".csv"]
    if imm.chart.dim == 2:
        export_triangle_mesh(imm, prefix + ".tri", which="phibar")
        export_triangle_mesh(imm, prefix + "_psi.tri", which="psi")
        written += [prefix + ".tri", prefix + "_psi.tri"]
    print("\n".join(written))
    return 0


def _load_cfg(args) -> SceneConfig:
    cfg = load_config(args.config)
    if getattr(args, "branch", None) is not None:
        cfg.branch = args.branch
    if getattr(args, "grid", None):
        cfg.resolution = args.grid
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg.validate()


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="rwmt",
        description="Construct and verify marginally trapped codimension-two "
                    "submanifolds of Robertson-Walker warped products.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="scene file")
        p.add_argument("--branch", type=int, default=None,
                       help="root branch index (mt mode)")
        p.add_argument("--grid", type=int, default=None,
                       help="override chart resolution per axis")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--json", action="store_true",
                       help="print the full report JSON to stdout")

    common(sub.add_parser("run", help="solve, assemble and verify a scene"))
    common(sub.add_parser("brackets", help="list root brackets of an mt scene"))
    pv = sub.add_parser("verify", help="re-verify a saved immersion")
    pv.add_argument("saved", help="immersion.json written by run --out")
    pv.add_argument("--grid", type=int, default=None)
    pv.add_argument("--out", default=None)
    pv.add_argument("--json", action="store_true")
    common(sub.add_parser("export", help="emit grid CSV and triangle meshes"))

    args = ap.parse_args(argv)
    handlers = {"run": cmd_run, "brackets": cmd_brackets,
                "verify": cmd_verify, "export": cmd_export}
    try:
        return handlers[args.cmd](args)
    except (ConfigError, GeometryError, OSError, ValueError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
