"""Executes a validated experiment config and writes artifacts.

Artifacts per run: report.json (full structured result), report.csv (the
row table, 17-significant-digit floats, fixed column order), optional
trajectory_*.csv sample files, and manifest.json (config echo, versions,
wall time).  report.json and the CSV files are byte-identical across runs
with the same config and seed; the manifest is not, since it records wall
time.
"""

from __future__ import annotations

import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, ambient, analysis, dynamics
from .analysis import DEFAULT_KAPPA
from .config import ExperimentConfig
from .errors import PreconditionError
from .fold import Fold, hausdorff_distance, scan_curvature
from .table import model_on_table

CSV_COLUMNS = {
    "curvature-scan": ("lambda", "min_sec"),
    "hausdorff": ("lambda", "sup_fold_to_table", "sup_table_to_fold",
                  "hausdorff", "d_max", "c_model", "bound"),
    "fold-convergence": ("lambda", "sup_distance", "angle_error", "residual"),
    "boundary-geodesic": ("theta", "sup_distance", "sup_samegrid",
                          "expected", "rel_error"),
    "quasigeodesic-check": ("reference_index", "residual"),
}


@dataclass
class RunResult:
    verdict: str | None
    passed: bool
    artifacts: list[str] = field(default_factory=list)
    result: dict = field(default_factory=dict)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return "%.17g" % float(v)


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _grid_times(T: float, dt: float) -> np.ndarray:
    n = max(1, int(round(T / dt)))
    return np.linspace(0.0, T, n + 1)


def _normalized(model, x, v):
    v = np.asarray(v, dtype=float)
    return v / ambient.norm(model, np.asarray(x, dtype=float), v)


# --------------------------------------------------------------------------
# per-experiment runners; each returns (verdict|None, passed, result_dict,
# csv_rows, extra_artifacts)


def _run_scan(cfg: ExperimentConfig):
    p = cfg.parameters
    rep = scan_curvature(cfg.table, cfg.model, p["lambdas"], kappa=p["kappa"],
                         n_grid=p.get("n_grid", 24),
                         n_random_planes=p.get("n_random_planes", 8),
                         seed=cfg.seed, tol=p.get("tol", 1e-6),
                         workers=cfg.workers)
    rows = list(zip(rep.lambdas, rep.min_sec_per_lambda))
    return rep.verdict, True, rep.to_dict(), rows, {}


def _run_hausdorff(cfg: ExperimentConfig):
    p = cfg.parameters
    rows = []
    results = []
    for lam in p["lambdas"]:
        res = hausdorff_distance(Fold(table=cfg.table, model=cfg.model, lam=lam),
                                 n_grid=p.get("n_grid", 121))
        rows.append((res.lam, res.sup_fold_to_table, res.sup_table_to_fold,
                     max(res.sup_fold_to_table, res.sup_table_to_fold),
                     res.d_max, res.c_model, res.bound))
        results.append({
            "lam": res.lam,
            "sup_fold_to_table": res.sup_fold_to_table,
            "sup_table_to_fold": res.sup_table_to_fold,
            "hausdorff": max(res.sup_fold_to_table, res.sup_table_to_fold),
            "d_max": res.d_max,
            "c_model": res.c_model,
            "bound": res.bound,
            "n_fold_samples": res.n_fold_samples,
            "n_table_samples": res.n_table_samples,
        })
    return None, True, {"rows": results}, rows, {}


def _run_fold_convergence(cfg: ExperimentConfig):
    p = cfg.parameters
    rep = analysis.fold_convergence_experiment(
        cfg.table, cfg.model,
        p0=p.get("p0"), direction=tuple(p.get("direction", (0.8, 0.6))),
        lambdas=p["lambdas"], T=p["T"], dt=p["dt"],
        kappa=p.get("kappa"), tol_conv=p.get("tol_conv", 5e-3),
        tol_qg=p.get("tol_qg"), seed=cfg.seed, workers=cfg.workers,
        scan_grid=p.get("scan_grid", 12), scan_planes=p.get("scan_planes", 4))
    rows = [(r.param, r.sup_distance, r.angle_error, r.residual) for r in rep.rows]
    return rep.verdict, rep.verdict == "pass", rep.to_dict(), rows, {}


def _run_boundary_geodesic(cfg: ExperimentConfig):
    p = cfg.parameters
    rep = analysis.boundary_geodesic_experiment(
        cfg.table, cfg.model, p0=p.get("p0"), angles=p["angles"],
        T=p["T"], dt=p["dt"], tol_rel=p.get("tol_rel", 0.10),
        ref_refine=p.get("ref_refine", 8), extend=p.get("extend", 0.1))
    rows = [(r.param, r.sup_distance, r.sup_samegrid, r.expected,
             r.sup_distance / r.expected - 1) for r in rep.rows]
    return rep.verdict, rep.verdict == "pass", rep.to_dict(), rows, {}


def _quasigeodesic_curve(cfg: ExperimentConfig):
    p = cfg.parameters
    dt = p["dt"]
    kind = p["curve"]["kind"]
    model_H = model_on_table(cfg.table, cfg.model)
    if kind == "arc":
        t = _grid_times(np.pi, dt)
        pts = np.stack([np.cos(t), np.sin(t)], axis=1)
        return dynamics.SampledCurve(times=t, points=pts), cfg.table, model_H
    if kind == "corner":
        half = _grid_times(1.0, dt)
        t = np.concatenate([-half[::-1][:-1], half])
        pts = np.stack([t / np.sqrt(2), 1 - np.abs(t) / np.sqrt(2)], axis=1)
        return dynamics.SampledCurve(times=t, points=pts), cfg.table, model_H
    if kind == "convex-kink":
        half = _grid_times(1.0, dt)
        t = np.concatenate([-half[::-1][:-1], half])
        pts = np.where(t[:, None] < 0,
                       np.stack([t, np.zeros_like(t)], axis=1),
                       np.stack([np.zeros_like(t), t], axis=1))
        return dynamics.SampledCurve(times=t, points=pts), None, model_H
    c = p["curve"]
    v0 = _normalized(model_H, c["x0"], c["v0"])
    traj = dynamics.billiard_trajectory(cfg.table, cfg.model, np.asarray(c["x0"], float),
                                        v0, c["T"], dt)
    return traj.base, cfg.table, model_H


def _run_quasigeodesic(cfg: ExperimentConfig):
    p = cfg.parameters
    curve, table, model_H = _quasigeodesic_curve(cfg)
    kappa = p.get("kappa", DEFAULT_KAPPA[cfg.model.kind])
    if "reference_points" in p:
        refs = np.asarray(p["reference_points"], dtype=float)
    else:
        refs = analysis.reference_points_for_table(cfg.table, cfg.model, seed=cfg.seed)
    rep = analysis.quasigeodesic_residual(curve, model_H, table, kappa, refs,
                                          tol=p.get("tol"))
    rows = list(enumerate(rep.residual_per_point))
    return rep.verdict, rep.passed, rep.to_dict(), rows, {}


def _trajectory_csv_rows(curve: dynamics.SampledCurve, bounce_times=None):
    rows = []
    flags = None
    if bounce_times is not None:
        flags = np.zeros(len(curve.times), dtype=int)
        for tb in bounce_times:
            i = int(np.searchsorted(curve.times, tb - 1e-12))
            flags[min(i, len(flags) - 1)] = 1
    for i, t in enumerate(curve.times):
        row = [t, *curve.points[i]]
        if flags is not None:
            row.append(int(flags[i]))
        rows.append(row)
    return rows


def _run_trajectory(cfg: ExperimentConfig, out_dir: Path):
    p = cfg.parameters
    target = p["target"]
    T, dt = p["T"], p["dt"]
    x0 = np.asarray(p["x0"], dtype=float)
    model_H = model_on_table(cfg.table, cfg.model)
    extra = {}
    if target == "billiard":
        v0 = _normalized(model_H, x0, p["v0"])
        traj = dynamics.billiard_trajectory(cfg.table, cfg.model, x0, v0, T, dt)
        name = "trajectory_billiard.csv"
        header = ("t", *(f"x_{i+1}" for i in range(cfg.table.n)), "bounce_flag")
        _write_csv(out_dir / name,
                   header,
                   _trajectory_csv_rows(traj.base, [b.t for b in traj.bounces]))
        extra[name] = True
        bounces = [{
            "t": b.t,
            "x": [float(v) for v in b.x],
            "w_in": [float(v) for v in b.w_in],
            "w_out": [float(v) for v in b.w_out],
            "grazing": b.grazing,
        } for b in traj.bounces]
        result = {"n_samples": len(traj.base.times), "n_bounces": len(bounces),
                  "bounces": bounces}
        return None, True, result, [(b["t"], *b["x"], b["grazing"]) for b in bounces], extra
    if target == "fold-geodesic":
        fld = Fold(table=cfg.table, model=cfg.model, lam=p["lam"])
        v0 = _normalized(cfg.model, x0, p["v0"])
        crv = dynamics.integrate_fold_geodesic(fld, x0, v0, T, dt,
                                               two_sided=p.get("two_sided", True))
        name = "trajectory_fold_geodesic.csv"
    elif target == "table-geodesic":
        v0 = _normalized(model_H, x0, p["v0"])
        crv = dynamics.integrate_table_geodesic(model_H, x0, v0, T, dt)
        name = "trajectory_table_geodesic.csv"
    else:
        v0 = _normalized(model_H, x0, p["v0"])
        crv = dynamics.integrate_boundary_geodesic(cfg.table, cfg.model, x0, v0, T, dt)
        name = "trajectory_boundary_geodesic.csv"
    dim = crv.points.shape[1]
    _write_csv(out_dir / name, ("t", *(f"x_{i+1}" for i in range(dim))),
               _trajectory_csv_rows(crv))
    extra[name] = True
    result = {"n_samples": len(crv.times), "truncated": crv.truncated,
              "t_min": float(crv.times[0]), "t_max": float(crv.times[-1])}
    summary = [(result["t_min"], result["t_max"], result["n_samples"],
                int(result["truncated"]))]
    return None, True, result, summary, extra


TRAJECTORY_SUMMARY_COLUMNS = {
    "billiard": ("t", "x", "grazing"),
}


def run_experiment(cfg: ExperimentConfig, out_dir: Path) -> RunResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    extra_artifacts = {}
    if cfg.experiment == "curvature-scan":
        verdict, passed, result, rows, extra_artifacts = _run_scan(cfg)
        header = CSV_COLUMNS["curvature-scan"]
    elif cfg.experiment == "hausdorff":
        verdict, passed, result, rows, extra_artifacts = _run_hausdorff(cfg)
        header = CSV_COLUMNS["hausdorff"]
    elif cfg.experiment == "fold-convergence":
        verdict, passed, result, rows, extra_artifacts = _run_fold_convergence(cfg)
        header = CSV_COLUMNS["fold-convergence"]
    elif cfg.experiment == "boundary-geodesic":
        verdict, passed, result, rows, extra_artifacts = _run_boundary_geodesic(cfg)
        header = CSV_COLUMNS["boundary-geodesic"]
    elif cfg.experiment == "quasigeodesic-check":
        verdict, passed, result, rows, extra_artifacts = _run_quasigeodesic(cfg)
        header = CSV_COLUMNS["quasigeodesic-check"]
    elif cfg.experiment == "trajectory":
        verdict, passed, result, rows, extra_artifacts = _run_trajectory(cfg, out_dir)
        n = cfg.table.n
        if cfg.parameters["target"] == "billiard":
            header = ("t", *(f"x_{i+1}" for i in range(n)), "grazing")
        else:
            header = ("t_min", "t_max", "n_samples", "truncated")
    else:  # pragma: no cover - schema rejects unknown experiments
        raise PreconditionError(f"unknown experiment {cfg.experiment}")

    report = {
        "experiment": cfg.experiment,
        "config": cfg.raw,
        "verdict": verdict,
        "result": result,
    }
    _write_json(out_dir / "report.json", report)
    _write_csv(out_dir / "report.csv", header, rows)
    artifacts = ["report.json", "report.csv", *extra_artifacts.keys()]
    manifest = {
        "config": cfg.raw,
        "experiment": cfg.experiment,
        "verdict": verdict,
        "seed": cfg.seed,
        "workers": cfg.workers,
        "artifacts": sorted(artifacts),
        "versions": {
            "foldbilliards": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": time.time() - t0,
    }
    _write_json(out_dir / "manifest.json", manifest)
    artifacts.append("manifest.json")
    return RunResult(verdict=verdict, passed=passed, artifacts=artifacts,
                     result=result)
