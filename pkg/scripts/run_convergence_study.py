#!/usr/bin/env python3
"""Run a convergence study and print the per-level table.

Two studies are available:

  fold      geodesics of the fold family M_lam, launched from the table
            boundary, against the reflected billiard they flatten onto
            (sup distance per lam, limit-direction polar angle, residual);
  boundary  billiards launched at shrinking angles to the boundary against
            the boundary geodesic (sup distance vs the 1 - cos(theta) sagitta).
"""

import argparse
import json

import numpy as np

from foldbilliards import ambient as am
from foldbilliards import analysis as an
from foldbilliards import table as tb

TABLES = {"disk": tb.disk_table, "half-space": tb.half_space_table}
MODELS = {"euclidean": am.euclidean, "hyperbolic": am.hyperbolic,
          "spherical": am.spherical}


def run_fold(args, table, model):
    lambdas = [2.0 ** -k for k in range(1, args.levels + 1)]
    rep = an.fold_convergence_experiment(
        table, model, direction=tuple(args.direction), lambdas=lambdas,
        T=args.T, dt=args.dt, workers=args.workers, seed=args.seed)
    print(f"{'lam':>12} {'sup_distance':>14} {'polar_angle':>12} {'residual':>12}")
    for r in rep.rows:
        print(f"{r.param:>12.6g} {r.sup_distance:>14.4e} "
              f"{r.angle_error:>12.2e} {r.residual:>12.3e}")
    return rep


def run_boundary(args, table, model):
    angles = [args.theta0 / 2.0 ** k for k in range(args.levels)]
    rep = an.boundary_geodesic_experiment(table, model, angles=angles,
                                          T=args.T, dt=args.dt)
    print(f"{'theta':>12} {'sup_distance':>14} {'sagitta':>12} {'rel_error':>10}")
    for r, rel in zip(rep.rows, rep.details["rel_errors"]):
        print(f"{r.param:>12.6g} {r.sup_distance:>14.4e} "
              f"{r.expected:>12.4e} {rel:>+10.4f}")
    return rep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("kind", choices=("fold", "boundary"))
    ap.add_argument("--table", choices=sorted(TABLES), default="disk")
    ap.add_argument("--model", choices=sorted(MODELS), default="euclidean")
    ap.add_argument("--levels", type=int, default=8,
                    help="number of halvings of the study parameter")
    ap.add_argument("--T", type=float, default=None,
                    help="duration (default 0.5 fold / pi/2 boundary)")
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--direction", type=float, nargs=2, default=(0.8, 0.6),
                    metavar=("A", "B"),
                    help="launch direction a*tangent + b*vertical (fold study)")
    ap.add_argument("--theta0", type=float, default=0.2,
                    help="largest launch angle (boundary study)")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", type=str, default=None)
    args = ap.parse_args(argv)

    table = TABLES[args.table]()
    model = MODELS[args.model](table.n + 1)
    if args.T is None:
        args.T = 0.5 if args.kind == "fold" else float(np.pi / 2)

    rep = run_fold(args, table, model) if args.kind == "fold" \
        else run_boundary(args, table, model)
    print(f"verdict: {rep.verdict}")
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(rep.to_json())
        print(f"wrote {args.json}")
    return 0 if rep.verdict == "pass" else 1


if __name__ == "__main__":
    raise SystemExit(main())
