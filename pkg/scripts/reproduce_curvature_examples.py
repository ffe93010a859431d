#!/usr/bin/env python3
"""Reproduce the headline curvature computations of the fold families.

Prints four blocks:
  1. the parabola fold's curvature blow-up at its basepoint (-4/lam^2);
  2. curvature scans of the disk and half-space folds in the flat model
     (nonnegative) and of the disk fold in the hyperbolic model (>= -1);
  3. the spherical half-space family's worst curvature defect (>= -3/32);
  4. fold-to-table Hausdorff distances of the disk family (= lam).
"""

import argparse
import json

import numpy as np

from foldbilliards import ambient as am
from foldbilliards import fold as fd
from foldbilliards import table as tb


def parabola_block():
    table = tb.parabola_table()
    rows = []
    for lam in (0.5, 0.25, 0.1):
        f = fd.Fold(table, am.euclidean(3), lam)
        sec = fd.sectional_curvature(f, np.zeros(3), [1.0, 0, 0], [0, 0, 1.0])
        rows.append({"lam": lam, "sec": sec, "expected": -4.0 / lam**2})
    print("parabola fold, curvature at the basepoint (plane through the fold direction):")
    for r in rows:
        print(f"  lam={r['lam']:<6g} sec={r['sec']:+.6f}  expected {r['expected']:+.1f}")
    return rows


def scan_block(n_grid, workers):
    lambdas = [0.9, 0.5, 0.2, 0.05]
    cases = [
        ("disk / euclidean", tb.disk_table(), am.euclidean(3), 0.0),
        ("half-space / euclidean", tb.half_space_table(), am.euclidean(3), 0.0),
        ("disk / hyperbolic", tb.disk_table(), am.hyperbolic(3), -1.0),
    ]
    out = []
    print("\ncurvature scans (family minimum vs declared bound):")
    for label, table, model, kappa in cases:
        rep = fd.scan_curvature(table, model, lambdas, kappa=kappa,
                                n_grid=n_grid, workers=workers)
        print(f"  {label:<24} kappa={kappa:+.0f}  min={rep.min_sec:+.3e} "
              f"over {rep.n_samples} samples -> {rep.verdict}")
        out.append(rep.to_dict())
    return out


def spherical_block():
    table = tb.spherical_halfspace_table()
    rng = np.random.default_rng(0)
    worst = np.inf
    for lam in (0.9, 0.5, 0.1, 0.01):
        f = fd.Fold(table, am.spherical(4), lam)
        count = 0
        while count < 250:
            x = rng.uniform(-1, 1, 3)
            if x[0] <= 0 or not table.region.contains(x) or table.f(x) <= 0:
                continue
            count += 1
            q = fd.lift(f, x, 1 if rng.random() < 0.5 else -1)
            v1 = np.array([2 * q[-1], 0.0, 0.0, lam**2])
            vj = np.array([0.0, 1.0, 0.0, 0.0])
            worst = min(worst, fd.sectional_curvature(f, q, v1, vj) - 1.0)
    print("\nspherical half-space family:")
    print(f"  worst sampled curvature defect {worst:+.6f}  (bound -3/32 = {-3/32:+.6f})")
    return {"worst_defect": worst}


def hausdorff_block():
    rows = []
    print("\ndisk fold Hausdorff distance to the table:")
    for lam in (0.4, 0.2, 0.1, 0.05):
        hd = fd.hausdorff_distance(fd.Fold(tb.disk_table(), am.euclidean(3), lam))
        print(f"  lam={lam:<6g} fold->table {hd.sup_fold_to_table:.6f}  "
              f"table->fold {hd.sup_table_to_fold:.6f}")
        rows.append({"lam": lam, "sup_fold_to_table": hd.sup_fold_to_table,
                     "sup_table_to_fold": hd.sup_table_to_fold})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-grid", type=int, default=24,
                    help="scan lattice points per axis (default 24)")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--json", type=str, default=None,
                    help="also dump all numbers to this JSON file")
    args = ap.parse_args(argv)

    results = {
        "parabola": parabola_block(),
        "scans": scan_block(args.n_grid, args.workers),
        "spherical": spherical_block(),
        "hausdorff": hausdorff_block(),
    }
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)
        print(f"\nwrote {args.json}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
