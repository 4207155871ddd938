#!/usr/bin/env python3
"""Run the full set of mesh-refinement studies and print a rate table.

Usage: python scripts/convergence_study.py [--out report.json]
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dlame.analysis import csurface_sweep, curve_sweep, orthosys_sweep, ribaucour_sweep
from dlame.curves import warped_circle_curve
from dlame.oracles import EllipticOracle, SphericalOracle

EPS_LIST = [np.pi / 10, np.pi / 20, np.pi / 40, np.pi / 80]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", help="write the collected reports as JSON")
    args = ap.parse_args()

    reports = {}
    reports["elliptic surface"] = csurface_sweep(EllipticOracle(), EPS_LIST, 4 * np.pi / 10, l_max=2)
    reports["elliptic surface (staggered)"] = csurface_sweep(
        EllipticOracle(), EPS_LIST, 4 * np.pi / 10, l_max=1, stagger=True
    )
    reports["warped circle curve"] = curve_sweep(
        warped_circle_curve(1.0, 0.35), EPS_LIST, 16 * np.pi / 10
    )
    reports["spherical assembly"] = orthosys_sweep(SphericalOracle(), [0.2, 0.1, 0.05], 0.4)
    reports["transform pair envelope"] = ribaucour_sweep(
        warped_circle_curve(1.0, 0.3), lambda t: -1.0 + 0.3 * np.sin(1.5 * t),
        np.array([0.55, 0.0]), [np.pi / 20, np.pi / 40, np.pi / 80], 8 * np.pi / 20
    )

    print(f"{'study':34s} {'order':>6s} {'slope':>7s} {'coarsest':>10s} {'finest':>10s}")
    for name, rep in reports.items():
        for ell, errs in sorted(rep.errors.items()):
            slope = rep.slopes[ell]
            print(f"{name:34s} {ell:6d} {slope:7.3f} {errs[0]:10.2e} {errs[-1]:10.2e}")

    if args.out:
        doc = {name: rep.to_dict() for name, rep in reports.items()}
        Path(args.out).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
