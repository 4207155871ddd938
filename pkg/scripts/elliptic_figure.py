#!/usr/bin/env python3
"""Reproduce the elliptic-coordinates circle pattern as an SVG.

The left half of the classical picture (coordinate lines of the smooth map)
is deterministic from the oracle; this script renders the right half: one
circumscribed circle per lattice cell of the discrete net.

Usage: python scripts/elliptic_figure.py [--eps pi/20] [--out pattern.svg]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dlame.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--eps", default="pi/20")
    ap.add_argument("--r", default="3.15", help="extent of the first coordinate")
    ap.add_argument("--r2", default="6.30", help="extent of the second coordinate")
    ap.add_argument("--out", default="elliptic_pattern.svg")
    ap.add_argument("--csv", help="also write the vertex lattice")
    args = ap.parse_args()

    argv = ["csurface", "--oracle", "elliptic", "--eps", args.eps,
            "--r", args.r, "--r2", args.r2, "--svg", args.out]
    if args.csv:
        argv += ["--csv", args.csv]
    rc = cli_main(argv)
    if rc == 0:
        print(f"wrote {args.out}")
    return rc


if __name__ == "__main__":
    sys.exit(main())
