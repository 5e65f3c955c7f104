#!/usr/bin/env python3
"""Growth-rate experiments for the slope-sqrt2 foliation.

Tabulates the exactly linear growth of straight probes and the prescribed
sublinear growth paths (targets sqrt t and log(1+t)), writing CSVs next to
this script.  Every measure is exact; the CSV keeps exact strings in the I
column and a float column for plotting.
"""

import csv
import math
import pathlib
import sys
from fractions import Fraction

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from laminath import flat
from laminath.cf import ContinuedFraction
from laminath.exactnum import format_exact

OUT = pathlib.Path(__file__).resolve().parent


def linear_table(theta, direction, label, t_max=32, samples=32):
    rows = flat.linear_growth_probe(theta, direction, t_max, samples)
    path = OUT / f"growth_linear_{label}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "I", "I_float"])
        for r in rows:
            w.writerow([format_exact(r.t), format_exact(r.measure),
                        float(r.measure)])
    unit = rows[0].measure / rows[0].t
    print(f"linear probe [{label}]: I(t) = {format_exact(unit)} * t exactly "
          f"-> {path.name}")


def prescribed_table(theta, f, name, segments=8):
    path_obj, rows = flat.prescribed_growth_path(theta, f, segments)
    path = OUT / f"growth_prescribed_{name}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "I", "f", "gap"])
        for r in rows:
            w.writerow([format_exact(r.t), format_exact(r.measure),
                        r.target, abs(float(r.measure) - r.target)])
    worst = max(abs(float(r.measure) - r.target) for r in rows)
    print(f"prescribed [{name}]: {len(rows)} joints, sup|I - f| = {worst:.3g} "
          f"(<= 1) -> {path.name}")


def main():
    theta = ContinuedFraction.sqrt2()
    linear_table(theta, "vertical", "vertical")
    linear_table(theta, Fraction(0), "horizontal")
    linear_table(theta, Fraction(1, 3), "slope_1_3")
    prescribed_table(theta, math.sqrt, "sqrt")
    prescribed_table(theta, math.log1p, "log1p")


if __name__ == "__main__":
    main()
