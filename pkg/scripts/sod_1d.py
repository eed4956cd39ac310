"""Sod shock tube against the exact Riemann solution; writes density profiles.

    python3 scripts/sod_1d.py [--out sod_profiles.csv]
"""

import argparse
import csv

import numpy as np

from apdec.cases import run_case
from apdec.verify import exact_riemann, riemann_l1_error

LEFT, RIGHT = (1.0, 0.0, 1.0), (0.125, 0.0, 0.1)

p = argparse.ArgumentParser()
p.add_argument("--cells", type=int, nargs="+", default=[64, 128, 256])
p.add_argument("--out", default="sod_profiles.csv")
args = p.parse_args()

x = np.linspace(0.0, 1.0, 801)
columns = {"x": x}
for d in (1, 2, 3):
    line = []
    for n in args.cells:
        space, res = run_case("sod_1d", d, n)
        line.append(f"{riemann_l1_error(space, res.u, LEFT, RIGHT, 1.4, 0.5, res.t):.5f}")
        columns[f"rho_B{d}_N{n}"] = space.evaluate(res.u, x[:, None])[:, 0]
    print(f"B{d} L1 density error N={'/'.join(map(str, args.cells))}: {' '.join(line)}")
columns["rho_exact"] = exact_riemann(LEFT, RIGHT, 1.4, (x - 0.5) / res.t)[:, 0]

with open(args.out, "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(columns)
    w.writerows(zip(*columns.values()))
print(f"profiles -> {args.out}")
