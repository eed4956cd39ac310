"""Two-dimensional runs: vortex convergence, 2D Sod and double Mach reflection.

    python3 scripts/runs_2d.py vortex [--cells 1200 4800 19200]
    python3 scripts/runs_2d.py sod [--cells 900] [--lam 2.2]
    python3 scripts/runs_2d.py dmr [--cells 1000] [--degrees 1]

Sod and DMR write density slices (along y = 0 and along y = 2 respectively)
to CSV.  A state error is reported with the time it occurred at.
"""

import argparse
import csv
import time

import numpy as np

from apdec.cases import run_case
from apdec.verify import convergence_table, eoc_fit

SLICES = {
    "sod": ("sod_2d", 900, lambda s: np.stack([s, np.zeros_like(s)], 1), np.linspace(-1, 1, 401)),
    "dmr": ("dmr_2d", 1000, lambda s: np.stack([s, np.full_like(s, 2.0)], 1),
            np.linspace(-0.15, 2.95, 311)),
}

p = argparse.ArgumentParser()
p.add_argument("which", choices=["vortex", "sod", "dmr"])
p.add_argument("--cells", type=int, nargs="+")
p.add_argument("--degrees", type=int, nargs="+")
p.add_argument("--lam", type=float, help="override the kinetic speed")
args = p.parse_args()

if args.which == "vortex":
    for d in args.degrees or [1, 2]:
        rows = convergence_table("vortex_2d", d, args.cells or [1200, 4800, 19200], lam=args.lam)
        errs = [r.errors.L2[0] for r in rows]
        print(f"vortex B{d}: L2 rho " + " ".join(f"{e:.3e}" for e in errs)
              + f"  fitted EOC {eoc_fit(errs, [r.h for r in rows]):.2f}")
    raise SystemExit(0)

name, default_cells, line, s = SLICES[args.which]
cells = (args.cells or [default_cells])[0]
columns = {"s": s}
for d in args.degrees or [1, 2, 3]:
    start = time.perf_counter()
    try:
        space, res = run_case(name, d, cells, lam=args.lam)
    except ArithmeticError as err:
        print(f"{name} B{d}: {err}")
        continue
    rho = space.evaluate(res.u, line(s))[:, 0]
    columns[f"rho_B{d}"] = rho
    print(f"{name} B{d} {cells} cells: t={res.t:.4g} in {time.perf_counter() - start:.0f}s, "
          f"rho range [{rho.min():.3f}, {rho.max():.3f}]")
out = f"{name}_slice.csv"
with open(out, "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(columns)
    w.writerows(zip(*columns.values()))
print(f"slice -> {out}")
