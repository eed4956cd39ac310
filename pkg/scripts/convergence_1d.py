"""Mesh-refinement tables for the smooth 1D cases.

    python3 scripts/convergence_1d.py [--case transport_gaussian] [--corrections 2 3 7]

Prints L2 errors, pairwise and fitted EOC per degree.  Passing a larger
``--corrections`` list shows how much of the B2/B3 rate is held back by the
lumped-mass DeC iteration rather than by the space discretisation.
"""

import argparse

from apdec.verify import convergence_table, eoc_fit

p = argparse.ArgumentParser()
p.add_argument("--case", default="transport_gaussian")
p.add_argument("--cells", type=int, nargs="+", default=[32, 64, 128, 256])
p.add_argument("--degrees", type=int, nargs="+", default=[1, 2, 3])
p.add_argument("--corrections", type=int, nargs="+", default=[2, 3, 7],
               help="DeC iterations, one per degree")
args = p.parse_args()

for d, K in zip(args.degrees, args.corrections):
    try:
        rows = convergence_table(args.case, d, args.cells, corrections=K)
    except ArithmeticError as err:
        print(f"B{d} K={K}: {err}")
        continue
    errs = [r.errors.L2[0] for r in rows]
    print(f"B{d} K={K}  fitted L2 EOC {eoc_fit(errs, [r.h for r in rows]):.2f}")
    for n, r in zip(args.cells, rows):
        print(f"   N={n:5d}  L2 {r.errors.L2[0]:.3e}  EOC {r.eoc[1]:.2f}")
