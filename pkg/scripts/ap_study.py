"""Relaxation-parameter study on the transport Gaussian.

    python3 scripts/ap_study.py [--cells 64]

For each eps, prints the L2 error against the exact translate and the size of
u_eps - u_{1e-9}.  The last column is the O(eps) Chapman-Enskog prediction
eps (lam^2 - a^2) T u_xx: the relaxation model's own diffusion, which no
scheme can remove.
"""

import argparse

import numpy as np

from apdec.cases import get_case, run_case
from apdec.verify import exact_errors

p = argparse.ArgumentParser()
p.add_argument("--cells", type=int, default=64)
p.add_argument("--eps", type=float, nargs="+", default=[1e-9, 1e-7, 1e-5, 1e-3, 1e-1, 1.0])
args = p.parse_args()

case = get_case("transport_gaussian")
lam, T = case.lam, case.T
xs = np.linspace(0.0, 1.0, 4001, endpoint=False)
exact = case.exact(xs[:, None], T)[:, 0]
h = 1e-4
uxx = (case.exact(xs[:, None] + h, T) - 2 * exact[:, None] + case.exact(xs[:, None] - h, T))[:, 0] / h ** 2


def rms(v):
    return float(np.sqrt(np.mean(v ** 2)))


for d, K in ((1, 2), (2, 3), (3, 7)):
    base = None
    print(f"B{d} K={K} N={args.cells}")
    for eps in args.eps:
        space, res = run_case(case, d, args.cells, eps=eps, corrections=K)
        err = exact_errors(space, res.u, case.exact, res.t).L2[0]
        u = space.evaluate(res.u, xs[:, None])[:, 0]
        base = u if base is None else base
        pred = eps * (lam ** 2 - 1.0) * T * rms(uxx)
        print(f"   eps={eps:7.0e}  L2 error {err:.3e}  |u-u_ref| {rms(u - base):.3e}  "
              f"predicted {pred:.3e}  max|f| {np.abs(res.f).max():.3f}")
