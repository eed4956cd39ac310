"""Why high-degree transport loses order: space error versus DeC error.

    python3 scripts/dec_analysis.py

1. Spectral radius of I - M_L^{-1} M.  The correction step inverts the lumped
   mass only, so grid-scale modes of the consistent-mass system converge at
   this rate per DeC iteration.
2. Exact time integration (matrix exponential) of the semi-discrete system:
   the order the space discretisation alone delivers.
3. B3 L2 error at N=128 against the number of DeC iterations.
4. Per-step amplification (largest eigenvalue modulus) at N=16 for both
   jump scalings.
"""

import numpy as np
from scipy.linalg import expm

from apdec.basis import FESpace
from apdec.cases import get_case, run_case
from apdec.residual import SchemeConfig, jump_matrix
from apdec.solver import Solver
from apdec.verify import eoc_fit, exact_errors

case = get_case("transport_gaussian")

print("1. mass-splitting contraction")
for d in (1, 2, 3):
    s = FESpace(case.build_mesh(32), d)
    E = np.eye(s.n_dofs) - s.mass.toarray() / s.lumped[:, None]
    r = np.abs(np.linalg.eigvals(E)).max()
    print(f"   B{d}: radius {r:.4f}, iterations per decade {np.log(0.1) / np.log(r):.1f}")

print("2. semi-discrete error with exact time integration, T=0.12")
x = (np.arange(20000) + 0.5) / 20000
cells = [16, 32, 64, 128]
for d in (1, 2, 3):
    theta, scaling = case.theta[d], case.jump_scaling
    errs = []
    for n in cells:
        s = FESpace(case.build_mesh(n), d)
        A = (s.advection[0] + jump_matrix(s, theta, scaling)).toarray()
        u0 = s.interpolate(case.initial)[:, 0]
        u = expm(-0.12 * np.linalg.solve(s.mass.toarray(), A)) @ u0
        diff = s.evaluate(u[:, None], x[:, None])[:, 0] - case.exact(x[:, None], 0.12)[:, 0]
        errs.append(np.sqrt(np.mean(diff ** 2)))
    print(f"   B{d} theta={theta} ({scaling}): " + " ".join(f"{e:.2e}" for e in errs)
          + f"  fit {eoc_fit(errs, 1 / np.array(cells)):.2f}")

print("3. B3 at N=128 against DeC iterations")
for K in (4, 7, 15, 30):
    space, res = run_case(case, 3, 128, corrections=K)
    print(f"   K={K:2d}: L2 {exact_errors(space, res.u, case.exact, res.t).L2[0]:.2e}")


def amplification(d, theta, scaling, mass="consistent", cfl=0.1, n=16):
    space = FESpace(case.build_mesh(n), d)
    cfg = case.config(d, cfl=cfl, mass=mass, corrections=d + 1 if d < 3 else 7,
                      scheme=SchemeConfig("galerkin_jump", theta, d, scaling))
    solver = Solver(space, case.drm(), cfg)
    size, dt = 2 * space.n_dofs, solver.dt(0.0)
    G = np.empty((size, size))
    for i in range(size):
        e = np.zeros(size)
        e[i] = 1.0
        G[:, i] = solver.integrator.step(e.reshape(space.n_dofs, 2, 1), dt)[0].ravel()
    return np.abs(np.linalg.eigvals(G)).max()


print("4. per-step amplification at N=16, CFL 0.1")
for d, theta in ((2, (0.0, 0.0)), (2, (1.0, 0.0)), (3, (0.0, 0.0)), (3, (1.0, 5.0))):
    for scaling in ("reference", "physical"):
        if not any(theta) and scaling == "physical":
            continue
        print(f"   B{d} theta={theta} {scaling}: consistent {amplification(d, theta, scaling):.4f}, "
              f"lumped {amplification(d, theta, scaling, 'lumped'):.4f}")
