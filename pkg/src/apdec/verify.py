"""Error norms, convergence rates and reference solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, StateError


@dataclass(frozen=True)
class ErrorReport:
    """Componentwise discrete errors: L2 = sqrt(sum |C| e^2), L1 = sum |C| |e|."""

    L1: np.ndarray
    L2: np.ndarray
    Linf: np.ndarray
    h: float = float("nan")
    dofs: int = 0

    def component(self, k: int = 0) -> tuple:
        return float(self.L1[k]), float(self.L2[k]), float(self.Linf[k])


def error_norms(u: np.ndarray, reference: np.ndarray, lumped: np.ndarray,
                h: float = float("nan")) -> ErrorReport:
    """Weighted norms of ``u - reference``; both are (n_dofs,) or (n_dofs, K)."""
    u = np.asarray(u, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if u.shape != reference.shape or u.shape[0] != len(lumped):
        raise ConfigError(f"shape mismatch: {u.shape} vs {reference.shape} with {len(lumped)} weights")
    e = (u - reference).reshape(len(lumped), -1)
    w = np.asarray(lumped, dtype=float)[:, None]
    return ErrorReport(
        L1=np.sum(w * np.abs(e), axis=0),
        L2=np.sqrt(np.sum(w * e * e, axis=0)),
        Linf=np.max(np.abs(e), axis=0),
        h=h,
        dofs=len(lumped),
    )


def eoc(errors, hs) -> np.ndarray:
    """Pairwise rates log(e_i/e_{i+1}) / log(h_i/h_{i+1}); NaN where an error is zero."""
    e = np.asarray(errors, dtype=float)
    h = np.asarray(hs, dtype=float)
    if len(e) != len(h) or len(e) < 2:
        raise ConfigError("need at least two (error, h) pairs")
    if np.any(np.diff(h) >= 0):
        raise ConfigError("mesh sizes must decrease strictly")
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])
    r[(e[:-1] <= 0) | (e[1:] <= 0)] = np.nan
    return r


def eoc_fit(errors, hs) -> float:
    """Least-squares slope of log e against log h over all points."""
    e = np.asarray(errors, dtype=float)
    h = np.asarray(hs, dtype=float)
    if np.any(e <= 0):
        return float("nan")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


# ---------------------------------------------------------------------------
# exact Riemann problem for the ideal-gas Euler equations


def _prefactors(rho, p, gamma):
    A = 2.0 / ((gamma + 1.0) * rho)
    B = (gamma - 1.0) / (gamma + 1.0) * p
    return A, B


def _pressure_function(p, rho, pk, gamma):
    """f_K(p) and its derivative for one side."""
    c = math.sqrt(gamma * pk / rho)
    if p > pk:
        A, B = _prefactors(rho, pk, gamma)
        q = math.sqrt(A / (p + B))
        return (p - pk) * q, q * (1.0 - 0.5 * (p - pk) / (p + B))
    r = p / pk
    e = (gamma - 1.0) / (2.0 * gamma)
    return 2.0 * c / (gamma - 1.0) * (r ** e - 1.0), r ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho * c)


def star_state(left, right, gamma: float = 1.4):
    """Star pressure and velocity for primitive states (rho, v, p)."""
    rl, ul, pl = map(float, left)
    rr, ur, pr = map(float, right)
    if min(rl, pl, rr, pr) <= 0:
        raise StateError("Riemann data must have positive density and pressure")
    cl, cr = math.sqrt(gamma * pl / rl), math.sqrt(gamma * pr / rr)
    if 2.0 * (cl + cr) / (gamma - 1.0) <= ur - ul:
        raise StateError("vacuum is generated by the Riemann data")

    def g(p):
        return _pressure_function(p, rl, pl, gamma)[0] + _pressure_function(p, rr, pr, gamma)[0] + ur - ul

    lo, hi = 1e-14 * min(pl, pr), max(pl, pr)
    while g(hi) < 0:
        hi *= 2.0
    p = brentq(g, lo, hi, xtol=1e-15, rtol=1e-14, maxiter=500)
    u = 0.5 * (ul + ur) + 0.5 * (_pressure_function(p, rr, pr, gamma)[0]
                                 - _pressure_function(p, rl, pl, gamma)[0])
    return p, u


def exact_riemann(left, right, gamma: float, xi) -> np.ndarray:
    """Primitive solution (rho, v, p) sampled at similarity coordinates xi = (x - x0)/t.

    Returns an array of shape (len(xi), 3).
    """
    rl, ul, pl = map(float, left)
    rr, ur, pr = map(float, right)
    ps, us = star_state(left, right, gamma)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.empty((len(xi), 3))
    gm, gp = gamma - 1.0, gamma + 1.0
    cl, cr = math.sqrt(gamma * pl / rl), math.sqrt(gamma * pr / rr)
    for i, s in enumerate(xi):
        if s <= us:
            # left of the contact
            if ps > pl:
                rs = rl * (ps / pl + gm / gp) / (gm / gp * ps / pl + 1.0)
                sl = ul - cl * math.sqrt(gp / (2 * gamma) * ps / pl + gm / (2 * gamma))
                out[i] = (rl, ul, pl) if s <= sl else (rs, us, ps)
            else:
                rs = rl * (ps / pl) ** (1.0 / gamma)
                cs = cl * (ps / pl) ** (gm / (2 * gamma))
                head, tail = ul - cl, us - cs
                if s <= head:
                    out[i] = (rl, ul, pl)
                elif s >= tail:
                    out[i] = (rs, us, ps)
                else:
                    v = 2.0 / gp * (cl + gm / 2.0 * ul + s)
                    c = 2.0 / gp * (cl + gm / 2.0 * (ul - s))
                    rho = rl * (c / cl) ** (2.0 / gm)
                    out[i] = (rho, v, pl * (c / cl) ** (2 * gamma / gm))
        else:
            if ps > pr:
                rs = rr * (ps / pr + gm / gp) / (gm / gp * ps / pr + 1.0)
                sr = ur + cr * math.sqrt(gp / (2 * gamma) * ps / pr + gm / (2 * gamma))
                out[i] = (rr, ur, pr) if s >= sr else (rs, us, ps)
            else:
                rs = rr * (ps / pr) ** (1.0 / gamma)
                cs = cr * (ps / pr) ** (gm / (2 * gamma))
                head, tail = ur + cr, us + cs
                if s >= head:
                    out[i] = (rr, ur, pr)
                elif s <= tail:
                    out[i] = (rs, us, ps)
                else:
                    v = 2.0 / gp * (-cr + gm / 2.0 * ur + s)
                    c = 2.0 / gp * (cr - gm / 2.0 * (ur - s))
                    rho = rr * (c / cr) ** (2.0 / gm)
                    out[i] = (rho, v, pr * (c / cr) ** (2 * gamma / gm))
    return out


# ---------------------------------------------------------------------------
# conservation


@dataclass(frozen=True)
class ConservationAudit:
    applicable: bool
    max_drift: float


def conservation_audit(totals, periodic: bool = True) -> ConservationAudit:
    """Largest relative drift of the conserved totals; declined for open boundaries."""
    if not periodic:
        return ConservationAudit(False, float("nan"))
    q = np.asarray(totals, dtype=float).reshape(len(totals), -1)
    scale = np.maximum(np.abs(q[0]), 1e-300)
    return ConservationAudit(True, float(np.max(np.abs(q - q[0]) / scale)))


# ---------------------------------------------------------------------------
# smooth references


def isentropic_gamma3_density(x, t, rho0, period: float = 2.0, tol: float = 1e-14):
    """Exact density for gamma = 3, p = rho^3, zero initial velocity.

    With c = sqrt(3) rho the Riemann invariants v +- c travel with their own
    speed, so each obeys Burgers' equation.  Valid before shocks form.
    """
    x = np.asarray(x, dtype=float)
    s3 = math.sqrt(3.0)

    def invariant(sign):
        # w_t + w w_x = 0 with w(x,0) = sign * sqrt(3) rho0(x)
        y = x.copy()
        for _ in range(200):
            w = sign * s3 * rho0(np.mod(y, period))
            new = x - w * t
            if np.max(np.abs(new - y)) < tol:
                y = new
                break
            y = new
        return sign * s3 * rho0(np.mod(y, period))

    plus, minus = invariant(1.0), invariant(-1.0)
    return (plus - minus) / (2.0 * s3), 0.5 * (plus + minus)


# ---------------------------------------------------------------------------
# discrete solutions against references


def nodal_errors(space, u: np.ndarray, reference_values: np.ndarray) -> ErrorReport:
    """Errors of the point values at the lattice points, weighted by |C_sigma|."""
    return error_norms(space.to_values(u), reference_values, space.lumped, h=space.mesh.h_max)


def exact_errors(space, u: np.ndarray, exact, t: float) -> ErrorReport:
    return nodal_errors(space, u, np.asarray(exact(space.points, t), dtype=float))


def fine_grid_errors(space, u: np.ndarray, fine_space, u_fine: np.ndarray) -> ErrorReport:
    """Compare against a finer discrete solution evaluated at the coarse lattice."""
    return nodal_errors(space, u, fine_space.evaluate(u_fine, space.points))


@dataclass
class ConvergenceRow:
    degree: int
    h: float
    dofs: int
    errors: ErrorReport
    eoc: tuple = (float("nan"),) * 3


def convergence_table(case, degree: int, cells, component: int = 0,
                      reference: str | None = None, fine_factor: int = 4, **overrides) -> list:
    """Run ``case`` on each resolution and collect errors and pairwise rates.

    ``reference`` is ``"exact"`` (closed form at the final time) or
    ``"fine_grid"`` (one extra run on ``fine_factor`` times the finest mesh).
    Rates are reported for ``component``.
    """
    from .cases import get_case, run_case

    if isinstance(case, str):
        case = get_case(case)
    reference = reference or case.reference
    if reference not in ("exact", "fine_grid"):
        raise ConfigError(f"case {case.name!r} has no smooth reference")
    cells = sorted(int(c) for c in cells)
    runs = [run_case(case, degree, n, **overrides) for n in cells]
    if reference == "fine_grid":
        fine_space, fine = run_case(case, degree, fine_factor * cells[-1], **overrides)
        reports = [fine_grid_errors(s, r.u, fine_space, fine.u) for s, r in runs]
    else:
        if case.exact is None:
            raise ConfigError(f"case {case.name!r} has no exact solution")
        reports = [exact_errors(s, r.u, case.exact, r.t) for s, r in runs]
    rows = [ConvergenceRow(degree, rep.h, rep.dofs, rep) for rep in reports]
    if len(rows) > 1:
        hs = [r.h for r in rows]
        rates = [eoc([getattr(r.errors, n)[component] for r in rows], hs)
                 for n in ("L1", "L2", "Linf")]
        for i in range(1, len(rows)):
            rows[i].eoc = tuple(float(rt[i - 1]) for rt in rates)
    return rows


def riemann_l1_error(space, u: np.ndarray, left, right, gamma: float, x0: float, t: float,
                     component: int = 0, samples: int = 40001) -> float:
    """L1 distance of one conserved component to the exact Riemann solution.

    The discrete field is evaluated as a polynomial, not at its DoFs, and the
    integral is a midpoint sum over ``samples`` equispaced points.
    """
    a, b = space.mesh.cell_bounds[0, 0], space.mesh.cell_bounds[-1, 1]
    x = a + (np.arange(samples) + 0.5) * (b - a) / samples
    prim = exact_riemann(left, right, gamma, (x - x0) / t)
    rho, v, p = prim.T
    exact = np.stack([rho, rho * v, p / (gamma - 1.0) + 0.5 * rho * v * v], axis=1)
    num = space.evaluate(u, x[:, None]).reshape(samples, -1)
    return float(np.mean(np.abs(num[:, component] - exact[:, component])) * (b - a))
