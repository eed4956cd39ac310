"""IMEX deferred-correction time stepping for the kinetic system.

Every update is written in closed form.  The relaxation parameter only
appears through eps/(eps+dt) and dt/(eps+dt), so eps = 0 is allowed and
gives the exact relaxation limit f = M(u).

Shapes: f is (n_dofs, N, K), u is (n_dofs, K); workspace stacks add a
leading subtimestep axis of length M+1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .kinetic import project
from .residual import ResidualOperator


MASS_MODES = ("consistent", "lumped")


def quad_weights(M: int) -> np.ndarray:
    """w[m, r] = int_0^{m/M} l_r(s) ds on equispaced nodes of [0, 1].

    Row 0 is zero.  Rows sum to m/M.
    """
    if M not in (1, 2, 3, 4):
        raise ConfigError(f"unsupported number of subtimesteps {M}")
    nodes = np.linspace(0.0, 1.0, M + 1)
    w = np.zeros((M + 1, M + 1))
    for r in range(M + 1):
        others = np.delete(nodes, r)
        poly = np.poly1d(others, r=True) / np.prod(nodes[r] - others)
        prim = np.polyint(poly)
        w[:, r] = prim(nodes) - prim(0.0)
    return w


@dataclass(frozen=True)
class SubtimeGrid:
    M: int

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.M + 1)

    @property
    def weights(self) -> np.ndarray:
        return quad_weights(self.M)


@dataclass
class DecWorkspace:
    """Subtimestep values of one correction generation.

    ``residual[m]`` caches phi_ad(f[m]); entry 0 never changes within a step.
    """

    f: np.ndarray
    u: np.ndarray
    residual: list = field(default_factory=list)

    @classmethod
    def constant(cls, f0: np.ndarray, M: int) -> "DecWorkspace":
        f = np.repeat(f0[None], M + 1, axis=0)
        return cls(f, project(f), [None] * (M + 1))

    def copy(self) -> "DecWorkspace":
        return DecWorkspace(self.f.copy(), self.u.copy(), list(self.residual))


@dataclass
class StepDiagnostics:
    """Max-norm change of f between successive generations, per correction."""

    differences: list = field(default_factory=list)

    @property
    def ratios(self) -> np.ndarray:
        d = np.asarray(self.differences)
        if len(d) < 2:
            return np.zeros(0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return d[1:] / d[:-1]


class DecIntegrator:
    """One-step IMEX DeC with M subtimesteps and ``corrections`` iterations.

    ``corrections`` counts the prediction, so ``corrections = 1`` is the
    first-order IMEX step.  ``maxwellian`` selects how M(u) is evaluated on
    the discrete field: ``"coefficient"`` applies it to each Bernstein
    coefficient, ``"nodal"`` interpolates the pointwise Maxwellian at the
    lattice points.  ``mass`` picks the time term of the high-order
    operator: ``"consistent"`` uses the assembled mass matrix,
    ``"lumped"`` uses |C_sigma| and turns every correction into an explicit
    Runge-Kutta-like stage, which keeps strong shocks free of the undershoots
    the consistent mass produces next to a jump.
    """

    def __init__(self, operator: ResidualOperator, M: int, corrections: int,
                 maxwellian: str = "nodal", mass: str = "consistent"):
        if corrections < 1:
            raise ConfigError("at least one correction (the prediction) is needed")
        if maxwellian not in ("coefficient", "nodal"):
            raise ConfigError(f"unknown Maxwellian evaluation {maxwellian!r}")
        if mass not in MASS_MODES:
            raise ConfigError(f"unknown mass treatment {mass!r}; choose from {MASS_MODES}")
        self.op = operator
        self.drm = operator.drm
        self.space = operator.space
        self.grid = SubtimeGrid(M)
        self.w = self.grid.weights
        self.corrections = corrections
        self.maxwellian_mode = maxwellian
        self.lumped = self.space.lumped
        self.mass_mode = mass
        self.mass = self.space.mass if mass == "consistent" else None

    # -- building blocks -----------------------------------------------------

    def maxwellian(self, u: np.ndarray) -> np.ndarray:
        if self.maxwellian_mode == "coefficient" or self.space.degree == 1:
            return self.drm.maxwellian(u)
        vals = self.space.to_values(u)
        return self.space.from_values(self.drm.maxwellian(vals))

    def _mass(self, x: np.ndarray) -> np.ndarray:
        if self.mass is None:
            return self.lumped.reshape((-1,) + (1,) * (x.ndim - 1)) * x
        flat = x.reshape(x.shape[0], -1)
        return np.asarray(self.mass @ flat).reshape(x.shape)

    def _per_dof(self, x: np.ndarray) -> np.ndarray:
        return x / self.lumped.reshape((-1,) + (1,) * (x.ndim - 1))

    def _residual(self, ws: DecWorkspace, r: int) -> np.ndarray:
        if ws.residual[r] is None:
            ws.residual[r] = self.op(ws.f[r])
        return ws.residual[r]

    def l1_update_u(self, f0: np.ndarray, dtm: float, res0: np.ndarray | None = None) -> np.ndarray:
        """Forward-Euler prediction of u at a subtimestep of length ``dtm``."""
        if res0 is None:
            res0 = self.op(f0)
        u = project(f0) - dtm * self._per_dof(project(res0))
        self.op.apply_inflow_u(u)
        return u

    def l1_update_f(self, f0: np.ndarray, um: np.ndarray, dtm: float,
                    res0: np.ndarray | None = None) -> np.ndarray:
        """IMEX prediction of f, explicit thanks to the already known u^m."""
        if res0 is None:
            res0 = self.op(f0)
        eps = self.drm.eps
        a = eps / (eps + dtm)
        b = dtm / (eps + dtm)
        f = a * (f0 - dtm * self._per_dof(res0)) + b * self.maxwellian(um)
        self.op.apply_inflow(f)
        return f

    def l2_defect(self, ws: DecWorkspace, m: int, dt: float):
        """Advective and relaxation parts of the high-order operator at node m.

        Returns ``(adv, relax)`` with

            adv   = Mass (f^m - f^0) + dt sum_r w[m, r] phi_ad(f^r)
            relax = dt sum_r w[m, r] |C| (f^r - M(u^r))

        so the full operator is adv + relax / eps.  P(relax) vanishes.
        """
        adv = self._mass(ws.f[m] - ws.f[0])
        relax = np.zeros_like(ws.f[0])
        for r in range(self.grid.M + 1):
            if self.w[m, r] == 0.0:
                continue
            adv = adv + dt * self.w[m, r] * self._residual(ws, r)
            relax = relax + dt * self.w[m, r] * (ws.f[r] - self.maxwellian(ws.u[r]))
        return adv, self.lumped[:, None, None] * relax

    def correct(self, ws: DecWorkspace, dt: float) -> DecWorkspace:
        """One deferred-correction sweep; all u first, then all f."""
        M = self.grid.M
        eps = self.drm.eps
        new = DecWorkspace(ws.f.copy(), ws.u.copy(), [ws.residual[0]] + [None] * M)
        defects = [None] + [self.l2_defect(ws, m, dt) for m in range(1, M + 1)]
        for m in range(1, M + 1):
            adv, _ = defects[m]
            new.u[m] = ws.u[m] - self._per_dof(project(adv))
            self.op.apply_inflow_u(new.u[m])
        for m in range(1, M + 1):
            adv, relax = defects[m]
            dtm = dt * self.grid.nodes[m]
            a = eps / (eps + dtm)
            b = dtm / (eps + dtm)
            # relax carries the factor dt * w[m, r]
            new.f[m] = (ws.f[m]
                        + b * (self.maxwellian(new.u[m]) - self.maxwellian(ws.u[m]))
                        - a * self._per_dof(adv)
                        - self._per_dof(relax) / (eps + dtm))
            self.op.apply_inflow(new.f[m])
        return new

    def step(self, f0: np.ndarray, dt: float, diagnostics: StepDiagnostics | None = None):
        """Advance f0 by dt; returns (f, u) at the new time."""
        ws = DecWorkspace.constant(f0, self.grid.M)
        for _ in range(self.corrections):
            new = self.correct(ws, dt)
            if diagnostics is not None:
                diagnostics.differences.append(float(np.max(np.abs(new.f - ws.f))))
            ws = new
        return ws.f[-1].copy(), ws.u[-1].copy()


def dec_correct(integrator: DecIntegrator, ws: DecWorkspace, dt: float) -> DecWorkspace:
    return integrator.correct(ws, dt)


def dec_step(integrator: DecIntegrator, f0: np.ndarray, dt: float):
    return integrator.step(f0, dt)
