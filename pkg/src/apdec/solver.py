"""Time loop around the DeC step: time-step choice, boundaries, snapshots."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .basis import FESpace
from .dec import DecIntegrator, StepDiagnostics
from .errors import ConfigError, StateError
from .kinetic import DrmModel, project
from .mesh import BOUNDARY_TAGS
from .residual import BoundaryData, ResidualOperator, SchemeConfig

BC_KINDS = ("periodic",) + BOUNDARY_TAGS


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str = "outflow"
    state: tuple | None = None

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ConfigError(f"unknown boundary kind {self.kind!r}; choose from {BC_KINDS}")
        if self.kind == "inflow" and self.state is None:
            raise ConfigError("inflow boundary needs a macroscopic state")


@dataclass(frozen=True)
class RunConfig:
    cfl: float
    T: float
    scheme: SchemeConfig
    lam: float
    eps: float = 1e-9
    corrections: int | None = None
    subtimesteps: int | None = None
    output_times: tuple = ()
    boundary: dict = field(default_factory=dict)
    maxwellian: str = "nodal"
    mass: str = "consistent"

    def __post_init__(self):
        if not self.cfl > 0:
            raise ConfigError(f"CFL must be positive, got {self.cfl}")
        if not self.T >= 0:
            raise ConfigError(f"final time must be non-negative, got {self.T}")
        if self.corrections is not None and self.corrections < 1:
            raise ConfigError("corrections must be at least 1")
        if self.subtimesteps is not None and self.subtimesteps < 1:
            raise ConfigError("subtimesteps must be at least 1")

    @property
    def n_corrections(self) -> int:
        return self.corrections if self.corrections is not None else self.scheme.degree + 1

    @property
    def n_subtimesteps(self) -> int:
        return self.subtimesteps if self.subtimesteps is not None else self.scheme.degree

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def compute_dt(h_min: float, cfl: float, lam: float, t: float = 0.0, T: float = np.inf,
               output_times=()) -> float:
    """CFL step dt = cfl h_min / lam, shortened to land on T and output times."""
    if not lam > 0:
        raise ConfigError("relaxation speed must be positive")
    dt = cfl * h_min / lam
    stops = [s for s in (*output_times, T) if s > t + 1e-14 * max(1.0, abs(s))]
    if stops:
        nxt = min(stops)
        if t + dt >= nxt - 1e-12 * dt:
            dt = nxt - t
    return dt


def apply_bc(f: np.ndarray, operator: ResidualOperator) -> np.ndarray:
    """Impose strong boundary data (inflow) on a kinetic field, in place."""
    operator.apply_inflow(f)
    return f


def mirror_state(model, u: np.ndarray, normal) -> np.ndarray:
    """Wall reflection of macroscopic states."""
    return model.mirror(u, np.asarray(normal, dtype=float))


@dataclass
class RunResult:
    f: np.ndarray
    u: np.ndarray
    t: float
    steps: int
    snapshots: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    totals: list = field(default_factory=list)


class Solver:
    """Holds the discrete operators for one mesh, degree and configuration."""

    def __init__(self, space: FESpace, drm: DrmModel, config: RunConfig):
        if config.scheme.degree != space.degree:
            raise ConfigError("scheme degree and space degree differ")
        self.space = space
        self.config = config
        self.drm = drm.with_eps(config.eps) if drm.eps != config.eps else drm
        inflow = config.boundary.get("inflow")
        data = BoundaryData(None if inflow is None else np.asarray(inflow.state, dtype=float))
        self.operator = ResidualOperator(space, self.drm, config.scheme, data)
        self.integrator = DecIntegrator(self.operator, config.n_subtimesteps,
                                        config.n_corrections, config.maxwellian, config.mass)

    def initial_field(self, u0: np.ndarray) -> np.ndarray:
        """f_0 = M(u_0) with the integrator's Maxwellian evaluation."""
        try:
            f0 = self.integrator.maxwellian(np.asarray(u0, dtype=float))
        except StateError as err:
            err.time = 0.0
            raise
        return apply_bc(f0, self.operator)

    def dt(self, t: float) -> float:
        c = self.config
        return compute_dt(self.space.mesh.h_min, c.cfl, self.drm.lam, t, c.T, c.output_times)

    def run(self, f0: np.ndarray, callback: Callable | None = None,
            track_diagnostics: bool = False, track_totals: bool = False) -> RunResult:
        c = self.config
        f = np.array(f0, dtype=float, copy=True)
        t = 0.0
        steps = 0
        result = RunResult(f, project(f), t, 0)
        if track_totals:
            result.totals.append(self.space.integrate(project(f)))
        pending = sorted(s for s in c.output_times if 0 < s <= c.T)
        while t < c.T - 1e-12 * max(1.0, c.T):
            dt = self.dt(t)
            diag = StepDiagnostics() if track_diagnostics else None
            try:
                f, u = self.integrator.step(f, dt, diag)
                self.drm.base.check(u)
                if not np.all(np.isfinite(f)):
                    raise StateError("non-finite kinetic state")
            except StateError as err:
                err.time = t + dt
                raise
            t += dt
            steps += 1
            if diag is not None:
                result.diagnostics.append(diag)
            if track_totals:
                result.totals.append(self.space.integrate(u))
            while pending and abs(pending[0] - t) <= 1e-10 * max(1.0, t):
                s = pending.pop(0)
                result.snapshots.append((s, u.copy()))
                if callback is not None:
                    callback(s, u)
        result.f, result.u, result.t, result.steps = f, project(f), t, steps
        return result


def time_loop(space: FESpace, drm: DrmModel, u0: np.ndarray, config: RunConfig,
              callback: Callable | None = None, **kw) -> RunResult:
    solver = Solver(space, drm, config)
    return solver.run(solver.initial_field(u0), callback, **kw)
