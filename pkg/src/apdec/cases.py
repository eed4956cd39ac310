"""Benchmark catalogue: models, domains, initial data and run parameters."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError
from .kinetic import DrmModel
from .mesh import build_uniform_1d, disk_mesh, polygon_mesh
from .model import Burgers, Euler, HyperbolicModel, LinearTransport
from .residual import SchemeConfig
from .solver import BoundaryCondition, RunConfig


@dataclass(frozen=True)
class BenchmarkCase:
    """Everything needed to set up one benchmark run.

    ``initial`` maps points (n, dim) to macroscopic states (n, K).
    ``exact(points, t)`` is available for smooth cases with a closed form.
    ``build_mesh(cells)`` returns a mesh with roughly ``cells`` elements.
    ``jump_scaling`` says how the tabulated ``theta`` values are to be read:
    they are tuned for derivatives measured in cell units, except for the
    smooth vortex whose values assume physical derivatives.
    Shocked cases start from sampled coefficients (``init="sample"``), apply
    the Maxwellian per coefficient and use the lumped time term, so every
    Bernstein coefficient stays admissible across a discontinuity.
    """

    name: str
    model: HyperbolicModel
    build_mesh: Callable
    initial: Callable
    lam: float
    cfl: float
    T: float
    variant: str
    theta: dict
    default_cells: int
    eps: float = 1e-9
    periodic: bool = False
    boundary: dict = field(default_factory=dict)
    exact: Callable | None = None
    reference: str = "none"
    description: str = ""
    jump_scaling: str = "reference"
    init: str = "interpolate"
    maxwellian: str = "nodal"
    mass: str = "consistent"

    @property
    def dim(self) -> int:
        return self.model.dim

    def drm(self, eps: float | None = None, lam: float | None = None) -> DrmModel:
        return DrmModel(self.model, self.lam if lam is None else lam,
                        self.eps if eps is None else eps)

    def scheme(self, degree: int) -> SchemeConfig:
        return SchemeConfig(self.variant, tuple(self.theta[degree]), degree, self.jump_scaling)

    def config(self, degree: int, **overrides) -> RunConfig:
        base = dict(cfl=self.cfl, T=self.T, scheme=self.scheme(degree), lam=self.lam,
                    eps=self.eps, boundary=dict(self.boundary), maxwellian=self.maxwellian,
                    mass=self.mass)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**base)

    def initial_coefficients(self, space) -> np.ndarray:
        """Bernstein coefficients of the initial state on ``space``."""
        if self.init == "sample":
            return np.asarray(self.initial(space.points), dtype=float)
        return space.interpolate(self.initial)


# ---------------------------------------------------------------------------
# initial data


def _gaussian(p):
    return np.exp(-80.0 * (p[:, 0] - 0.4) ** 2)[:, None]


def _gaussian_exact(p, t):
    return np.exp(-80.0 * (np.mod(p[:, 0] - t, 1.0) - 0.4) ** 2)[:, None]


def _burgers_sine(p):
    return np.sin(2 * np.pi * p[:, 0])[:, None]


def _riemann_1d(model: Euler, split, left, right):
    def init(p):
        x = p[:, 0]
        lo = model.from_primitive(left[0], left[1], left[2])
        hi = model.from_primitive(right[0], right[1], right[2])
        return np.where((x < split)[:, None], lo, hi)
    return init


_EULER_G3 = Euler(3.0, 1)


def _isentropic_rho(x):
    return 1.0 + 0.5 * np.sin(np.pi * x)


def _isentropic(p):
    rho = _isentropic_rho(p[:, 0])
    return _EULER_G3.from_primitive(rho, np.zeros_like(rho), rho ** 3)


def _isentropic_exact(p, t):
    from .verify import isentropic_gamma3_density
    rho, v = isentropic_gamma3_density(p[:, 0], t, _isentropic_rho, period=2.0)
    return _EULER_G3.from_primitive(rho, v, rho ** 3)


_EULER14_1D = Euler(1.4, 1)
_EULER14_2D = Euler(1.4, 2)


def _woodward_colella(p):
    x = p[:, 0]
    pres = np.where(x < 0.1, 1e3, np.where(x < 0.9, 1e-2, 1e2))
    return _EULER14_1D.from_primitive(np.ones_like(x), np.zeros_like(x), pres)


def _shu_osher(p):
    x = p[:, 0]
    left = x < -4.0
    rho = np.where(left, 3.857143, 1.0 + 0.2 * np.sin(5.0 * x))
    v = np.where(left, 2.629369, 0.0)
    pres = np.where(left, 10.333333, 1.0)
    return _EULER14_1D.from_primitive(rho, v, pres)


def _vortex(p, t=0.0):
    """Steady isentropic vortex with strength 5 / (2 pi)."""
    g = 1.4
    x, y = p[:, 0], p[:, 1]
    r2 = x * x + y * y
    a = 5.0 / (2.0 * np.pi)
    rho = (1.0 - (g - 1.0) / g * 0.5 * a * a * np.exp(1.0 - r2)) ** (1.0 / (g - 1.0))
    bump = a * np.exp(0.5 * (1.0 - r2))
    vel = np.stack([-y * bump, x * bump], axis=1)
    return _EULER14_2D.from_primitive(rho, vel, rho ** g)


def _sod_2d(p):
    inside = (p[:, 0] ** 2 + p[:, 1] ** 2) < 0.25
    rho = np.where(inside, 1.0, 0.125)
    pres = np.where(inside, 1.0, 0.1)
    return _EULER14_2D.from_primitive(rho, np.zeros((len(p), 2)), pres)


DMR_LEFT = (8.0, (8.25, 0.0), 116.5)
DMR_RIGHT = (1.4, (0.0, 0.0), 1.0)
DMR_POLYGON = ((-0.2, 0.0), (0.0, 0.0), (3.0, 1.7), (3.0, 2.2), (-0.2, 2.2))
DMR_TAGS = ("wall", "wall", "outflow", "wall", "inflow")
DMR_AREA = 3.2 * 2.2 - 0.5 * 3.0 * 1.7


def _dmr_state(which):
    rho, vel, pres = which
    return _EULER14_2D.from_primitive(np.array(rho), np.array(vel), np.array(pres))


def _dmr(p):
    left = (p[:, 0] <= 0.0)[:, None]
    return np.where(left, _dmr_state(DMR_LEFT)[None], _dmr_state(DMR_RIGHT)[None])


# ---------------------------------------------------------------------------
# meshes


SHOCKED = dict(init="sample", maxwellian="coefficient", mass="lumped")


def _interval(a, b, periodic):
    def build(cells):
        return build_uniform_1d(a, b, int(cells), periodic=periodic)
    return build


def _disk(radius):
    def build(cells):
        rings = max(2, int(round(np.sqrt(cells / 6.0))))
        return disk_mesh(radius, rings, target_cells=int(cells))
    return build


def _dmr_mesh(cells):
    spacing = np.sqrt(DMR_AREA / (cells * np.sqrt(3.0) / 4.0))
    return polygon_mesh(DMR_POLYGON, spacing, DMR_TAGS)


# ---------------------------------------------------------------------------


def _catalogue() -> dict:
    smooth_theta = {1: (1.0,), 2: (1.0, 0.0), 3: (1.0, 5.0)}
    cases = [
        BenchmarkCase(
            "burgers_sine", Burgers(), _interval(0.0, 1.0, True), _burgers_sine,
            lam=2.0, cfl=0.1, T=0.5, variant="lxf_blend",
            theta={1: (1.0,), 2: (1.0,), 3: (1.0, 0.5)}, default_cells=128, periodic=True,
            description="Burgers, sine wave steepening into a stationary shock at x = 0.5"),
        BenchmarkCase(
            "transport_gaussian", LinearTransport((1.0,)), _interval(0.0, 1.0, True), _gaussian,
            lam=1.5, cfl=0.1, T=0.12, variant="galerkin_jump", theta=smooth_theta,
            default_cells=128, periodic=True, exact=_gaussian_exact, reference="exact",
            description="linear transport of a Gaussian, unit speed, periodic"),
        BenchmarkCase(
            "euler_isentropic", _EULER_G3, _interval(-1.0, 1.0, True), _isentropic,
            lam=3.0, cfl=0.2, T=0.1, variant="galerkin_jump", theta=smooth_theta,
            default_cells=128, periodic=True, exact=_isentropic_exact, reference="fine_grid",
            description="isentropic Euler, gamma = 3, p = rho^3, periodic"),
        BenchmarkCase(
            "sod_1d", _EULER14_1D, _interval(0.0, 1.0, False),
            _riemann_1d(_EULER14_1D, 0.5, (1.0, 0.0, 1.0), (0.125, 0.0, 0.1)),
            lam=2.0, cfl=0.2, T=0.16, variant="lxf_blend",
            theta={1: (1.0,), 2: (1.0, 0.5), 3: (2.5, 4.0)}, default_cells=128,
            boundary={"outflow": BoundaryCondition("outflow")}, reference="riemann",
            description="Sod shock tube", **SHOCKED),
        BenchmarkCase(
            "woodward_colella", _EULER14_1D, _interval(0.0, 1.0, False), _woodward_colella,
            lam=20.0, cfl=0.1, T=0.038, variant="lxf_blend",
            theta={1: (0.5,), 2: (0.8, 1.0), 3: (5.0, 1.0)}, default_cells=256,
            boundary={"outflow": BoundaryCondition("outflow")},
            description="Woodward-Colella interacting blast waves, outflow boundaries", **SHOCKED),
        BenchmarkCase(
            "shu_osher", _EULER14_1D, _interval(-5.0, 5.0, False), _shu_osher,
            lam=3.0, cfl=0.1, T=1.8, variant="lxf_blend",
            theta={1: (0.5,), 2: (0.8, 1.0), 3: (3.0, 1.0)}, default_cells=256,
            boundary={"outflow": BoundaryCondition("outflow")},
            description="Shu-Osher shock / entropy-wave interaction", **SHOCKED),
        BenchmarkCase(
            "vortex_2d", _EULER14_2D, _disk(10.0), _vortex,
            lam=1.4, cfl=0.1, T=1.0, variant="galerkin_jump",
            theta={1: (0.1,), 2: (0.01, 0.0), 3: (0.001, 0.0)}, default_cells=1200,
            boundary={"outflow": BoundaryCondition("outflow")}, exact=_vortex, reference="exact",
            description="steady isentropic vortex on a disk of radius 10", jump_scaling="physical"),
        BenchmarkCase(
            "sod_2d", _EULER14_2D, _disk(1.0), _sod_2d,
            lam=1.4, cfl=0.1, T=0.25, variant="lxf_blend",
            theta={1: (0.1,), 2: (0.1, 1e-4), 3: (0.01, 1e-4)}, default_cells=3576,
            boundary={"outflow": BoundaryCondition("outflow")},
            description="cylindrical Sod problem on the unit disk", **SHOCKED),
        BenchmarkCase(
            "dmr_2d", _EULER14_2D, _dmr_mesh, _dmr,
            lam=15.0, cfl=0.1, T=0.2, variant="lxf_blend",
            theta={1: (0.1,), 2: (0.01, 1e-4), 3: (0.005, 1e-4)}, default_cells=19248,
            boundary={"outflow": BoundaryCondition("outflow"), "wall": BoundaryCondition("wall"),
                      "inflow": BoundaryCondition("inflow", tuple(_dmr_state(DMR_LEFT)))},
            description="shock hitting a wedge: walls, left inflow, right outflow", **SHOCKED),
    ]
    return {c.name: c for c in cases}


CATALOGUE = _catalogue()


def case_names() -> list:
    return list(CATALOGUE)


def get_case(name: str) -> BenchmarkCase:
    try:
        return CATALOGUE[name]
    except KeyError:
        raise ConfigError(f"unknown case {name!r}; available: {', '.join(CATALOGUE)}") from None


def run_case(case: BenchmarkCase | str, degree: int, cells: int | None = None,
             mesh=None, callback=None, track_diagnostics: bool = False,
             track_totals: bool = False, **overrides):
    """Build the space, run the case and return ``(space, result)``.

    ``overrides`` go to :meth:`BenchmarkCase.config` (``eps``, ``cfl``, ``T``,
    ``corrections``, ``scheme`` ...).
    """
    from .basis import FESpace
    from .solver import time_loop

    if isinstance(case, str):
        case = get_case(case)
    if mesh is None:
        mesh = case.build_mesh(cells or case.default_cells)
    space = FESpace(mesh, degree)
    config = case.config(degree, **overrides)
    u0 = case.initial_coefficients(space)
    result = time_loop(space, case.drm(config.eps, config.lam), u0, config, callback,
                       track_diagnostics=track_diagnostics, track_totals=track_totals)
    return space, result
