"""Nodal residuals for the kinetic advection operator.

Each kinetic block n is advected with the constant velocity a_n, so the
Galerkin residual is linear: phi_sigma^K = int_K phi_sigma a_n . grad f_h.
Two variants are provided:

``galerkin_jump``
    Galerkin plus continuous-interior-penalty jumps of normal derivatives.
``lxf_blend``
    Local Lax-Friedrichs, limited and blended per block and component, then
    the same jump terms.

The relaxation source is not part of these residuals; it is handled in
closed form by the time integrator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import FESpace, bernstein, bernstein_derivative
from .errors import ConfigError
from .kinetic import DrmModel, project
from .mesh import lattice_indices

VARIANTS = ("galerkin_jump", "lxf_blend")
JUMP_SCALINGS = ("reference", "physical")


@dataclass(frozen=True)
class SchemeConfig:
    variant: str = "galerkin_jump"
    theta: tuple = (1.0,)
    degree: int = 1
    jump_scaling: str = "physical"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown scheme variant {self.variant!r}; choose from {VARIANTS}")
        if any(t < 0 for t in self.theta):
            raise ConfigError(f"jump coefficients must be non-negative, got {self.theta}")
        if self.degree not in (1, 2, 3):
            raise ConfigError(f"unsupported degree {self.degree}")
        if self.jump_scaling not in JUMP_SCALINGS:
            raise ConfigError(f"unknown jump scaling {self.jump_scaling!r}; choose from {JUMP_SCALINGS}")


# ---------------------------------------------------------------------------
# element-local pieces, all vectorised over cells


def local_coefficients(space: FESpace, f: np.ndarray) -> np.ndarray:
    """Gather (n_dofs, ...) -> (nE, n_local, ...)."""
    return f[space.cell_dofs]


def galerkin_residual(space: FESpace, f: np.ndarray, velocities: np.ndarray) -> np.ndarray:
    """Per-cell Galerkin residuals, shape (nE, n_local, N, K).

    ``velocities`` is the (N, D) table of block velocities.
    """
    fl = local_coefficients(space, f)
    # G[e, i, j, n] = sum_d a_n^d int phi_i d_d phi_j
    G = np.einsum("eijd,nd->eijn", space.local_advection, velocities)
    return np.einsum("eijn,ejnk->eink", G, fl)


def lxf_dissipation(space: FESpace, velocities: np.ndarray) -> np.ndarray:
    """alpha_{K,n} = max_sigma |a_n . int_K grad phi_sigma|, shape (nE, N).

    Equals lambda for every degree on intervals.
    """
    mean_grad = np.einsum("eq,eqld->eld", space.quad_weights, space.grad_at_quad)
    return np.abs(np.einsum("eld,nd->eln", mean_grad, velocities)).max(axis=1)


def lxf_residual(space: FESpace, f: np.ndarray, velocities: np.ndarray,
                 alpha: np.ndarray | None = None) -> np.ndarray:
    """Galerkin part plus alpha_K (f_sigma - mean_K f)."""
    if alpha is None:
        alpha = lxf_dissipation(space, velocities)
    fl = local_coefficients(space, f)
    gal = galerkin_residual(space, f, velocities)
    return gal + alpha[:, None, :, None] * (fl - fl.mean(axis=1, keepdims=True))


def limit_blend(lxf: np.ndarray, total: np.ndarray | None = None) -> np.ndarray:
    """Limit and blend nodal residuals along axis 1 (the local DoFs).

    Works componentwise on everything after axis 1.  Components with a zero
    total, or with no DoF sharing the sign of the total, keep the
    Lax-Friedrichs value.
    """
    lxf = np.asarray(lxf, dtype=float)
    if total is None:
        total = lxf.sum(axis=1)
    tot = total[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(tot != 0.0, lxf / tot, 0.0)
    pos = np.maximum(ratio, 0.0)
    denom = pos.sum(axis=1, keepdims=True)
    abs_sum = np.abs(lxf).sum(axis=1, keepdims=True)
    ok = (tot != 0.0) & (denom > 0.0) & (abs_sum > 0.0)
    safe_denom = np.where(ok, denom, 1.0)
    beta = pos / safe_denom
    theta = np.where(ok, np.abs(tot) / np.where(abs_sum > 0, abs_sum, 1.0), 1.0)
    blended = (1.0 - theta) * beta * tot + theta * lxf
    return np.where(ok, blended, lxf)


def source_residual(f_sigma, u_sigma, drm: DrmModel, lumped: float) -> np.ndarray:
    """Lumped relaxation source |C_sigma| (M(u_sigma) - f_sigma) / eps at one DoF.

    Diagnostic helper; the time integrator never forms this quotient.
    """
    if drm.eps == 0:
        raise ConfigError("source residual is undefined for eps = 0")
    f_sigma = np.asarray(f_sigma, dtype=float)
    return lumped * (drm.maxwellian(u_sigma) - f_sigma) / drm.eps


# ---------------------------------------------------------------------------
# jump stabilisation


def _face_bary_1d(face_index: np.ndarray) -> np.ndarray:
    lam = np.zeros((len(face_index), 2))
    lam[np.arange(len(face_index)), 1 - face_index] = 1.0
    return lam[:, None, :]


def _face_bary_2d(space: FESpace, cells, pq, t):
    """Barycentric coordinates in ``cells`` of the points (1-t) P + t Q."""
    verts = space.mesh.triangles[cells]
    lp = np.argmax(verts == pq[:, :1], axis=1)
    lq = np.argmax(verts == pq[:, 1:], axis=1)
    lam = np.zeros((len(cells), len(t), 3))
    rows = np.arange(len(cells))
    lam[rows, :, lp] = 1.0 - t[None, :]
    lam[rows, :, lq] = t[None, :]
    return lam


def jump_matrix(space: FESpace, theta, scaling: str = "physical") -> sp.csr_matrix:
    """Sparse J with (J f)_sigma = sum_e sum_k theta_k h_e^{2k} int_e [D^k f][D^k phi_sigma].

    With ``scaling="physical"`` D is the physical normal derivative.  With
    ``"reference"`` it is measured in units of the facet size,
    D = h_e d_n, so the weight becomes theta_k h_e^{4k}.
    Each interior facet is visited once; boundary facets carry no term.
    In 1D h_e is the mean width of the two neighbours and the facet
    integral is a point value; in 2D h_e is the edge length.
    """
    if scaling not in JUMP_SCALINGS:
        raise ConfigError(f"unknown jump scaling {scaling!r}")
    power = 4 if scaling == "reference" else 2
    n = space.n_dofs
    faces = space.mesh.interior_faces
    theta = [float(t) for t in theta]
    if len(faces) == 0 or not any(theta):
        return sp.csr_matrix((n, n))
    d = space.degree
    if space.dim == 1:
        lam_l = _face_bary_1d(faces.left_face)
        lam_r = _face_bary_1d(faces.right_face)
        wts = np.ones((len(faces), 1))
        widths = space.mesh.widths
        h_e = 0.5 * (widths[faces.left] + widths[faces.right])
    else:
        qp, qw = np.polynomial.legendre.leggauss(d + 1)
        t = 0.5 * (qp + 1.0)
        lam_l = _face_bary_2d(space, faces.left, faces.vertex_pairs, t)
        lam_r = _face_bary_2d(space, faces.right, faces.vertex_pairs, t)
        wts = faces.measure[:, None] * 0.5 * qw[None, :]
        h_e = faces.measure
    c_l = np.einsum("ead,ed->ea", space.bary_grad[faces.left], faces.normal)[:, None, :]
    c_r = np.einsum("ead,ed->ea", space.bary_grad[faces.right], faces.normal)[:, None, :]
    dofs = np.concatenate([space.cell_dofs[faces.left], space.cell_dofs[faces.right]], axis=1)
    nl = space.n_local
    local = np.zeros((len(faces), 2 * nl, 2 * nl))
    for k, th in enumerate(theta, start=1):
        if th == 0.0 or k > d:
            continue
        dl = bernstein_derivative(d, k, lam_l, c_l)
        dr = bernstein_derivative(d, k, lam_r, c_r)
        jump = np.concatenate([dl, -dr], axis=-1)  # (nF, nq, 2 nl)
        scale = th * h_e ** (power * k)
        local += scale[:, None, None] * np.einsum("fq,fqi,fqj->fij", wts, jump, jump)
    rows = np.repeat(dofs, 2 * nl, axis=1).ravel()
    cols = np.tile(dofs, (1, 2 * nl)).ravel()
    return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))


def jump_stabilization(space: FESpace, f: np.ndarray, theta, scaling: str = "physical") -> np.ndarray:
    """Jump contributions for every DoF, same shape as ``f``."""
    J = jump_matrix(space, theta, scaling)
    flat = f.reshape(space.n_dofs, -1)
    return np.asarray(J @ flat).reshape(f.shape)


# ---------------------------------------------------------------------------
# the assembled operator


@dataclass
class BoundaryData:
    """Per-tag boundary data: ``inflow_state`` is a macroscopic state."""

    inflow_state: np.ndarray | None = None


class ResidualOperator:
    """Assembles phi_ad(f): the advective nodal residual summed over cells.

    Output has the shape of ``f``: (n_dofs, N, K).  Boundary treatment:
    outflow needs nothing, walls add a weak upwind term with the mirrored
    Maxwellian, inflow DoFs are listed in ``inflow_dofs`` and reset by the
    time integrator.
    """

    def __init__(self, space: FESpace, drm: DrmModel, scheme: SchemeConfig,
                 boundary: BoundaryData | None = None):
        if scheme.degree != space.degree:
            raise ConfigError("scheme degree and space degree differ")
        self.space = space
        self.drm = drm
        self.scheme = scheme
        self.boundary = boundary or BoundaryData()
        self.velocities = drm.velocities
        self.jump = jump_matrix(space, scheme.theta, scheme.jump_scaling)
        if scheme.variant == "galerkin_jump":
            G = space.advection
            self.block_ops = [sum(self.velocities[n, dd] * G[dd] for dd in range(space.dim)) + self.jump
                              for n in range(drm.n_blocks)]
        else:
            self.alpha = lxf_dissipation(space, self.velocities)
        self._setup_boundary()

    # -- boundaries ----------------------------------------------------------

    def _setup_boundary(self):
        sp_ = self.space
        bf = sp_.mesh.boundary_faces
        walls = bf.select("wall")
        self.has_wall = len(walls) > 0
        if self.has_wall:
            if sp_.dim == 1:
                lam = _face_bary_1d(walls.face)
                w = np.ones((len(walls), 1))
            else:
                qp, qw = np.polynomial.legendre.leggauss(sp_.degree + 2)
                t = 0.5 * (qp + 1.0)
                a = walls.face
                rows = np.arange(len(walls))
                lp, lq = (a + 1) % 3, (a + 2) % 3
                lam = np.zeros((len(walls), len(t), 3))
                lam[rows, :, lp] = 1.0 - t
                lam[rows, :, lq] = t
                w = walls.measure[:, None] * 0.5 * qw[None, :]
            self.wall_values = bernstein(sp_.degree, lam)  # (nF, nq, nl)
            self.wall_weights = w
            self.wall_dofs = sp_.cell_dofs[walls.cell]
            self.wall_normal = walls.normal
            an = self.velocities @ walls.normal.T  # (N, nF)
            self.wall_inflow_speed = np.minimum(an.T, 0.0)  # (nF, N)
        inflow = bf.select("inflow")
        if len(inflow):
            if self.boundary.inflow_state is None:
                raise ConfigError("inflow boundary present but no inflow state given")
            alphas = np.array(lattice_indices(sp_.degree, sp_.dim + 1))
            # DoFs on facet a have no weight on the opposite vertex a
            mask = alphas[:, inflow.face].T == 0
            dofs = sp_.cell_dofs[inflow.cell][mask]
            self.inflow_dofs = np.unique(dofs)
            u_in = np.asarray(self.boundary.inflow_state, dtype=float)
            self.inflow_f = self.drm.maxwellian(u_in)
            self.inflow_u = u_in
        else:
            self.inflow_dofs = np.zeros(0, dtype=int)

    def _wall_term(self, f: np.ndarray) -> np.ndarray:
        fl = f[self.wall_dofs]  # (nF, nl, N, K)
        fq = np.einsum("fql,flnk->fqnk", self.wall_values, fl)
        uq = project(fq)
        normal = np.broadcast_to(self.wall_normal[:, None, :], uq.shape[:2] + (self.space.dim,))
        fbc = self.drm.maxwellian(self.drm.base.mirror(uq, normal))
        diff = (fbc - fq) * self.wall_inflow_speed[:, None, :, None]
        local = np.einsum("fq,fql,fqnk->flnk", self.wall_weights, self.wall_values, diff)
        out = np.zeros_like(f)
        np.add.at(out, self.wall_dofs, local)
        return out

    def apply_inflow(self, f: np.ndarray) -> None:
        """Strong inflow: hold the listed DoFs at M(u_in), in place."""
        if len(self.inflow_dofs):
            f[self.inflow_dofs] = self.inflow_f

    def apply_inflow_u(self, u: np.ndarray) -> None:
        if len(self.inflow_dofs):
            u[self.inflow_dofs] = self.inflow_u

    # -- residual ------------------------------------------------------------

    def __call__(self, f: np.ndarray) -> np.ndarray:
        sp_ = self.space
        if self.scheme.variant == "galerkin_jump":
            out = np.empty_like(f)
            for n, A in enumerate(self.block_ops):
                out[:, n, :] = A @ f[:, n, :]
        else:
            lxf = lxf_residual(sp_, f, self.velocities, self.alpha)
            local = limit_blend(lxf)
            out = sp_.gather_sum(local).reshape(f.shape)
            if self.jump.nnz:
                flat = f.reshape(sp_.n_dofs, -1)
                out += np.asarray(self.jump @ flat).reshape(f.shape)
        if self.has_wall:
            out += self._wall_term(f)
        return out


def nodal_totals(local: np.ndarray) -> np.ndarray:
    """Sum of nodal residuals per cell (the fluctuation)."""
    return local.sum(axis=1)

