"""Bernstein bases on intervals and triangles, quadrature, and the assembled space.

Everything is written in barycentric coordinates so the same code serves
both dimensions.  Local DoF ordering follows :func:`mesh.lattice_indices`.
"""

from __future__ import annotations

from functools import cached_property, lru_cache
from math import factorial

import numpy as np
import scipy.sparse as sp
from scipy.special import roots_jacobi

from .errors import ConfigError
from .mesh import DofMap, build_dof_map, lattice_indices

_TOL = 1e-12


def _multinomial(alpha) -> float:
    out = factorial(sum(alpha))
    for a in alpha:
        out //= factorial(a)
    return float(out)


@lru_cache(maxsize=None)
def _tables(degree: int, n_bary: int):
    alphas = np.array(lattice_indices(degree, n_bary), dtype=int)
    coef = np.array([_multinomial(a) for a in alphas])
    return alphas, coef


def bernstein(degree: int, lam: np.ndarray) -> np.ndarray:
    """Values of all degree-``degree`` Bernstein polynomials at barycentric points.

    ``lam`` has shape (..., n_bary); the result has shape (..., n_local).
    """
    lam = np.asarray(lam, dtype=float)
    alphas, coef = _tables(degree, lam.shape[-1])
    # explicit integer powers keep 0**0 == 1
    out = np.ones(lam.shape[:-1] + (len(alphas),))
    for a in range(lam.shape[-1]):
        out *= lam[..., a:a + 1] ** alphas[:, a]
    return out * coef


@lru_cache(maxsize=None)
def _derivative_plan(degree: int, order: int, n_bary: int):
    """For every |beta| = order: multinomial weight and the index map alpha -> alpha - beta."""
    alphas = lattice_indices(degree, n_bary)
    lower = {a: i for i, a in enumerate(lattice_indices(degree - order, n_bary))} if order <= degree else {}
    plan = []
    for beta in lattice_indices(order, n_bary):
        idx = np.array([lower.get(tuple(a - b for a, b in zip(al, beta)), -1) for al in alphas])
        plan.append((np.array(beta), _multinomial(beta), idx))
    return plan


def bernstein_derivative(degree: int, order: int, lam: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``order``-th directional derivative of every Bernstein polynomial.

    ``c`` (broadcastable to ``lam``) holds the derivative of each barycentric
    coordinate along the chosen direction, so for the physical gradient
    component j it is ``dlambda_a/dx_j``.
    """
    lam = np.asarray(lam, dtype=float)
    c = np.asarray(c, dtype=float)
    n_bary = lam.shape[-1]
    n_local = len(lattice_indices(degree, n_bary))
    if order == 0:
        return bernstein(degree, lam) * np.ones(np.broadcast_shapes(lam.shape, c.shape)[:-1] + (1,))
    shape = np.broadcast_shapes(lam.shape, c.shape)[:-1] + (n_local,)
    out = np.zeros(shape)
    if order > degree:
        return out
    low = bernstein(degree - order, lam)
    scale = factorial(degree) / factorial(degree - order)
    for beta, weight, idx in _derivative_plan(degree, order, n_bary):
        cb = np.prod(c ** beta, axis=-1)[..., None]
        valid = idx >= 0
        term = np.zeros(shape)
        term[..., valid] = (low[..., idx[valid]] * weight) * cb
        out += term
    return scale * out


def _to_bary(x, dim: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if dim == 1:
        x = x.reshape(-1)
        lam = np.stack([1.0 - x, x], axis=-1)
    else:
        x = x.reshape(-1, 2)
        lam = np.stack([1.0 - x[:, 0] - x[:, 1], x[:, 0], x[:, 1]], axis=-1)
    if np.any(lam < -_TOL):
        raise ValueError(f"point {x.tolist()} lies outside the reference element")
    return lam


# reference-element barycentric gradients: rows are d(lambda_a)/d(xi_j)
_REF_BARY_GRAD = {1: np.array([[-1.0], [1.0]]),
                  2: np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])}


def eval_basis(degree: int, x, dim: int = 1) -> np.ndarray:
    """Bernstein basis values at reference coordinates (``[0,1]`` or the unit triangle)."""
    lam = _to_bary(x, dim)
    out = bernstein(degree, lam)
    return out[0] if out.shape[0] == 1 else out


def eval_grad(degree: int, x, dim: int = 1) -> np.ndarray:
    """Reference gradients, shape (n_local, dim) for a single point."""
    lam = _to_bary(x, dim)
    g = _REF_BARY_GRAD[dim]
    out = np.stack([bernstein_derivative(degree, 1, lam, g[:, j]) for j in range(dim)], axis=-1)
    return out[0] if out.shape[0] == 1 else out


# --------------------------------------------------------------------------
# quadrature on reference simplices, barycentric points and weights summing to 1

def gauss_interval(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1.0)
    return np.stack([1.0 - t, t], axis=1), 0.5 * w


def gauss_triangle(n: int):
    """Collapsed Gauss-Jacobi x Gauss-Legendre rule, exact to degree 2n-1."""
    xs, ws = roots_jacobi(n, 1.0, 0.0)
    s = 0.5 * (xs + 1.0)
    ws = ws / 4.0
    xt, wt = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (xt + 1.0)
    wt = 0.5 * wt
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws, wt)
    xi = S.ravel()
    eta = (T * (1.0 - S)).ravel()
    w = W.ravel() * 2.0
    return np.stack([1.0 - xi - eta, xi, eta], axis=1), w


def quadrature(dim: int, exactness: int):
    n = max(1, (exactness + 2) // 2)
    return gauss_interval(n) if dim == 1 else gauss_triangle(n)


class BernsteinBasis:
    """Reference-element tables for one degree and dimension."""

    def __init__(self, degree: int, dim: int, exactness: int | None = None):
        if degree not in (1, 2, 3):
            raise ConfigError(f"unsupported degree {degree}")
        self.degree = degree
        self.dim = dim
        self.n_bary = dim + 1
        self.alphas = np.array(lattice_indices(degree, self.n_bary))
        self.n_local = len(self.alphas)
        self.quad_points, self.quad_weights = quadrature(dim, exactness or 2 * degree + 1)
        self.values = bernstein(degree, self.quad_points)
        # d B / d lambda_a at the quadrature points, shape (nq, n_local, n_bary)
        eye = np.eye(self.n_bary)
        self.bary_derivs = np.stack(
            [bernstein_derivative(degree, 1, self.quad_points, eye[a]) for a in range(self.n_bary)],
            axis=-1,
        )
        self.lattice_bary = self.alphas / degree
        self.vandermonde = bernstein(degree, self.lattice_bary)


class FESpace:
    """Continuous Bernstein space on a mesh with the geometric factors and
    the element matrices every residual needs.

    Attributes
    ----------
    cell_dofs : (nE, n_local) global DoF ids
    measure : (nE,) cell measures |K|
    bary_grad : (nE, n_bary, dim) physical gradients of the barycentric coordinates
    lumped : (n_dofs,) lumped coefficients |C_sigma| = integral of phi_sigma
    """

    def __init__(self, mesh, degree: int):
        self.mesh = mesh
        self.degree = degree
        self.dim = mesh.dim
        self.basis = BernsteinBasis(degree, mesh.dim)
        self.dofmap: DofMap = build_dof_map(mesh, degree)
        self.cell_dofs = self.dofmap.cell_dofs
        self.n_dofs = self.dofmap.n_dofs
        self.n_cells = mesh.n_cells
        self.n_local = self.basis.n_local
        self.points = self.dofmap.points

        coords = mesh.cell_coords
        jac = np.stack([coords[:, a + 1] - coords[:, 0] for a in range(self.dim)], axis=-1)
        det = np.linalg.det(jac)
        self.measure = np.abs(det) / factorial(self.dim)
        inv = np.linalg.inv(jac)
        grad = np.empty((self.n_cells, self.dim + 1, self.dim))
        grad[:, 1:, :] = inv
        grad[:, 0, :] = -inv.sum(axis=1)
        self.bary_grad = grad
        self.coords = coords

    # -- assembled quantities ------------------------------------------------

    @cached_property
    def quad_weights(self) -> np.ndarray:
        """Physical quadrature weights, shape (nE, nq)."""
        return self.measure[:, None] * self.basis.quad_weights[None, :]

    @cached_property
    def grad_at_quad(self) -> np.ndarray:
        """Physical basis gradients at quadrature points, (nE, nq, n_local, dim)."""
        return np.einsum("qla,ead->eqld", self.basis.bary_derivs, self.bary_grad)

    @cached_property
    def scatter(self) -> sp.csr_matrix:
        """Sparse sum over cells: (n_dofs, nE*n_local)."""
        rows = self.cell_dofs.ravel()
        cols = np.arange(rows.size)
        return sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(self.n_dofs, rows.size))

    def gather_sum(self, local: np.ndarray) -> np.ndarray:
        """Reduce per-cell, per-local-DoF data (nE, n_local, ...) onto global DoFs."""
        flat = local.reshape(self.n_cells * self.n_local, -1)
        out = self.scatter @ flat
        return np.asarray(out).reshape((self.n_dofs,) + local.shape[2:])

    @cached_property
    def lumped(self) -> np.ndarray:
        local = np.einsum("eq,ql->el", self.quad_weights, self.basis.values)
        return self.gather_sum(local)

    @cached_property
    def local_mass(self) -> np.ndarray:
        B = self.basis.values
        return np.einsum("eq,qi,qj->eij", self.quad_weights, B, B)

    @cached_property
    def local_advection(self) -> np.ndarray:
        """Element matrices G[e, i, j, d] = int_K phi_i d_{x_d} phi_j."""
        return np.einsum("eq,qi,eqjd->eijd", self.quad_weights, self.basis.values, self.grad_at_quad)

    def assemble(self, local: np.ndarray) -> sp.csr_matrix:
        rows = np.repeat(self.cell_dofs, self.n_local, axis=1).ravel()
        cols = np.tile(self.cell_dofs, (1, self.n_local)).ravel()
        return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(self.n_dofs, self.n_dofs))

    @cached_property
    def mass(self) -> sp.csr_matrix:
        return self.assemble(self.local_mass)

    @cached_property
    def advection(self) -> list:
        return [self.assemble(self.local_advection[..., d]) for d in range(self.dim)]

    # -- nodal values <-> Bernstein coefficients ----------------------------

    @cached_property
    def evaluation(self) -> sp.csr_matrix:
        """E[sigma, tau] = phi_tau(x_sigma) at the lattice points."""
        V = self.basis.vandermonde
        rows = np.repeat(self.cell_dofs, self.n_local, axis=1).ravel()
        cols = np.tile(self.cell_dofs, (1, self.n_local)).ravel()
        vals = np.broadcast_to(V.ravel(), (self.n_cells, V.size)).ravel()
        key = rows.astype(np.int64) * self.n_dofs + cols
        _, first = np.unique(key, return_index=True)
        return sp.csr_matrix((vals[first], (rows[first], cols[first])), shape=(self.n_dofs,) * 2)

    @cached_property
    def interpolation(self) -> sp.csr_matrix:
        """Inverse of :attr:`evaluation`, assembled element by element.

        Values on a cell determine the coefficients there, and coefficients
        on a shared facet depend only on values on that facet, so the rows
        can be taken from any cell containing the DoF.
        """
        Vinv = np.linalg.inv(self.basis.vandermonde)
        owner = np.full(self.n_dofs, -1)
        slot = np.zeros(self.n_dofs, dtype=int)
        flat = self.cell_dofs.ravel()[::-1]
        # last write wins, so reversing keeps the first cell listing each DoF
        owner[flat] = np.repeat(np.arange(self.n_cells), self.n_local)[::-1]
        slot[flat] = np.tile(np.arange(self.n_local), self.n_cells)[::-1]
        rows = np.repeat(np.arange(self.n_dofs), self.n_local)
        cols = self.cell_dofs[owner].ravel()
        vals = Vinv[slot].ravel()
        keep = np.abs(vals) > 1e-13
        return sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(self.n_dofs,) * 2)

    def to_values(self, coeffs: np.ndarray) -> np.ndarray:
        """Point values at the lattice points."""
        if self.degree == 1:
            return np.array(coeffs, copy=True)
        flat = coeffs.reshape(self.n_dofs, -1)
        return (self.evaluation @ flat).reshape(coeffs.shape)

    def from_values(self, values: np.ndarray) -> np.ndarray:
        """Bernstein coefficients of the interpolant through lattice values."""
        if self.degree == 1:
            return np.array(values, copy=True)
        flat = values.reshape(self.n_dofs, -1)
        return np.asarray(self.interpolation @ flat).reshape(values.shape)

    def interpolate(self, func) -> np.ndarray:
        """Coefficients of the interpolant of ``func(points) -> (n, ...)``."""
        return self.from_values(np.asarray(func(self.points), dtype=float))

    # -- point evaluation ----------------------------------------------------

    def locate(self, x: np.ndarray):
        """Cell index and barycentric coordinates of physical points."""
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        if self.dim == 1:
            b = self.mesh.cell_bounds
            cell = np.clip(np.searchsorted(b[:, 0], x[:, 0], side="right") - 1, 0, self.n_cells - 1)
            t = (x[:, 0] - b[cell, 0]) / (b[cell, 1] - b[cell, 0])
            return cell, np.stack([1.0 - t, t], axis=1)
        cells = np.full(len(x), -1)
        lams = np.zeros((len(x), 3))
        chunk = max(1, 2_000_000 // max(self.n_cells, 1))
        for s in range(0, len(x), chunk):
            xs = x[s:s + chunk]
            rel = xs[:, None, :] - self.coords[None, :, 0, :]
            l12 = np.einsum("ead,ped->pea", self.bary_grad[:, 1:, :], rel)
            lam = np.concatenate([1.0 - l12.sum(-1, keepdims=True), l12], axis=-1)
            score = lam.min(axis=-1)
            best = np.argmax(score, axis=1)
            cells[s:s + chunk] = best
            lams[s:s + chunk] = lam[np.arange(len(xs)), best]
        return cells, np.clip(lams, 0.0, 1.0)

    def evaluate(self, coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
        cell, lam = self.locate(x)
        B = bernstein(self.degree, lam)
        local = coeffs[self.cell_dofs[cell]]
        return np.einsum("pl,pl...->p...", B, local)

    def integrate(self, coeffs: np.ndarray) -> np.ndarray:
        return np.tensordot(self.lumped, coeffs, axes=(0, 0))


