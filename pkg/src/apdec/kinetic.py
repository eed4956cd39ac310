"""Diagonal kinetic relaxation (DRM) of a macroscopic model.

N = D+1 blocks f_1..f_N, each with K components.  Block j <= D moves with
velocity -lambda along x_j, block D+1 with +lambda along every axis.  Kinetic
arrays have shape (..., N, K).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import HyperbolicModel


@dataclass(frozen=True)
class DrmModel:
    base: HyperbolicModel
    lam: float
    eps: float = 1e-9

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError(f"relaxation speed must be positive, got {self.lam}")
        if not self.eps >= 0:
            raise ConfigError(f"relaxation parameter must be non-negative, got {self.eps}")

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def n_blocks(self) -> int:
        return self.base.dim + 1

    @property
    def n_vars(self) -> int:
        return self.base.n_vars

    @property
    def velocities(self) -> np.ndarray:
        """lambda_n^{(d)} as an (N, D) table."""
        D = self.dim
        v = np.zeros((D + 1, D))
        v[np.arange(D), np.arange(D)] = -self.lam
        v[D, :] = self.lam
        return v

    def with_eps(self, eps: float) -> "DrmModel":
        return DrmModel(self.base, self.lam, eps)

    def maxwellian(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        D = self.dim
        fluxes = [self.base.flux(u, d) for d in range(D)]
        last = (u + sum(fluxes) / self.lam) / (D + 1)
        blocks = [last - fluxes[j] / self.lam for j in range(D)] + [last]
        return np.stack(blocks, axis=-2)

    def flux_consistency_check(self, u: np.ndarray) -> np.ndarray:
        """Relative defect |sum_n lambda_n^{(d)} M_n(u) - A_d(u)| per direction."""
        u = np.asarray(u, dtype=float)
        M = self.maxwellian(u)
        v = self.velocities
        out = []
        for d in range(self.dim):
            kinetic = np.einsum("n,...nk->...k", v[:, d], M)
            exact = self.base.flux(u, d)
            scale = max(1.0, float(np.max(np.abs(exact))))
            out.append(float(np.max(np.abs(kinetic - exact))) / scale)
        return np.array(out)


def maxwellian(drm: DrmModel, u) -> np.ndarray:
    return drm.maxwellian(u)


def project(f: np.ndarray) -> np.ndarray:
    """u = sum over kinetic blocks."""
    return np.asarray(f).sum(axis=-2)


def flux_consistency_check(drm: DrmModel, u) -> np.ndarray:
    return drm.flux_consistency_check(u)


@dataclass(frozen=True)
class SubcharacteristicReport:
    passed: bool
    margin: float
    max_speed: float


def check_subcharacteristic(drm: DrmModel, states, warn: bool = False) -> SubcharacteristicReport:
    """lambda against the largest macroscopic wave speed over ``states``.

    Exact for scalar 1D problems; for systems it is the spectral-radius
    heuristic only.
    """
    states = np.asarray(states, dtype=float)
    if states.size == 0:
        raise ConfigError("no states to check")
    speed = float(np.max(drm.base.max_wavespeed(states.reshape(-1, drm.n_vars))))
    margin = drm.lam - speed
    report = SubcharacteristicReport(margin >= 0, margin, speed)
    if warn and not report.passed:
        warnings.warn(f"relaxation speed {drm.lam} below max wave speed {speed:.4g}", stacklevel=2)
    return report


def jin_xin_map(f: np.ndarray, lam: float):
    """(f_1, f_2) -> (u, v) with u = f_1 + f_2 and v = lambda (f_2 - f_1)."""
    f = np.asarray(f, dtype=float)
    if f.shape[-2] != 2:
        raise ConfigError("Jin-Xin variables exist only for one space dimension")
    return f[..., 0, :] + f[..., 1, :], lam * (f[..., 1, :] - f[..., 0, :])


def jin_xin_inverse(u: np.ndarray, v: np.ndarray, lam: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.stack([0.5 * (u - v / lam), 0.5 * (u + v / lam)], axis=-2)


@dataclass
class KineticField:
    """Per-DoF kinetic blocks ``f`` of shape (n_dofs, N, K); ``u`` is derived."""

    f: np.ndarray

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        if self.f.ndim != 3:
            raise ConfigError(f"kinetic field must be (n_dofs, N, K), got shape {self.f.shape}")

    @classmethod
    def equilibrium(cls, drm: DrmModel, u) -> "KineticField":
        return cls(drm.maxwellian(np.asarray(u, dtype=float)))

    @property
    def u(self) -> np.ndarray:
        return project(self.f)

    @property
    def n_blocks(self) -> int:
        return self.f.shape[1]

    def distance_to_equilibrium(self, drm: DrmModel) -> float:
        return float(np.max(np.abs(self.f - drm.maxwellian(self.u))))
