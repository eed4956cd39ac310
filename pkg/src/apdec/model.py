"""Macroscopic conservation laws u_t + sum_d d_{x_d} A_d(u) = 0.

States are arrays of shape (..., K); ``flux(u, d)`` uses a 0-based direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StateError


class HyperbolicModel:
    name = "model"
    n_vars = 1
    dim = 1

    def flux(self, u: np.ndarray, d: int) -> np.ndarray:
        raise NotImplementedError

    def max_wavespeed(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def check(self, u: np.ndarray) -> None:
        """Raise :class:`StateError` if any state is inadmissible."""

    def mirror(self, u: np.ndarray, normal: np.ndarray) -> np.ndarray:
        """Reflected state across a wall with unit ``normal``."""
        return np.array(u, copy=True)


@dataclass(frozen=True)
class LinearTransport(HyperbolicModel):
    velocity: tuple = (1.0,)

    name = "transport"
    n_vars = 1

    @property
    def dim(self):
        return len(self.velocity)

    def flux(self, u, d):
        return self.velocity[d] * np.asarray(u, dtype=float)

    def max_wavespeed(self, u):
        u = np.asarray(u, dtype=float)
        return np.full(u.shape[:-1], float(np.linalg.norm(self.velocity, ord=np.inf)))


@dataclass(frozen=True)
class Burgers(HyperbolicModel):
    name = "burgers"
    n_vars = 1
    dim = 1

    def flux(self, u, d=0):
        return flux_burgers(u)

    def max_wavespeed(self, u):
        return np.abs(np.asarray(u, dtype=float))[..., 0]


def flux_burgers(u):
    u = np.asarray(u, dtype=float)
    return 0.5 * u * u


@dataclass(frozen=True)
class Euler(HyperbolicModel):
    """Compressible Euler with the ideal-gas law, conservative (rho, rho v, E)."""

    gamma: float = 1.4
    space_dim: int = 1

    name = "euler"

    @property
    def dim(self):
        return self.space_dim

    @property
    def n_vars(self):
        return self.space_dim + 2

    def pressure(self, u):
        u = np.asarray(u, dtype=float)
        rho = u[..., 0]
        mom = u[..., 1:1 + self.dim]
        kinetic = 0.5 * np.sum(mom * mom, axis=-1) / rho
        return (self.gamma - 1.0) * (u[..., -1] - kinetic)

    def check(self, u):
        u = np.asarray(u, dtype=float)
        rho = u[..., 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            p = self.pressure(u)
        bad = ~((rho > 0) & (p > 0) & np.isfinite(p))
        if np.any(bad):
            flat = np.flatnonzero(bad.reshape(-1))
            i = int(flat[0])
            raise StateError("non-physical Euler state", index=i,
                             value=u.reshape(-1, u.shape[-1])[i])

    def flux(self, u, d):
        u = np.asarray(u, dtype=float)
        self.check(u)
        rho = u[..., 0]
        p = self.pressure(u)
        vel = u[..., 1 + d] / rho
        out = u * vel[..., None]
        out[..., 1 + d] += p
        out[..., -1] += p * vel
        return out

    def sound_speed(self, u):
        u = np.asarray(u, dtype=float)
        return np.sqrt(self.gamma * self.pressure(u) / u[..., 0])

    def max_wavespeed(self, u):
        u = np.asarray(u, dtype=float)
        self.check(u)
        speed = np.linalg.norm(u[..., 1:1 + self.dim], axis=-1) / u[..., 0]
        return speed + self.sound_speed(u)

    def from_primitive(self, rho, vel, p):
        """Conservative state from density, velocity (..., dim) and pressure."""
        rho = np.asarray(rho, dtype=float)
        vel = np.asarray(vel, dtype=float).reshape(rho.shape + (self.dim,))
        p = np.asarray(p, dtype=float)
        energy = p / (self.gamma - 1.0) + 0.5 * rho * np.sum(vel * vel, axis=-1)
        return np.concatenate([rho[..., None], rho[..., None] * vel, energy[..., None]], axis=-1)

    def to_primitive(self, u):
        u = np.asarray(u, dtype=float)
        rho = u[..., 0]
        return rho, u[..., 1:1 + self.dim] / rho[..., None], self.pressure(u)

    def mirror(self, u, normal):
        u = np.array(u, dtype=float, copy=True)
        normal = np.asarray(normal, dtype=float)
        mom = u[..., 1:1 + self.dim]
        mn = np.sum(mom * normal, axis=-1, keepdims=True)
        u[..., 1:1 + self.dim] = mom - 2.0 * mn * normal
        return u


def flux_euler1d(U, gamma=1.4):
    return Euler(gamma, 1).flux(U, 0)


def flux_euler2d(U, gamma=1.4, d=1):
    """Flux in direction ``d`` (1 = x, 2 = y)."""
    return Euler(gamma, 2).flux(U, d - 1)


def max_wavespeed(model: HyperbolicModel, u) -> np.ndarray:
    return model.max_wavespeed(np.asarray(u, dtype=float))
