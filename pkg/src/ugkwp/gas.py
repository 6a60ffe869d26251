"""Gas description and state conversions.

Code units: velocities are scaled by sqrt(2 R T_ref), so the gas constant is
absorbed and the temperature is T = 1/(2 lambda), p = rho T.  Conservative
states are arrays with trailing axis (rho, rho U, rho V, rho W, rho E).
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np


class UnphysicalStateError(ValueError):
    """Raised for non-positive density, internal energy, pressure or temperature."""


@dataclass(frozen=True)
class GasModel:
    """BGK gas with a power-law (VHS-like) viscosity; Prandtl number is 1."""

    K: int = 0
    omega: float = 0.81
    mu_ref: float = 1.0
    T_ref: float = 1.0

    prandtl = 1.0

    def __post_init__(self):
        if self.K < 0 or int(self.K) != self.K:
            raise ValueError(f"K must be a non-negative integer, got {self.K}")
        if not 0.5 <= self.omega <= 1.0:
            raise ValueError(f"omega must lie in [0.5, 1], got {self.omega}")
        if not self.mu_ref > 0:
            raise ValueError(f"mu_ref must be positive, got {self.mu_ref}")
        if not self.T_ref > 0:
            raise ValueError(f"T_ref must be positive, got {self.T_ref}")

    @property
    def gamma(self) -> float:
        return (self.K + 5.0) / (self.K + 3.0)

    @classmethod
    def from_knudsen(cls, kn: float, omega: float = 0.81, K: int = 0, T_ref: float = 1.0) -> "GasModel":
        """Reference viscosity of the VHS mean-free-path definition at unit density."""
        return cls(K=K, omega=omega, mu_ref=vhs_mu_ref(kn, omega), T_ref=T_ref)


def vhs_mu_ref(kn: float, omega: float) -> float:
    return 15.0 * math.sqrt(math.pi) / (2.0 * (5.0 - 2.0 * omega) * (7.0 - 2.0 * omega)) * kn


@dataclass
class Primitive:
    """Maxwellian parameters. ``U`` has a trailing axis of length 3."""

    rho: np.ndarray
    U: np.ndarray
    lam: np.ndarray

    @property
    def p(self) -> np.ndarray:
        return self.rho / (2.0 * self.lam)

    @property
    def T(self) -> np.ndarray:
        return 0.5 / self.lam

    def __getitem__(self, idx) -> "Primitive":
        return Primitive(self.rho[idx], self.U[idx], self.lam[idx])


def to_primitive(W, gas: GasModel) -> Primitive:
    W = np.asarray(W, dtype=float)
    rho = W[..., 0]
    if np.any(~(rho > 0)):
        raise UnphysicalStateError("unphysical state: non-positive density")
    U = W[..., 1:4] / rho[..., None]
    rho_e = W[..., 4] - 0.5 * rho * np.sum(U * U, axis=-1)
    if np.any(~(rho_e > 0)):
        raise UnphysicalStateError("unphysical state: non-positive internal energy")
    lam = rho * (gas.K + 3) / (4.0 * rho_e)
    return Primitive(rho, U, lam)


def to_conservative(prim: Primitive, gas: GasModel) -> np.ndarray:
    rho = np.asarray(prim.rho, dtype=float)
    U = np.asarray(prim.U, dtype=float)
    lam = np.asarray(prim.lam, dtype=float)
    W = np.empty(rho.shape + (5,))
    W[..., 0] = rho
    W[..., 1:4] = rho[..., None] * U
    W[..., 4] = rho * (0.5 * np.sum(U * U, axis=-1) + (gas.K + 3) / (4.0 * lam))
    return W


def primitive_from_rupT(rho, U, p=None, T=None) -> Primitive:
    """Build a Primitive from density, velocity and either pressure or temperature."""
    rho = np.asarray(rho, dtype=float)
    U = np.broadcast_to(np.asarray(U, dtype=float), rho.shape + (3,)).copy()
    if (p is None) == (T is None):
        raise ValueError("give exactly one of p or T")
    T = np.asarray(p, dtype=float) / rho if T is None else np.asarray(T, dtype=float)
    return Primitive(rho, U, 0.5 / T * np.ones_like(rho))


def physical_mask(W) -> np.ndarray:
    W = np.asarray(W)
    rho = W[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        rho_e = W[..., 4] - 0.5 * np.sum(W[..., 1:4] ** 2, axis=-1) / rho
    return (rho > 0) & (rho_e > 0) & np.isfinite(rho_e)


def viscosity(T, gas: GasModel):
    T = np.asarray(T, dtype=float)
    if np.any(~(T > 0)):
        raise UnphysicalStateError("unphysical temperature")
    return gas.mu_ref * (T / gas.T_ref) ** gas.omega


def relaxation_time(prim: Primitive, gas: GasModel):
    p = prim.p
    if np.any(~(p > 0)):
        raise UnphysicalStateError("unphysical state: non-positive pressure")
    return viscosity(prim.T, gas) / p


def sound_speed(prim: Primitive, gas: GasModel):
    return np.sqrt(gas.gamma * prim.T)
