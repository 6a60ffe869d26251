"""Deterministic interface fluxes.

All fluxes are evaluated in an interface-local frame whose first axis is the
interface normal, integrated over one time step and per unit interface area.
Positive values flow along the normal.

Two parts are computed:

* the equilibrium-relaxation flux, from the interface Maxwellian g0 and its
  expansion coefficients;
* the free transport of the hydrodynamic (wave) distribution
  ``g+ = g + C (dg/dt + u . grad g)`` upwinded from the two one-sided states.

The time coefficients are obtained by integrating the BGK kernels exactly.
Note that the normal and tangential slope coefficients come out identical;
a printed sign difference between them does not survive the integration.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .gas import GasModel, Primitive
from .moments import MomentTable, maxwell_moments, moment_contract, moment_vector

SERIES_SWITCH = 1.0
_NTERMS = 30


def _series(x, coeff, n0):
    out = np.zeros_like(x)
    for n in range(_NTERMS - 1, n0 - 1, -1):
        out += coeff(n) * (-x) ** n / factorial(n)
    return out


def _stable(x, direct, coeff, n0):
    x = np.asarray(x, dtype=float)
    small = x < SERIES_SWITCH
    out = np.empty_like(x)
    with np.errstate(over="ignore", invalid="ignore"):
        out[~small] = direct(x[~small])
    out[small] = _series(x[small], coeff, n0)
    return out


# each phi_* is a dimensionless function of x = dt / tau
def _phi_g0(x):      # x - 1 + e^-x
    return _stable(x, lambda y: y - 1.0 + np.exp(-y), lambda n: 1.0, 2)


def _phi_slope(x):   # x + (x + 2) e^-x - 2
    return _stable(x, lambda y: y + (y + 2.0) * np.exp(-y) - 2.0, lambda n: 2.0 - n, 3)


def _phi_A(x):       # x^2/2 - x + 1 - e^-x
    return _stable(x, lambda y: 0.5 * y * y - y + 1.0 - np.exp(-y), lambda n: -1.0, 3)


def _phi_h0(x):      # 1 - e^-x
    return -np.expm1(-np.asarray(x, dtype=float))


def _phi_ht(x):      # 1 - (1 + x) e^-x
    return _stable(x, lambda y: 1.0 - (1.0 + y) * np.exp(-y), lambda n: n - 1.0, 2)


@dataclass
class TimeCoeffs:
    """Exact time integrals of the BGK kernels over one step.

    ``q_*`` multiply the equilibrium expansion, ``c_h0``/``c_ht`` the
    free-transport terms, ``C`` is the hydrodynamic expansion coefficient.
    """

    dt: np.ndarray
    tau: np.ndarray
    q_g0: np.ndarray
    q_gslope_normal: np.ndarray
    q_gslope_tangent: np.ndarray
    q_gA: np.ndarray
    c_h0: np.ndarray
    c_ht: np.ndarray
    C: np.ndarray
    n_clamped: int = 0

    def gks_limit(self) -> "TimeCoeffs":
        """Same coefficients with the Chapman-Enskog value C = -tau."""
        return TimeCoeffs(self.dt, self.tau, self.q_g0, self.q_gslope_normal, self.q_gslope_tangent,
                          self.q_gA, self.c_h0, self.c_ht, -self.tau, self.n_clamped)


def time_coeffs(dt, tau, tau_floor: float = 1e-12) -> TimeCoeffs:
    dt = np.asarray(dt, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(dt <= 0):
        raise ValueError("dt must be positive")
    floor = tau_floor * dt
    clamped = ~(tau > floor)
    tau = np.where(clamped, floor, tau)
    dt, tau = np.broadcast_arrays(dt, tau)
    x = dt / tau
    t2 = tau * tau
    q_slope = -t2 * _phi_slope(x)
    c_h0 = tau * _phi_h0(x)
    c_ht = t2 * _phi_ht(x)
    return TimeCoeffs(
        dt=dt,
        tau=tau,
        q_g0=tau * _phi_g0(x),
        q_gslope_normal=q_slope,
        q_gslope_tangent=q_slope,
        q_gA=t2 * _phi_A(x),
        c_h0=c_h0,
        c_ht=c_ht,
        C=-c_ht / c_h0,
        n_clamped=int(np.count_nonzero(clamped)),
    )


def hydro_expansion_coeff(dt, tau):
    """C(dt, tau) = (e^{-x}(dt + tau) - tau) / (1 - e^{-x}), x = dt/tau."""
    tau = np.asarray(tau, dtype=float)
    x = np.asarray(dt, dtype=float) / tau
    return -tau * _phi_ht(x) / _phi_h0(x)


@dataclass
class ExpansionCoeffs:
    a_l: np.ndarray
    a_r: np.ndarray
    b: np.ndarray
    c: np.ndarray
    A: np.ndarray


def flux_equilibrium(prim0: Primitive, coeffs: ExpansionCoeffs, tc: TimeCoeffs, gas: GasModel,
                     mt0: MomentTable | None = None) -> np.ndarray:
    """Time-integrated flux of the relaxation (equilibrium) part, local frame."""
    mt0 = maxwell_moments(prim0, gas) if mt0 is None else mt0
    q = lambda v: np.asarray(v)[..., None]
    F = (q(tc.q_g0) * moment_vector(mt0, "full", pu=1)
         + q(tc.q_gslope_normal) * (moment_contract(mt0, "pos", coeffs.a_l, pu=2)
                                    + moment_contract(mt0, "neg", coeffs.a_r, pu=2))
         + q(tc.q_gslope_tangent) * (moment_contract(mt0, "full", coeffs.b, pu=1, pv=1)
                                     + moment_contract(mt0, "full", coeffs.c, pu=1, pw=1))
         + q(tc.q_gA) * moment_contract(mt0, "full", coeffs.A, pu=1))
    return prim0.rho[..., None] * F


@dataclass
class OneSided:
    """A one-sided hydrodynamic distribution: Maxwellian plus its expansion coefficients."""

    prim: Primitive
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    A: np.ndarray
    mt: MomentTable


def one_sided(prim: Primitive, dWn, dWt1, dWt2, gas: GasModel) -> OneSided:
    """Expansion of a one-sided Maxwellian from its conservative slopes (local frame)."""
    from .moments import a_from_slope, time_derivative_coeff

    mt = maxwell_moments(prim, gas)
    a = a_from_slope(prim, dWn, gas)
    b = a_from_slope(prim, dWt1, gas)
    c = a_from_slope(prim, dWt2, gas)
    A, _ = time_derivative_coeff(a, a, b, c, prim, gas, mt)
    return OneSided(prim, a, b, c, A, mt)


def _half_transport(side: OneSided, space: str, tc: TimeCoeffs) -> np.ndarray:
    mt = side.mt
    q = lambda v: np.asarray(v)[..., None]
    Cc = q(tc.C * tc.c_h0)
    F = (q(tc.c_h0) * moment_vector(mt, space, pu=1)
         + (Cc - q(tc.c_ht)) * (moment_contract(mt, space, side.a, pu=2)
                                + moment_contract(mt, space, side.b, pu=1, pv=1)
                                + moment_contract(mt, space, side.c, pu=1, pw=1))
         + Cc * moment_contract(mt, space, side.A, pu=1))
    return side.prim.rho[..., None] * F


def flux_hydro_transport(left: OneSided | None, right: OneSided | None, tc: TimeCoeffs) -> np.ndarray:
    """Free transport of the hydrodynamic distributions, upwinded by half-space moments.

    Either side may be ``None`` (no wave content on that side).
    """
    F = 0.0
    if left is not None:
        F = F + _half_transport(left, "pos", tc)
    if right is not None:
        F = F + _half_transport(right, "neg", tc)
    return F


@dataclass
class Wall:
    """Diffuse isothermal wall, in the local frame of the face (normal velocity zero)."""

    T: np.ndarray
    U: np.ndarray


def flux_diffuse_wall(interior: OneSided, wave: OneSided | None, wall: Wall, tc: TimeCoeffs,
                      gas: GasModel) -> np.ndarray:
    """Wall flux in the local frame with the normal pointing from the fluid into the wall.

    The part of the interface distribution heading into the wall comes from the
    interior one-sided expansion; the re-emitted part is a wall Maxwellian whose
    density makes the net mass flux vanish.  ``wave`` carries the hydro share of
    the free transport; ``None`` means the free transport is carried elsewhere.
    """
    coeffs = ExpansionCoeffs(interior.a, interior.a, interior.b, interior.c, interior.A)
    mt = interior.mt
    q = lambda v: np.asarray(v)[..., None]
    F_out = interior.prim.rho[..., None] * (
        q(tc.q_g0) * moment_vector(mt, "pos", pu=1)
        + q(tc.q_gslope_normal) * moment_contract(mt, "pos", coeffs.a_l, pu=2)
        + q(tc.q_gslope_tangent) * (moment_contract(mt, "pos", coeffs.b, pu=1, pv=1)
                                    + moment_contract(mt, "pos", coeffs.c, pu=1, pw=1))
        + q(tc.q_gA) * moment_contract(mt, "pos", coeffs.A, pu=1))
    if wave is not None:
        F_out = F_out + _half_transport(wave, "pos", tc)
    return F_out + wall_emission(F_out[..., 0], wall, gas)


def wall_emission(mass_in, wall: Wall, gas: GasModel) -> np.ndarray:
    """Re-emitted flux of a wall Maxwellian carrying ``mass_in`` back out (local frame)."""
    mass_in = np.asarray(mass_in, dtype=float)
    T = np.broadcast_to(np.asarray(wall.T, dtype=float), mass_in.shape)
    U = np.broadcast_to(np.asarray(wall.U, dtype=float), mass_in.shape + (3,)).copy()
    U[..., 0] = 0.0
    pw = Primitive(np.ones_like(T), U, 0.5 / T)
    unit = moment_vector(maxwell_moments(pw, gas), "neg", pu=1)
    return (-mass_in / unit[..., 0])[..., None] * unit
