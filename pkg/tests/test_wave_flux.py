import math

import numpy as np
import pytest
from scipy.integrate import quad

from ugkwp.gas import GasModel, primitive_from_rupT
from ugkwp.moments import maxwell_moments, moment_vector
from ugkwp.wave_flux import (
    SERIES_SWITCH,
    ExpansionCoeffs,
    Wall,
    flux_diffuse_wall,
    flux_equilibrium,
    flux_hydro_transport,
    hydro_expansion_coeff,
    one_sided,
    time_coeffs,
)


def kernel_oracle(dt, tau):
    """Direct quadrature of the BGK time kernels over one step."""
    eq = lambda h: quad(lambda t: (1 / tau) * quad(lambda s: h(t, s) * math.exp(-s / tau), 0, t)[0], 0, dt)[0]
    q_g0 = eq(lambda t, s: 1.0)
    q_slope = eq(lambda t, s: -s)
    q_A = eq(lambda t, s: t - s)
    c_h0 = quad(lambda t: math.exp(-t / tau), 0, dt)[0]
    c_ht = quad(lambda t: t * math.exp(-t / tau), 0, dt)[0]
    return q_g0, q_slope, q_A, c_h0, c_ht


@pytest.mark.parametrize("dt,tau", [(1.0, 1.0), (0.3, 2.0), (0.01, 1.0), (5.0, 0.5), (2.0, 0.1)])
def test_time_coeffs_quadrature(dt, tau):
    tc = time_coeffs(dt, tau)
    ref = kernel_oracle(dt, tau)
    got = (tc.q_g0, tc.q_gslope_normal, tc.q_gA, tc.c_h0, tc.c_ht)
    for g, r in zip(got, ref):
        assert float(g) == pytest.approx(r, rel=1e-9, abs=1e-15)
    assert float(tc.q_gslope_tangent) == float(tc.q_gslope_normal)


def test_series_branch_continuous():
    lo = time_coeffs(SERIES_SWITCH * (1 - 1e-9), 1.0)
    hi = time_coeffs(SERIES_SWITCH * (1 + 1e-9), 1.0)
    for name in ("q_g0", "q_gslope_normal", "q_gA", "c_h0", "c_ht", "C"):
        assert float(getattr(lo, name)) == pytest.approx(float(getattr(hi, name)), rel=1e-7)


def test_small_ratio_no_cancellation():
    tc = time_coeffs(1e-8, 1.0)
    # leading behaviour: q_g0 ~ dt^2 / 2, q_A ~ dt^3 / 6
    assert float(tc.q_g0) == pytest.approx(0.5e-16, rel=1e-6)
    assert float(tc.q_gA) == pytest.approx(1e-24 / 6, rel=1e-6)


def test_hydro_coefficient():
    x = np.array([1e-3, 0.5, 3.0, 40.0])
    C = hydro_expansion_coeff(x, 1.0)
    ref = (np.exp(-x) * (x + 1) - 1) / (1 - np.exp(-x))
    assert np.allclose(C, ref, rtol=1e-9)
    assert C[-1] == pytest.approx(-1.0, rel=1e-12)


def test_tau_clamp_counted():
    tc = time_coeffs(1.0, np.array([0.0, 1.0]))
    assert tc.n_clamped == 1
    with pytest.raises(ValueError):
        time_coeffs(0.0, 1.0)


def test_collisionless_limit_is_upwind():
    gas = GasModel()
    pl = primitive_from_rupT(np.array(1.0), [0.1, 0, 0], p=np.array(1.0))
    pr = primitive_from_rupT(np.array(0.125), [0.0, 0, 0], p=np.array(0.1))
    dt, tau = 1e-3, 1e6
    tc = time_coeffs(dt, tau)
    z = np.zeros(5)
    from ugkwp.moments import interface_state
    from ugkwp.gas import to_primitive
    p0 = to_primitive(interface_state(pl, pr, gas), gas)
    F = flux_equilibrium(p0, ExpansionCoeffs(z, z, z, z, z), tc, gas)
    F = F + flux_hydro_transport(one_sided(pl, z, z, z, gas), one_sided(pr, z, z, z, gas), tc)
    ref = (pl.rho * moment_vector(maxwell_moments(pl, gas), "pos", pu=1)
           + pr.rho * moment_vector(maxwell_moments(pr, gas), "neg", pu=1))
    assert np.allclose(F / dt, ref, rtol=1e-8)


@pytest.mark.parametrize("ratio", [20.0, 40.0, 200.0])
def test_shear_flux_is_navier_stokes(ratio):
    # tangential velocity slope s at rest: momentum flux = -mu s dt with mu = tau p
    gas = GasModel()
    prim = primitive_from_rupT(np.array(1.2), [0, 0, 0], T=np.array(0.7))
    s = 0.01
    dW = np.array([0, 0, 1.2 * s, 0, 0])
    tau = 0.05
    tc = time_coeffs(ratio * tau, tau).gks_limit()
    side = one_sided(prim, dW, np.zeros(5), np.zeros(5), gas)
    a = side.a
    z = np.zeros(5)
    F = flux_equilibrium(prim, ExpansionCoeffs(a, a, z, z, side.A), tc, gas)
    F = F + flux_hydro_transport(side, side, tc)
    p = 1.2 * 0.7
    assert F[2] == pytest.approx(-tau * p * s * ratio * tau, rel=1e-10)
    assert F[0] == pytest.approx(0.0, abs=1e-14)
    assert F[1] == pytest.approx(p * ratio * tau, rel=1e-12)


def test_ns_heat_flux():
    # temperature slope at rest with constant pressure: energy flux = -kappa dT/dx dt, kappa = (K+5)/2 tau p (Pr=1)
    gas = GasModel()
    rho, T, g = 1.0, 0.8, 0.02
    prim = primitive_from_rupT(np.array(rho), [0, 0, 0], T=np.array(T))
    # d rho = -rho g / T so that p = rho T is constant, d(rho E) = 3/2 dp = 0
    dW = np.array([-rho * g / T, 0, 0, 0, 0])
    tau, dt = 0.01, 0.5
    tc = time_coeffs(dt, tau).gks_limit()
    side = one_sided(prim, dW, np.zeros(5), np.zeros(5), gas)
    z = np.zeros(5)
    F = flux_equilibrium(prim, ExpansionCoeffs(side.a, side.a, z, z, side.A), tc, gas)
    F = F + flux_hydro_transport(side, side, tc)
    kappa = 2.5 * tau * rho * T
    assert F[4] == pytest.approx(-kappa * g * dt, rel=1e-10)


def test_wall_flux_balance():
    gas = GasModel()
    prim = primitive_from_rupT(np.array(1.0), [0, 0.05, 0], T=np.array(0.5))
    z = np.zeros(5)
    side = one_sided(prim, z, z, z, gas)
    tc = time_coeffs(0.1, 0.01)
    F = flux_diffuse_wall(side, None, Wall(np.array(0.5), np.array([0.0, 0.05, 0.0])), tc, gas)
    assert F[0] == pytest.approx(0.0, abs=1e-15)
    # gas at rest relative to an isothermal wall: no shear, no heat flux, pressure only
    assert F[2] == pytest.approx(0.0, abs=1e-15)
    assert F[4] == pytest.approx(0.0, abs=1e-15)
    assert F[1] == pytest.approx(0.5 * (0.1 - float(tc.c_h0)), rel=1e-12)
