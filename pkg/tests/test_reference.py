import numpy as np
import pytest

from ugkwp.gas import GasModel
from ugkwp.reference import (
    GridInadequate,
    blasius_fpp0,
    blasius_profile,
    dvm_bgk_solve,
    exact_riemann,
    rankine_hugoniot,
)


def test_sod_star_state():
    # Toro's test 1 star values for gamma = 1.4
    s = exact_riemann((1.0, 0.0, 1.0), (0.125, 0.0, 0.1), 1.4)
    assert s.p_star == pytest.approx(0.30313, abs=1e-5)
    assert s.u_star == pytest.approx(0.92745, abs=1e-5)
    assert s.waves == ("rarefaction", "shock")


def test_pressure_root_and_sampling():
    s = exact_riemann((1.0, 0.0, 1.0), (0.125, 0.0, 0.1), 5.0 / 3.0)
    assert abs(s.pressure_function(s.p_star)) < 1e-12
    rho, u, p = s.sample(np.array([-10.0, 10.0]))
    assert np.allclose([rho[0], u[0], p[0]], [1.0, 0.0, 1.0])
    assert np.allclose([rho[1], u[1], p[1]], [0.125, 0.0, 0.1])
    # pressure and velocity are continuous across the contact
    rho, u, p = s.sample(np.array([s.u_star - 1e-9, s.u_star + 1e-9]))
    assert p[0] == pytest.approx(p[1]) and u[0] == pytest.approx(u[1])
    assert rho[0] > rho[1]


def test_symmetric_collision_and_vacuum():
    s = exact_riemann((1.0, 1.0, 1.0), (1.0, -1.0, 1.0), 1.4)
    assert s.u_star == pytest.approx(0.0, abs=1e-12)
    assert s.waves == ("shock", "shock")
    v = exact_riemann((1.0, -10.0, 0.1), (1.0, 10.0, 0.1), 1.4)
    assert v.vacuum
    with pytest.raises(ValueError):
        exact_riemann((0.0, 0, 1.0), (1.0, 0, 1.0), 1.4)


def test_rankine_hugoniot():
    r, p, T, u = rankine_hugoniot(8.0, 5.0 / 3.0)
    assert r == pytest.approx(3.8209, abs=1e-4)
    assert T == pytest.approx(20.87, abs=1e-2)
    assert u == pytest.approx(1 / r)
    assert p == pytest.approx(r * T)
    # weak-shock limit
    assert rankine_hugoniot(1.0 + 1e-9, 1.4)[0] == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValueError):
        rankine_hugoniot(0.9, 1.4)


def test_blasius():
    assert blasius_fpp0() == pytest.approx(0.332057, abs=1e-6)
    f, fp, fpp = blasius_profile(np.array([0.0, 5.0, 10.0]))
    assert fp[0] == 0.0 and fp[2] == pytest.approx(1.0, abs=1e-7)
    # displacement thickness: eta - f -> 1.7208
    assert 10.0 - f[2] == pytest.approx(1.7208, abs=1e-4)
    with pytest.raises(ValueError):
        blasius_profile(np.array([-1.0]))


def test_dvm_conserves_and_relaxes():
    gas = GasModel.from_knudsen(0.1)
    x = np.linspace(0, 1, 51)
    xc = 0.5 * (x[1:] + x[:-1])
    rho = 1 + 0.2 * np.sin(2 * np.pi * xc)
    res = dvm_bgk_solve(x, rho, 0.1, 1.0, gas, 0.2, nv=81, bc=("periodic", "periodic"))
    E0 = rho * (0.5 * 0.01 + 1.5)
    assert res.W[:, 0].sum() == pytest.approx(rho.sum(), rel=1e-12)
    assert res.W[:, 1].sum() == pytest.approx((rho * 0.1).sum(), rel=1e-12)
    assert res.W[:, 2].sum() == pytest.approx(E0.sum(), rel=1e-12)
    assert res.time == pytest.approx(0.2)
    assert np.ptp(res.rho) < 0.4


def test_dvm_grid_check():
    gas = GasModel.from_knudsen(0.1)
    with pytest.raises(GridInadequate):
        dvm_bgk_solve(np.linspace(0, 1, 11), 1.0, 0.0, 1.0, gas, 0.1, nv=5, vmax=1.0)
