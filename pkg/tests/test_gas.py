import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ugkwp.gas import (
    GasModel,
    UnphysicalStateError,
    physical_mask,
    primitive_from_rupT,
    relaxation_time,
    sound_speed,
    to_conservative,
    to_primitive,
    viscosity,
    vhs_mu_ref,
)

pos = st.floats(0.05, 20.0)
vel = st.floats(-5.0, 5.0)


@settings(max_examples=200, deadline=None)
@given(pos, vel, vel, vel, pos, st.integers(0, 4))
def test_round_trip(rho, u, v, w, T, K):
    gas = GasModel(K=K)
    prim = primitive_from_rupT(np.array(rho), np.array([u, v, w]), T=np.array(T))
    back = to_primitive(to_conservative(prim, gas), gas)
    assert np.allclose(back.rho, rho, rtol=1e-13)
    assert np.allclose(back.U, [u, v, w], rtol=1e-12, atol=1e-12)
    assert np.allclose(back.T, T, rtol=1e-11)


def test_gamma_and_pressure():
    assert GasModel(K=0).gamma == pytest.approx(5.0 / 3.0)
    assert GasModel(K=2).gamma == pytest.approx(1.4)
    prim = primitive_from_rupT(np.array(2.0), [0, 0, 0], p=np.array(3.0))
    assert prim.p == pytest.approx(3.0)
    assert prim.lam == pytest.approx(2.0 / 6.0)


def test_energy_of_rest_gas():
    # rho E = (K + 3) p / 2 for a gas at rest
    gas = GasModel(K=2)
    W = to_conservative(primitive_from_rupT(np.array(1.0), [0, 0, 0], p=np.array(1.0)), gas)
    assert W[4] == pytest.approx(2.5)


def test_vhs_reference_viscosity():
    expected = 15 * math.sqrt(math.pi) / (2 * (5 - 1.62) * (7 - 1.62))
    assert vhs_mu_ref(1.0, 0.81) == pytest.approx(expected)
    assert GasModel.from_knudsen(1e-3).mu_ref == pytest.approx(1e-3 * expected)


def test_viscosity_power_law():
    gas = GasModel(omega=0.5, mu_ref=2.0, T_ref=0.5)
    assert viscosity(2.0, gas) == pytest.approx(2.0 * math.sqrt(4.0))
    prim = primitive_from_rupT(np.array(1.0), [0, 0, 0], T=np.array(0.5))
    assert relaxation_time(prim, gas) == pytest.approx(2.0 / 0.5)
    assert sound_speed(prim, GasModel()) == pytest.approx(math.sqrt(5 / 3 * 0.5))


@pytest.mark.parametrize("W", [[-1.0, 0, 0, 0, 1.0], [1.0, 2.0, 0, 0, 1.0], [0.0, 0, 0, 0, 1.0]])
def test_unphysical_rejected(W):
    with pytest.raises(UnphysicalStateError):
        to_primitive(np.array(W), GasModel())
    assert not physical_mask(np.array(W))


@pytest.mark.parametrize("kw", [dict(K=-1), dict(K=1.5), dict(omega=0.3), dict(mu_ref=0.0), dict(T_ref=-1.0)])
def test_invalid_gas(kw):
    with pytest.raises(ValueError):
        GasModel(**kw)
