import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apdec.errors import StateError
from apdec.model import (Burgers, Euler, LinearTransport, flux_burgers, flux_euler1d,
                         flux_euler2d, max_wavespeed)
from apdec.solver import mirror_state


@pytest.mark.parametrize("u, expected", [(2.0, 2.0), (0.0, 0.0), (-3.0, 4.5)])
def test_burgers_flux(u, expected):
    assert flux_burgers(u) == expected


def test_euler1d_rest_state():
    np.testing.assert_allclose(flux_euler1d([1, 0, 2.5]), [0, 1, 0])


def test_euler1d_moving_state():
    np.testing.assert_allclose(flux_euler1d([1, 1, 3]), [1, 2, 4])


def test_euler1d_negative_pressure():
    with pytest.raises(StateError):
        flux_euler1d([1, 0, -1])


def test_euler2d_examples():
    np.testing.assert_allclose(flux_euler2d([1, 0, 0, 2.5], d=1), [0, 1, 0, 0])
    np.testing.assert_allclose(flux_euler2d([1, 1, 0, 3], d=2), [0, 0, 1, 0])
    with pytest.raises(StateError):
        flux_euler2d([0, 0, 0, 1], d=1)


@pytest.mark.parametrize("model, u, expected", [
    (Burgers(), [-1.5], 1.5),
    (LinearTransport((1.0,)), [0.3], 1.0),
    (Euler(1.4, 1), [1, 0, 2.5], np.sqrt(1.4)),
])
def test_max_wavespeed(model, u, expected):
    assert abs(float(max_wavespeed(model, u)) - expected) < 1e-12


def test_state_error_reports_offender():
    u = np.array([[1, 0, 2.5], [1, 0, 2.5], [-1, 0, 1]])
    with pytest.raises(StateError) as info:
        Euler().check(u)
    assert info.value.index == 2


@given(st.floats(0.1, 10), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 10))
def test_primitive_round_trip(rho, vx, vy, p):
    e = Euler(1.4, 2)
    u = e.from_primitive(rho, [vx, vy], p)
    r, v, q = e.to_primitive(u)
    assert abs(r - rho) < 1e-12 * rho
    np.testing.assert_allclose(v, [vx, vy], atol=1e-12 * (1 + abs(vx) + abs(vy)))
    assert abs(q - p) < 1e-9 * (1 + u[-1])


def test_wall_mirror_flips_normal_momentum():
    u = np.array([1.0, 0.3, -0.7, 2.5])
    np.testing.assert_allclose(mirror_state(Euler(1.4, 2), u, (0, 1)), [1.0, 0.3, 0.7, 2.5])
    twice = mirror_state(Euler(1.4, 2), mirror_state(Euler(1.4, 2), u, (0.6, 0.8)), (0.6, 0.8))
    np.testing.assert_allclose(twice, u)
