import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ldirk3.physics import (BUCKLEY_LEVERETT, BUCKLEY_LEVERETT_2D, BURGERS, LINEAR_ADVECTION,
                            DiffusionSpec, Euler1D, Euler2D, InvalidStateError, eigensystem_1d,
                            eigensystem_2d, euler_flux_1d, max_wave_speed, nu_smoothed)

states_1d = st.tuples(st.floats(0.1, 5.0), st.floats(-3.0, 3.0), st.floats(0.1, 5.0))
states_2d = st.tuples(st.floats(0.1, 5.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0),
                      st.floats(0.1, 5.0))


def fd_jac(f, U, h=1e-6):
    U = np.asarray(U, dtype=float)
    cols = []
    for k in range(U.size):
        e = np.zeros_like(U)
        e[k] = h * max(1.0, abs(U[k]))
        cols.append((f(U + e) - f(U - e)) / (2.0 * e[k]))
    return np.array(cols).T


def test_scalar_fluxes():
    u = np.array([-1.0, 0.0, 2.0])
    assert np.array_equal(LINEAR_ADVECTION.flux(u), u)
    assert np.array_equal(BURGERS.flux(u), 0.5 * u * u)
    assert BURGERS.wave_speed(u) == 2.0


def test_buckley_leverett_values():
    assert BUCKLEY_LEVERETT.flux(np.array(0.5)) == pytest.approx(0.5)
    assert BUCKLEY_LEVERETT.flux(np.array(1.0)) == pytest.approx(1.0)
    assert BUCKLEY_LEVERETT.flux(np.array(0.0)) == 0.0


@pytest.mark.parametrize("law,axis", [(BUCKLEY_LEVERETT, 0), (BUCKLEY_LEVERETT_2D, 0),
                                      (BUCKLEY_LEVERETT_2D, 1), (BURGERS, 0)])
def test_scalar_derivative_matches_finite_difference(law, axis):
    u = np.linspace(-0.4, 1.3, 31)
    h = 1e-6
    fd = (law.flux(u + h, axis) - law.flux(u - h, axis)) / (2 * h)
    assert np.allclose(law.dflux(u, axis), fd, atol=1e-7)


def test_scalar_law_without_y_flux():
    with pytest.raises(ValueError):
        BURGERS.flux(np.zeros(3), axis=1)


def test_diffusion_switch():
    spec = DiffusionSpec(0.1, 0.5, 0.05)
    nu = nu_smoothed(spec, np.array([0.0, 0.5, 2.0, -2.0]))
    assert nu[0] < 1e-8 and nu[1] == pytest.approx(0.5)
    assert nu[2] == pytest.approx(1.0) and nu[3] == pytest.approx(1.0)


def test_euler_primitive_roundtrip():
    m = Euler1D()
    U = m.to_conservative(np.array([1.0, 0.125]), np.array([0.3, -1.0]), np.array([1.0, 0.1]))
    rho, u, p = m.to_primitive(U)
    assert np.allclose(rho, [1.0, 0.125]) and np.allclose(u, [0.3, -1.0])
    assert np.allclose(p, [1.0, 0.1])


@pytest.mark.parametrize("bad", [(-1.0, 0.0, 1.0), (1.0, 0.0, -1.0)])
def test_invalid_states_rejected(bad):
    with pytest.raises(InvalidStateError):
        Euler1D().to_conservative(*bad)
    U = np.array([[bad[0]], [0.0], [bad[2] / 0.4]])
    with pytest.raises(InvalidStateError):
        euler_flux_1d(U)


def test_sod_left_flux():
    F = euler_flux_1d(np.array([[1.0], [0.0], [2.5]]))
    assert np.allclose(F[:, 0], [0.0, 1.0, 0.0])


@settings(max_examples=40, deadline=None)
@given(states_1d)
def test_euler1d_jacobian_matches_finite_difference(s):
    m = Euler1D()
    U = m.to_conservative(*s)
    J = m.jacobian(U)
    assert np.allclose(J, fd_jac(m.flux, U), rtol=1e-5, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(states_1d)
def test_euler1d_eigensystem(s):
    m = Euler1D()
    U = m.to_conservative(*s)
    R, L, lam = eigensystem_1d(U)
    assert np.allclose(L @ R, np.eye(3), atol=1e-9)
    assert np.allclose(R @ np.diag(lam) @ L, m.jacobian(U), rtol=1e-8, atol=1e-8)
    assert np.all(np.diff(lam) > 0)


@settings(max_examples=40, deadline=None)
@given(states_2d, st.sampled_from([0, 1]))
def test_euler2d_eigensystem(s, direction):
    m = Euler2D()
    U = m.to_conservative(*s)
    R, L, lam = eigensystem_2d(U, direction)
    J = m.jacobian(U, direction)
    assert np.allclose(L @ R, np.eye(4), atol=1e-9)
    assert np.allclose(R @ np.diag(lam) @ L, J, rtol=1e-8, atol=1e-8)
    assert np.allclose(J, fd_jac(lambda V: m.flux(V, direction), U), rtol=1e-5, atol=1e-6)


def test_euler2d_reduces_to_1d_when_transverse_velocity_vanishes():
    m1, m2 = Euler1D(), Euler2D()
    U2 = m2.to_conservative(1.3, 0.7, 0.0, 2.0)
    U1 = m1.to_conservative(1.3, 0.7, 2.0)
    assert np.allclose(m2.flux(U2, 0)[[0, 1, 3]], m1.flux(U1))
    assert m2.wave_speed(U2, 0) == pytest.approx(m1.wave_speed(U1))


def test_max_wave_speed_and_family_speeds():
    m = Euler1D()
    U = m.to_conservative(np.array([1.0, 0.125]), np.array([0.0, 0.0]), np.array([1.0, 0.1]))
    c = np.sqrt(1.4)
    assert max_wave_speed(m, U) == pytest.approx(c)
    assert np.allclose(m.family_speeds(U), [c, 0.0, c])
    assert max_wave_speed(BURGERS, np.array([[1.0, -3.0]])) == 3.0
