import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ldirk3.mesh import Extrapolate, Periodic, build_grid_1d, build_grid_2d, pad
from ldirk3.physics import (BURGERS, LINEAR_ADVECTION, DiffusionSpec, Euler1D, Euler2D)
from ldirk3.spatial import (Semidiscrete, central_diffusion_flux, char_weno_interface_flux,
                            divergence, lf_split_scalar, muscl_reconstruct, weno5_reconstruct,
                            weno5_weights)


def test_weno5_exact_on_constants_and_lines():
    assert weno5_reconstruct([2.0] * 5) == pytest.approx(2.0)
    # nodal values of u = x at x = -2..2; face at x = 1/2
    assert weno5_reconstruct([-2.0, -1.0, 0.0, 1.0, 2.0]) == pytest.approx(0.5)
    assert weno5_reconstruct([3.0, 2.0, 1.0, 0.0, -1.0], "right") == pytest.approx(1.5)


def test_weno5_smooth_weights_near_linear():
    x = np.arange(-2, 3) * 1e-2
    w = weno5_weights(np.sin(1.0 + x))
    assert np.allclose(w, [0.1, 0.6, 0.3], atol=1e-3)


def test_weno5_fifth_order_on_smooth_data():
    # point value of the primitive-free face interpolant of nodal flux data
    errs = []
    for h in (0.1, 0.05):
        x = np.arange(-2, 3) * h
        errs.append(abs(weno5_reconstruct(np.exp(x)) - _face_target(h)))
    assert np.log2(errs[0] / errs[1]) > 4.5


def _face_target(h):
    # linear-weight WENO5 reproduces the conservative face flux of a
    # finite-difference scheme: h(x) with (1/h) int_{x-h/2}^{x+h/2} h = exp(x)
    # gives h(x) = exp(x) * (h/2) / sinh(h/2) evaluated at x = h/2
    return np.exp(h / 2) * (h / 2) / np.sinh(h / 2)


def test_weno5_is_essentially_non_oscillatory_at_a_jump():
    v = weno5_reconstruct([0.0, 0.0, 0.0, 1.0, 1.0])
    assert -1e-6 <= v <= 0.1


def test_weno5_rejects_bad_input():
    with pytest.raises(ValueError):
        weno5_reconstruct([1.0, 2.0])
    with pytest.raises(ValueError):
        weno5_reconstruct([1.0] * 5, "up")


def test_muscl_reconstruction():
    assert muscl_reconstruct([0.0, 1.0, 3.0]) == pytest.approx(1.5)
    assert muscl_reconstruct([0.0, 1.0, 3.0], "right") == pytest.approx(0.5)
    assert muscl_reconstruct([0.0, 1.0, 0.5]) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=5, max_size=5))
def test_weno5_value_bounded_by_stencil(v):
    r = weno5_reconstruct(v)
    span = max(v) - min(v)
    assert min(v) - 0.75 * span - 1e-9 <= r <= max(v) + 0.75 * span + 1e-9


def test_lf_split_sums_to_flux():
    u = np.linspace(-1, 2, 7)
    s = lf_split_scalar(u, BURGERS, 2.0)
    assert np.allclose(s.plus + s.minus, BURGERS.flux(u))
    assert np.all(np.diff(s.plus) * np.diff(u) >= -1e-14)


def test_divergence_and_diffusion_flux():
    assert np.allclose(divergence(np.array([0.0, 1.0, 3.0]), 0.5), [-2.0, -4.0])
    spec = DiffusionSpec(0.1, 0.0, 1e-3)
    up = pad(np.array([[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]]), Extrapolate())
    q = central_diffusion_flux(up, spec, 1.0)
    assert q.shape == (1, 7)
    assert np.allclose(q[0, 1:-1], 0.1)


def _sin_op(n, law=LINEAR_ADVECTION, **kw):
    g = build_grid_1d(0.0, 2 * np.pi, n, periodic=True)
    return Semidiscrete(law, g, Periodic(), **kw), g


def test_rhs_conservative_on_periodic_grid(rng):
    op, g = _sin_op(64, BURGERS)
    u = rng.random((1, 64))
    assert abs(np.sum(op.rhs(u)) * g.dx) < 1e-12


def test_rhs_converges_fifth_order_for_advection():
    errs = []
    for n in (40, 80):
        op, g = _sin_op(n)
        u = np.sin(g.x)[None]
        errs.append(np.max(np.abs(op.rhs(u)[0] + np.cos(g.x))))
    assert np.log2(errs[0] / errs[1]) > 4.5


def test_euler_free_stream_preserved():
    m = Euler1D()
    g = build_grid_1d(0.0, 1.0, 20)
    op = Semidiscrete(m, g, Extrapolate())
    U = np.repeat(m.to_conservative(1.0, 0.5, 1.0)[:, None], 20, axis=1)
    assert np.allclose(op.rhs(U), 0.0, atol=1e-13)


def test_char_flux_consistency_on_constant_state():
    m = Euler1D()
    U = np.repeat(m.to_conservative(1.0, 0.3, 2.0)[:, None], 16, axis=1)
    F = char_weno_interface_flux(pad(U, Extrapolate()), m)
    assert np.allclose(F, m.flux(U[:, :1]), atol=1e-13)


def test_diffusion_only_for_1d_scalar():
    g = build_grid_1d(0.0, 1.0, 20)
    with pytest.raises(ValueError):
        Semidiscrete(Euler1D(), g, Extrapolate(), diffusion=DiffusionSpec(0.1, 0.5, 0.05))
    with pytest.raises(ValueError):
        Semidiscrete(Euler2D(), g, Extrapolate())


def test_2d_scalar_extrusion_matches_1d(rng):
    n = 24
    g1 = build_grid_1d(0.0, 1.0, n, periodic=True)
    g2 = build_grid_2d((0.0, 1.0), (0.0, 1.0), (n, 10), periodic=True)
    op1 = Semidiscrete(LINEAR_ADVECTION, g1, Periodic())
    op2 = Semidiscrete(LINEAR_ADVECTION, g2, Periodic())
    u1 = np.sin(2 * np.pi * g1.x)[None] + 0.1 * rng.random((1, n))
    u2 = np.repeat(u1[:, :, None], 10, axis=2)
    r2 = op2.rhs(u2)
    assert np.allclose(r2, op1.rhs(u1)[:, :, None], atol=1e-12)


def test_2d_euler_extrusion_matches_1d(rng):
    n = 20
    m1, m2 = Euler1D(), Euler2D()
    g1 = build_grid_1d(0.0, 1.0, n, periodic=True)
    g2 = build_grid_2d((0.0, 1.0), (0.0, 1.0), (n, 8), periodic=True)
    rho = 1.0 + 0.2 * np.sin(2 * np.pi * g1.x)
    u = 0.5 + 0.1 * rng.random(n)
    p = 1.0 + 0.1 * np.cos(2 * np.pi * g1.x)
    U1 = m1.to_conservative(rho, u, p)
    U2 = np.repeat(m2.to_conservative(rho, u, 0.0 * u, p)[:, :, None], 8, axis=2)
    r1 = Semidiscrete(m1, g1, Periodic()).rhs(U1)
    r2 = Semidiscrete(m2, g2, Periodic()).rhs(U2)
    assert np.allclose(r2[[0, 1, 3]], r1[:, :, None], atol=1e-11)
    assert np.allclose(r2[2], 0.0, atol=1e-12)


def test_2d_rotation_symmetry(rng):
    n = 16
    g = build_grid_2d((0.0, 1.0), (0.0, 1.0), n, periodic=True)
    op = Semidiscrete(Euler2D(), g, Periodic())
    X, Y = g.mesh()
    rho = 1.0 + 0.2 * np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y)
    U = Euler2D().to_conservative(rho, 0.3 + 0 * X, -0.2 + 0 * X, 1.0 + 0 * X)
    # swap x and y (and the momentum components)
    Ut = U[[0, 2, 1, 3]].transpose(0, 2, 1)
    r = op.rhs(U)
    rt = op.rhs(Ut)
    assert np.allclose(rt, r[[0, 2, 1, 3]].transpose(0, 2, 1), atol=1e-12)
