import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccforms.geodesics import GeodesicSpec
from ccforms.jacobi import JacobiField, VerticalComponent, jacobi_vector, numeric_jacobi, solve_vertical
from ccforms.model_space import SpaceForm
from ccforms.surfaces import (AngleFunction, build_helicoid, build_pole_surface, build_sphere,
                              build_strip)

S = np.linspace(-3, 3, 13)


def test_polynomial_case():
    tp = 0.7
    v = solve_vertical(0.0, 1.0, 0.0, 2 * tp)
    assert np.allclose(v(S), tp * S ** 2 + 1, atol=1e-14)
    assert v.case == "polynomial"


def test_hyperbolic_case():
    tp = 0.3
    v = solve_vertical(-4.0, 1.0, 0.0, 2 * tp)
    assert np.allclose(v(S), (2 * tp / -4.0) * (1 - np.cosh(2 * S)) + 1, rtol=1e-13)


def test_plane_data_sinh_squared():
    mu = 0.8
    v = solve_vertical(4 * mu * mu, 0.0, 0.0, 2.0)
    # tau = 4 mu^2 > 0 gives the trigonometric branch; tau = -4 mu^2 gives sinh^2
    w = solve_vertical(-4 * mu * mu, 0.0, 0.0, 2.0)
    assert np.allclose(w(S), np.sinh(mu * S) ** 2 / mu ** 2, rtol=1e-13)
    assert np.allclose(v(S), np.sin(mu * S) ** 2 / mu ** 2, atol=1e-14)


@pytest.mark.parametrize("tau", (-3.0, 0.0, 2.5))
def test_zero_data(tau):
    assert np.all(solve_vertical(tau, 0.0, 0.0, 0.0).derivs(S, 3) == 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, 10), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_initial_data_round_trip(tau, a, b, c):
    d = solve_vertical(tau, a, b, c).derivs(0.0, 2)
    assert d[0] == a and d[1] == b and d[2] == c


def test_initial_data_round_trip_bulk(rng):
    for tau in (-4.0, 0.0, 1e-9, 3.0):
        data = rng.uniform(-3, 3, size=(3, 1000))
        d = VerticalComponent(tau, *data).derivs(0.0, 2)
        assert np.array_equal(d, data)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_ode_residual(tau, a, b, c):
    d = solve_vertical(tau, a, b, c).derivs(S, 3)
    scale = 1 + np.max(np.abs(d))
    assert np.max(np.abs(d[3] + tau * d[1])) <= 1e-12 * scale


@pytest.mark.parametrize("tau", (1e-6, -1e-6))
def test_case_continuity_near_zero(tau):
    # the true tau-perturbation is about tau * (v0'' s^4/24 + v0' s^3/6), so keep it under 1e-6 on |s| <= 3
    data = (1.0, 0.0, 0.2)
    s = np.linspace(-3, 3, 61)
    v = solve_vertical(tau, *data)(s)
    poly = solve_vertical(0.0, *data)(s)
    assert np.max(np.abs(v - poly)) < 1e-6


@pytest.mark.parametrize("tau", (1e-6, -1e-6, 1e-9, -1e-9))
def test_small_tau_against_high_precision(tau):
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    data = (1.0, -0.4, 1.3)
    vc = solve_vertical(tau, *data)
    for s in np.linspace(-3, 3, 13):
        k = mp.sqrt(mp.mpf(abs(tau)))
        x = mp.mpf(float(s))
        if tau > 0:
            ref = data[0] + data[1] * mp.sin(k * x) / k + data[2] * (1 - mp.cos(k * x)) / k ** 2
        else:
            ref = data[0] + data[1] * mp.sinh(k * x) / k + data[2] * (mp.cosh(k * x) - 1) / k ** 2
        assert float(vc(s)) == pytest.approx(float(ref), rel=1e-13, abs=1e-13)


def test_case_formula_agrees_away_from_zero():
    for tau in (-2.0, 3.0):
        vc = solve_vertical(tau, 0.5, -1.0, 2.0)
        assert np.allclose(vc(S), vc.case_formula(S), atol=1e-12)
    vc = solve_vertical(0.0, 0.5, -1.0, 2.0)
    assert np.allclose(vc(S), vc.case_formula(S), atol=1e-14)


def test_numerator_is_constant():
    vc = solve_vertical(2.0, 0.3, 1.2, -0.7)
    d = vc.derivs(S, 2)
    assert np.allclose(2 * d[0] * d[2] - d[1] ** 2 + 2.0 * d[0] ** 2, vc.numerator(), atol=1e-12)


def test_jacobi_vector_components():
    lam = 0.6
    vc = solve_vertical(1.5, 1.0, 0.0, 0.4)
    jf = JacobiField(lam, vc, 1.0, 0.0)
    v, vp = vc.derivs(S, 1)
    assert np.allclose(jacobi_vector(jf, S), np.stack([lam * (1 - v), vp / 2, v], axis=-1))
    assert np.allclose(jacobi_vector(jf, 0.0), [0, 0, 1])
    plane = JacobiField(lam, solve_vertical(1.5, 0.0, 0.0, 2.0))
    v, vp = plane.v.derivs(S, 1)
    assert np.allclose(jacobi_vector(plane, S), np.stack([-lam * v, vp / 2, v], axis=-1))


def _families():
    return [
        build_helicoid(SpaceForm(-1), 0.5, theta=AngleFunction.linear(0.3)),
        build_helicoid(SpaceForm(0), 0.0, sigma=AngleFunction.arctan()),
        build_helicoid(SpaceForm(1), 0.7, theta=AngleFunction.linear(0.2)),
        build_pole_surface(SpaceForm(-1), 0.5),
        build_sphere(SpaceForm(1), 1.0),
        build_strip(SpaceForm(0), 0.0, GeodesicSpec(SpaceForm(0), np.zeros(3), 0.0, -1.0)),
        build_strip(SpaceForm(1), 0.5, GeodesicSpec(SpaceForm(1), np.array([1.0, 0, 0, 0]), 0.0, 0.3)),
    ]


@pytest.mark.parametrize("surf", _families(), ids=lambda s: f"{s.kind}-k{s.sf.kappa}")
def test_numeric_jacobi_matches_closed_form(surf, rng):
    lo, hi = surf.s_domain()
    hi = min(hi, 2.0)
    lo = max(lo, -2.0)
    e = rng.uniform(-1, 1, 20)
    s = rng.uniform(lo, hi, 20)
    num = numeric_jacobi(surf.sf, lambda a, b: surf.flow(a, b, 1e-11), e, s)
    assert np.max(np.abs(num - jacobi_vector(surf.jacobi_field(e), s))) < 1e-6


def test_numeric_jacobi_plane_at_pole_vanishes():
    surf = build_pole_surface(SpaceForm(0), 0.0)
    num = numeric_jacobi(surf.sf, lambda a, b: surf.flow(a, b, 1e-11), np.array([0.3, 2.0]), np.zeros(2))
    assert np.max(np.abs(num)) < 1e-9


def test_numeric_jacobi_of_constant_flow_is_zero():
    pos = np.array([[1.0, 2.0, 3.0]])

    def flow(e, s):
        n = len(e)
        return np.repeat(pos, n, axis=0), np.tile([1.0, 0.0, 0.0], (n, 1))

    out = numeric_jacobi(SpaceForm(0), flow, np.array([0.5]), np.array([1.0]))
    assert np.all(out == 0)
