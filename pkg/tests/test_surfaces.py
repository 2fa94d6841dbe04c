import math

import numpy as np
import pytest

from ccforms.errors import InputError
from ccforms.geodesics import GeodesicSpec
from ccforms.geometry import surface_frame, unit_normal
from ccforms.model_space import SpaceForm
from ccforms.stability import area_element, patch_area
from ccforms.surfaces import (AngleFunction, build_helicoid, build_pole_surface, build_sphere, build_strip,
                              eval_surface, evaluate, immersion_status, locate_singular_vertical,
                              strip_first_zero)
from ccforms.verify import strip_checks

K0, KM, K1 = SpaceForm(0), SpaceForm(-1), SpaceForm(1)


def grid_positions(surf, e=(-1, 1), s=(-2, 2), n=9):
    pos, _ = surf.grid(np.linspace(*e, n), np.linspace(*s, n), tol=1e-12)
    return pos


def test_vertical_plane_in_heisenberg():
    surf = build_helicoid(K0, 0.0, sigma=AngleFunction.linear(0.0))
    assert np.max(np.abs(grid_positions(surf)[..., 1])) < 1e-10


def test_bernstein_graph():
    surf = build_helicoid(KM, 0.0, theta=AngleFunction.arctan())
    p = grid_positions(surf, s=(-1.5, 1.5))
    x, y, t = p[..., 0], p[..., 1], p[..., 2]
    assert np.max(np.abs(y - x * t)) < 1e-8
    assert immersion_status(surf, (-5, 5)).singular_set_empty


def test_right_handed_helicoid_family():
    for lam, C in ((0.0, 0.3), (0.5, 0.75)):
        surf = build_helicoid(KM, lam, sigma=AngleFunction.linear(C - 2))
        assert surf.theta(np.array([0.7]), 1)[0] == pytest.approx(C)
        st = immersion_status(surf, (-3, 3))
        assert st.immersed and st.singular_set_empty


def test_immersion_examples():
    st = immersion_status(build_helicoid(KM, 0.0, theta=AngleFunction.linear(0.5)), (-2, 2))
    assert st.immersed and st.singular_set_empty
    st = immersion_status(build_helicoid(KM, 0.0, theta=AngleFunction.linear(1.0)), (-2, 2))
    assert st.immersed and st.singular_set_empty
    # theta' changes sign on the window
    st = immersion_status(build_helicoid(K0, 0.0, theta=AngleFunction.arctan(amplitude=1.0, scale=1.0)), (-2, 2))
    assert st.singular_set_empty
    st = immersion_status(build_helicoid(K0, 0.0, theta=AngleFunction.linear(-0.5)), (-2, 2))
    assert st.immersed and not st.singular_set_empty
    # kappa = 1, theta' = 0 = -lambda^2 sits on the immersion boundary
    st = immersion_status(build_helicoid(K1, 0.0, theta=AngleFunction.linear(0.0)), (-1, 1))
    assert not st.immersed and not st.singular_set_empty
    assert "theta'" in st.condition
    st = immersion_status(build_helicoid(K1, 0.0, theta=AngleFunction.linear(1.0)), (-1, 1))
    assert st.vertical_surface


def test_helicoid_initial_data():
    for sf in (KM, K0, K1):
        surf = build_helicoid(sf, 0.4, sigma=AngleFunction.arctan(scale=0.7))
        e = np.linspace(-2, 2, 9)
        d = surf.vjet(e, 0.0, 2)
        assert np.allclose(d[0], 1) and np.allclose(d[1], 0)
        assert np.allclose(d[2], 2 * surf.sigma(e, 1) - 4 * sf.kappa)


def test_vertical_points_trigonometric_case():
    surf = build_helicoid(K1, 0.5, theta=AngleFunction.linear(0.3))
    tau = surf.tau()
    k = math.sqrt(tau)
    sing, vert = locate_singular_vertical(surf, 0.2, (0.1, 3.5 * math.pi / k))
    assert len(vert) == 3
    for m, r in enumerate(vert, start=1):
        assert abs(r - m * math.pi / k) < 1e-10


def test_no_zeros_for_nonnegative_theta_prime():
    surf = build_helicoid(KM, 0.0, theta=AngleFunction.linear(0.4))
    sing, _ = locate_singular_vertical(surf, 0.0, (-10, 10))
    assert sing == []


def test_strip_first_zero_examples():
    gamma = GeodesicSpec(K0, np.zeros(3), 0.0, -1.0)
    surf = build_strip(K0, 0.0, gamma)
    assert surf.s0 == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(surf.vjet(0.0, np.array([0.3, 2.0]), 0)[0], [2 * 0.3 * (0.3 - 1), 2 * 2 * 1])
    assert surf.vjet(0.0, surf.s0, 1)[1] == pytest.approx(2.0)
    assert math.isinf(strip_first_zero(0.0, 0.0))
    flat = build_strip(K0, 0.0, GeodesicSpec(K0, np.zeros(3), 0.0, 0.0))
    assert math.isinf(flat.s0)
    assert np.allclose(flat.vjet(0.0, np.array([1.5]), 0)[0], -3.0)


@pytest.mark.parametrize("sf,lam,mu", [(K0, 0.0, -1.0), (KM, 0.5, 0.2), (K1, 0.5, 0.3), (KM, 0.0, -1.5)])
def test_strip_zero_matches_closed_form(sf, lam, mu):
    base = sf.origin()
    surf = build_strip(sf, lam, GeodesicSpec(sf, base, 0.0, mu))
    ref = strip_first_zero(surf.tau(), mu)
    assert (math.isinf(ref) and math.isinf(surf.s0)) or abs(ref - surf.s0) < 1e-10


def test_hyperbolic_paraboloid_strip():
    surf = build_strip(K0, 0.0, GeodesicSpec(K0, np.zeros(3), 0.0, 0.0))
    pos, _ = surf.grid(np.linspace(-1, 1, 5), np.linspace(0, 2, 5), tol=1e-12)
    x, y, t = pos[..., 0], pos[..., 1], pos[..., 2]
    assert np.max(np.abs(t + x * y)) < 1e-9  # t = -xy, congruent to t = xy


def test_strip_singular_curve_geometry():
    for sf, lam, mu in ((K0, 0.0, -1.0), (K1, 0.5, 0.3), (KM, 0.5, -1.2)):
        surf = build_strip(sf, lam, GeodesicSpec(sf, sf.origin(), 0.0, mu))
        for c in strip_checks(surf, None):
            assert c["passed"], c


def test_plane_examples():
    p = build_pole_surface(K0, 0.0)
    s = np.linspace(0, 2, 9)
    assert np.allclose(p.vjet(0.0, s, 0)[0], s * s)
    pos = grid_positions(p, e=(0, 2 * math.pi), s=(0, 2))
    assert np.max(np.abs(pos[..., 2])) < 1e-10
    q = build_pole_surface(KM, 0.0)
    assert q.mu == pytest.approx(1.0)
    assert np.allclose(q.vjet(0.0, s, 0)[0], np.sinh(s) ** 2)
    sph = build_sphere(K1, 0.0)
    assert sph.s_domain()[1] == pytest.approx(math.pi)
    assert abs(sph.vjet(0.0, math.pi, 0)[0]) < 1e-15


def test_builder_input_checks():
    with pytest.raises(InputError):
        build_sphere(K0, 0.0)
    with pytest.raises(InputError):
        build_pole_surface(K1, 0.0)
    with pytest.raises(InputError):
        build_pole_surface(K0, -0.5)
    with pytest.raises(InputError):
        build_helicoid(K0, 0.0)
    with pytest.raises(InputError):
        build_helicoid(K0, 0.0, sigma=AngleFunction.linear(1), theta=AngleFunction.linear(1))
    with pytest.raises(InputError):
        AngleFunction.spline([0, 1, 2], [0, 1, 2])
    with pytest.raises(InputError):
        evaluate(build_pole_surface(K0, 0.0), [0.0], [-1.0])


def test_eval_surface_examples():
    hel = build_helicoid(K0, 0.0, sigma=AngleFunction.linear(0.0))
    assert np.allclose(eval_surface(hel, 2.0, 3.0).position, [3, 0, 2], atol=1e-10)
    plane = build_pole_surface(KM, 0.3, np.array([0.1, 0.2, 0.5]))
    for th in (0.0, 1.0, 4.0):
        assert np.allclose(eval_surface(plane, th, 0.0).position, [0.1, 0.2, 0.5])
    hyp = build_helicoid(KM, 0.0, sigma=AngleFunction.linear(0.0))
    for s in (0.5, 2.0):
        assert np.allclose(eval_surface(hyp, 0.0, s).position, [math.tanh(s), 0, 0], atol=1e-10)


def test_surface_point_directions():
    hel = build_helicoid(KM, 0.5, theta=AngleFunction.linear(0.3))
    pt = eval_surface(hel, 0.4, 1.1)
    assert pt.Zdir.norm() == pytest.approx(1.0) and pt.Zdir.is_horizontal(1e-9)
    jv = np.array([0.5 * (1 - pt.v), pt.vp / 2, pt.v])
    assert np.allclose(pt.Vdir, jv)


def test_unit_normal_examples():
    plane = build_pole_surface(K0, 0.0)
    for th, s in ((0.3, 0.5), (2.0, 1.7)):
        pt = eval_surface(plane, th, s)
        N = unit_normal(plane, pt)
        assert N.norm() == pytest.approx(1.0)
        v, vp = pt.v, pt.vp
        assert N.c == pytest.approx(vp / math.sqrt(4 * v * v + vp * vp))
    hel = build_helicoid(K0, 0.0, sigma=AngleFunction.linear(1.0))
    pt = eval_surface(hel, 0.5, 0.0)
    N = unit_normal(hel, pt)
    assert np.allclose(N.comps, -np.array([-pt.Zdir.b, pt.Zdir.a, 0.0]))
    fr = surface_frame(hel, pt)
    assert fr.nt == pytest.approx(0.0) and fr.nh == pytest.approx(1.0)


def test_area_examples():
    plane = build_pole_surface(K0, 0.0)
    s = np.linspace(0.1, 2, 7)
    v = s * s
    dens = area_element(plane, 0.0, s)
    nh = 2 * v / np.sqrt(4 * v * v + 4 * s * s)
    assert np.allclose(dens / nh, s * s + 1)
    assert patch_area(plane, (0.0, 2 * math.pi, 0.0, 1.0)).__float__() == pytest.approx(2 * math.pi / 3, rel=1e-10)
    assert patch_area(plane, (0.0, 0.0, 0.0, 1.0)) == 0.0


def test_angle_function_derivatives():
    fns = [AngleFunction.linear(0.7, 0.2), AngleFunction.arctan(1.3, 0.1, 0.8),
           AngleFunction.spline([-2, -1, 0, 1, 2], [0.0, 0.5, 0.7, 1.5, 1.6])]
    e = np.linspace(-1.5, 1.5, 11)
    h = 1e-5
    for f in fns:
        for n in range(2):
            fd = (f(e + h, n) - f(e - h, n)) / (2 * h)
            assert np.allclose(fd, f(e, n + 1), atol=1e-5)
        assert f.smoothness >= 1
    assert fns[2].smoothness == 2
