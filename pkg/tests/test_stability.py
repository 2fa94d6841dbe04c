import math

import numpy as np
import pytest

from ccforms.errors import InputError
from ccforms.geodesics import GeodesicSpec
from ccforms.geometry import frame_data, l_nh_closed_form, shape_entries, surface_frame
from ccforms.model_space import SpaceForm
from ccforms.stability import (INCONCLUSIVE, STRICT, STRONG, UNSTABLE, TestFunction, Window, WitnessFunction,
                               check_support, classify, disc_integral_closed_form, index_form,
                               index_form_sorpasso, jacobi_operator, l_nh_operator_vs_closed,
                               plane_identity_suite, q_value, random_rect)
from ccforms.surfaces import (AngleFunction, build_helicoid, build_pole_surface, build_sphere, build_strip,
                              eval_surface)

K0, KM, K1 = SpaceForm(0), SpaceForm(-1), SpaceForm(1)
HEL_WIN = Window((-1.0, 1.0), (-2.0, 2.0))


def helicoid_m1(lam, slope):
    return build_helicoid(KM, lam, theta=AngleFunction.linear(slope))


def strip0():
    return build_strip(K0, 0.0, GeodesicSpec(K0, np.zeros(3), 0.0, -1.0))


def test_q_matches_frame_formula():
    surf = helicoid_m1(0.5, 0.3)
    pt = eval_surface(surf, 0.2, 0.8)
    fr, ent = surface_frame(surf, pt), shape_entries(surf, pt)
    ref = 4 * (ent.H ** 2 + surf.sf.kappa - 1) * fr.nh ** 2 + (1 + ent.bzs) ** 2
    assert q_value(fr, ent, surf.sf) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("lam,slope", [(0.0, 1.0), (0.5, 0.5), (0.0, 0.3), (0.3, 1.4)])
def test_l_nh_helicoid_m1(lam, slope):
    surf = helicoid_m1(lam, slope)
    e = np.linspace(-1, 1, 9)
    s = np.linspace(0.3, 1.9, 9)
    v = surf.vjet(e, s, 0)[0]
    expected = 4 * (slope + lam ** 2 - 1)
    assert np.allclose(v ** 2 * l_nh_closed_form(surf, e, s), expected, atol=1e-12)
    assert np.allclose(v ** 2 * jacobi_operator(surf, "nh", e, s), expected, atol=1e-8)


def test_l_nh_strip():
    surf = strip0()
    s = np.linspace(0.1, 0.9, 9)
    e = 0 * s
    v = surf.vjet(e, s, 0)[0]
    assert np.allclose(jacobi_operator(surf, "nh", e, s) * v ** 2, -4, atol=1e-8)
    assert np.max(np.abs(l_nh_operator_vs_closed(surf, e, s))) < 1e-6


def test_l_of_zero_function():
    surf = helicoid_m1(0.5, 0.3)
    e = np.linspace(-1, 1, 5)
    out = jacobi_operator(surf, lambda E, S: 0 * E, e, 0.6 + 0 * e)
    assert np.all(out == 0)


def test_reeb_jacobi_vanishes():
    for surf in (helicoid_m1(0.5, 0.3), build_pole_surface(K0, 0.0), build_sphere(K1, 1.0), strip0()):
        win = classify(surf).window
        E, S = win.points()
        keep = np.abs(surf.vjet(E, S, 0)[0]) > 1e-2
        L = jacobi_operator(surf, "nt", E[keep], S[keep])
        assert np.max(np.abs(L)) < 1e-5


def test_test_function_boundary_and_support():
    rng = np.random.default_rng(3)
    for _ in range(10):
        u = TestFunction.random(rng, random_rect(rng, (-1, 1, -2, 2)))
        assert u.boundary_max() <= 1e-12
    with pytest.raises(InputError):
        TestFunction((0, 0, 0, 1))
    with pytest.raises(InputError):
        TestFunction((0, 1, 0, 1), k=1)


def test_check_support_rejects_singular_set():
    plane = build_pole_surface(K0, 0.0)
    with pytest.raises(InputError):
        check_support(plane, (0.0, 1.0, 0.0, 0.5))
    strip = strip0()
    with pytest.raises(InputError):
        check_support(strip, (-0.5, 0.5, 0.5, 1.5))
    check_support(plane, (0.0, 1.0, 0.2, 0.5))


def test_index_form_zero_and_symmetry():
    surf = helicoid_m1(0.5, 0.3)
    u = TestFunction((-0.5, 0.5, 0.2, 1.0), amplitude=0.0)
    assert index_form(surf, u) == 0.0
    a = TestFunction((-0.5, 0.5, 0.2, 1.0))
    b = TestFunction((-0.2, 0.7, 0.4, 1.3), coeffs=((1.0, 0.5), (0.2, 0.0)))
    assert index_form(surf, a, b) == pytest.approx(index_form(surf, b, a), rel=1e-10)
    far = TestFunction((0.6, 0.9, 0.2, 1.0))
    assert index_form(surf, a, far) == 0.0


@pytest.mark.parametrize("surf", [helicoid_m1(0.5, 0.3), helicoid_m1(0.0, 0.8), strip0(),
                                  build_pole_surface(KM, 0.5)], ids=["hel-a", "hel-b", "strip", "plane"])
def test_sorpasso_agrees(surf, rng):
    win = classify(surf).window
    rect0 = (*win.eps_range, *win.s_range)
    for _ in range(3):
        u = TestFunction.random(rng, random_rect(rng, rect0))
        try:
            q1 = index_form(surf, u)
        except InputError:
            continue
        q2 = index_form_sorpasso(surf, u, "nh")
        assert abs(q1 - q2) <= 1e-5 * max(1.0, abs(q1))


def test_plane_positivity_and_nt_witness(rng):
    plane = build_pole_surface(K0, 0.0)
    rect = (0.3, 2.0, 0.3, 1.5)
    for _ in range(5):
        u = TestFunction.random(rng, random_rect(rng, rect))
        assert index_form(plane, u) > 0
        w = WitnessFunction(plane, "nt", rect)
        assert abs(index_form(plane, u, w)) < 1e-6


@pytest.mark.parametrize("surf,win,expected", [
    (build_helicoid(K0, 0.0, theta=AngleFunction.linear(0.0)), HEL_WIN, STRONG),
    (helicoid_m1(0.0, 0.5), HEL_WIN, STRICT),
    (helicoid_m1(0.5, 0.5), HEL_WIN, STRICT),
    (build_helicoid(KM, 0.0, theta=AngleFunction.arctan()), HEL_WIN, STRONG),
    (build_helicoid(K1, 0.0, theta=AngleFunction.linear(1.0)), HEL_WIN, UNSTABLE),
    (helicoid_m1(0.0, 1.5), HEL_WIN, INCONCLUSIVE),
    (build_pole_surface(K0, 0.0), None, STRONG),
    (build_sphere(K1, 1.0), None, STRONG),
], ids=["vertical-m0", "strict", "strict-lam", "bernstein", "s3-vertical", "inconclusive", "plane", "sphere"])
def test_classify_examples(surf, win, expected):
    assert classify(surf, win).classification == expected


def test_threshold_flip():
    # strictly stable below 1 - lam^2, inconclusive above it
    lam = 0.5
    edge = 1 - lam ** 2
    assert classify(helicoid_m1(lam, edge - 1e-3), HEL_WIN).classification == STRICT
    assert classify(helicoid_m1(lam, edge + 1e-3), HEL_WIN).classification == INCONCLUSIVE


@pytest.mark.parametrize("sf,lam", [(K0, 0.0), (KM, 0.0), (KM, 0.5), (KM, 1.0)])
def test_plane_suite(sf, lam):
    out = plane_identity_suite(build_pole_surface(sf, lam), n=40)
    assert out["nt_min"] > 0
    for k in ("bzs", "q", "bss", "density"):
        assert out[k] < 1e-7, k
    assert out["disc_rel_error"] < 1e-8


def test_disc_closed_form_value():
    assert disc_integral_closed_form(0.0, 1.0) == pytest.approx(8 * math.pi / 3, rel=1e-15)
    # small mu approaches the flat value
    assert disc_integral_closed_form(1e-4, 1.0) == pytest.approx(8 * math.pi / 3, rel=1e-7)
