import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccforms.errors import DomainError, InputError
from ccforms.model_space import (FrameVector, SpaceForm, contact_form, covariant_term, frame_at, inner,
                                 j_rotate, metric_tensor, pushforward, random_points, structure_constants,
                                 to_ambient, to_frame, vertical_rotation, vertical_translation)

KAPPAS = (-1, 0, 1)
X, Y, T = np.eye(3)


def test_frame_at_heisenberg_origin():
    F = frame_at(SpaceForm(0), np.zeros(3))
    assert np.allclose(F, np.eye(3))


def test_frame_at_heisenberg_off_axis():
    F = frame_at(SpaceForm(0), np.array([1.0, 0.0, 0.0]))
    assert np.allclose(F[:, 0], [1, 0, 0])
    assert np.allclose(F[:, 1], [0, 1, -1])


def test_frame_at_sphere_identity():
    F = frame_at(SpaceForm(1), np.array([1.0, 0, 0, 0]))
    assert np.allclose(F[:, 0], [0, 0, 1, 0])
    assert np.allclose(F[:, 1], [0, 0, 0, 1])
    assert np.allclose(F[:, 2], [0, 1, 0, 0])


def test_j_rotate():
    assert np.allclose(j_rotate(X), Y)
    assert np.allclose(j_rotate(T), 0)
    assert np.allclose(j_rotate(j_rotate(Y)), -Y)


@pytest.mark.parametrize("kappa", KAPPAS)
def test_connection_examples(kappa):
    sf = SpaceForm(kappa)
    assert np.allclose(covariant_term(sf, X, T), Y)
    assert np.allclose(covariant_term(sf, X, X), 0)
    assert np.allclose(covariant_term(sf, X, Y), -T)


def test_structure_constants_brackets():
    for k in KAPPAS:
        c = structure_constants(k)
        assert np.allclose(c[0, 1], -2 * T)
        assert np.allclose(c[0, 2], 2 * k * Y)
        assert np.allclose(c[1, 2], -2 * k * X)


def test_contact_form_examples():
    sf = SpaceForm(0)
    assert contact_form(sf, np.array([1.0, 0, 0]), np.array([0.0, 1, 0])) == pytest.approx(1.0)
    assert contact_form(sf, np.zeros(3), np.array([1.0, 0, 0])) == pytest.approx(0.0)
    for k in KAPPAS:
        sf = SpaceForm(k)
        p = random_points(sf, np.random.default_rng(k + 5), 4)
        Tamb = frame_at(sf, p)[..., 2]
        assert np.allclose(contact_form(sf, p, Tamb), 1.0)


def test_vertical_translation_examples():
    assert np.allclose(vertical_translation(SpaceForm(0), 2.0, [1.0, 1.0, 0.0]), [1, 1, 2])
    p = np.array([0.3, -0.2, 1.0])
    assert np.allclose(vertical_translation(SpaceForm(-1), 0.0, p), p)
    assert np.allclose(vertical_translation(SpaceForm(1), math.pi, [1.0, 0, 0, 0]), [-1, 0, 0, 0])


def test_domain_errors():
    with pytest.raises(DomainError):
        frame_at(SpaceForm(-1), np.array([1.0, 0.0, 0.0]))
    with pytest.raises(DomainError):
        frame_at(SpaceForm(1), np.array([1.0, 1.0, 0.0, 0.0]))
    with pytest.raises(InputError):
        SpaceForm(2)


@pytest.mark.parametrize("kappa", KAPPAS)
def test_frame_orthonormal_on_random_points(kappa, rng):
    sf = SpaceForm(kappa)
    p = random_points(sf, rng, 1000)
    F = frame_at(sf, p)
    G = np.einsum("nia,nij,njb->nab", F, metric_tensor(sf, p), F)
    assert np.max(np.abs(G - np.eye(3))) < 1e-12


@pytest.mark.parametrize("kappa", KAPPAS)
def test_brackets_by_finite_differences(kappa, rng):
    sf = SpaceForm(kappa)
    h = 1e-5
    want = {(0, 1): -2 * T, (0, 2): 2 * kappa * Y, (1, 2): -2 * kappa * X}
    for p in random_points(sf, rng, 20, radius=0.5):
        F = frame_at(sf, p)

        def dfield(j, direction):
            return (frame_at(sf, p + h * direction, check=False)[:, j]
                    - frame_at(sf, p - h * direction, check=False)[:, j]) / (2 * h)

        for (i, j), w in want.items():
            br = dfield(j, F[:, i]) - dfield(i, F[:, j])
            assert np.allclose(to_frame(sf, p, br), w, atol=1e-6)


@pytest.mark.parametrize("kappa", KAPPAS)
def test_metric_compatibility_along_curve(kappa, rng):
    """d/ds <U,V> = <D U, V> + <U, D V> with U, V given by frame components along a line."""
    sf = SpaceForm(kappa)
    p0 = random_points(sf, rng, 1, radius=0.4)[0]
    a = rng.normal(size=sf.dim)
    if kappa == 1:
        a -= a.dot(p0) * p0

    def curve(s):
        p = p0 + s * a
        return p / np.linalg.norm(p) if kappa == 1 else p

    f = lambda s: np.array([np.cos(s), s * s, 1 + s])
    g = lambda s: np.array([np.sin(2 * s), 1.0, -s])

    def ambient_inner(s):
        p = curve(s)
        return inner(sf, p, to_ambient(sf, p, f(s)), to_ambient(sf, p, g(s)))

    h = 1e-5
    for s in (0.0, 0.1, 0.2):
        lhs = (ambient_inner(s + h) - ambient_inner(s - h)) / (2 * h)
        vel = to_frame(sf, curve(s), (curve(s + h) - curve(s - h)) / (2 * h))
        DU = (f(s + h) - f(s - h)) / (2 * h) + covariant_term(sf, vel, f(s))
        DV = (g(s + h) - g(s - h)) / (2 * h) + covariant_term(sf, vel, g(s))
        assert lhs == pytest.approx(DU @ g(s) + f(s) @ DV, abs=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(KAPPAS), st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_dujv_identity(kappa, xs):
    sf = SpaceForm(kappa)
    U, V = np.array(xs[:3]), np.array(xs[3:])
    res = covariant_term(sf, U, j_rotate(V)) - j_rotate(covariant_term(sf, U, V)) - V[2] * U + (U @ V) * T
    assert np.max(np.abs(res)) < 1e-12


@pytest.mark.parametrize("kappa", KAPPAS)
@pytest.mark.parametrize("iso", [vertical_translation, vertical_rotation])
def test_isometries_preserve_inner_products(kappa, iso, rng):
    sf = SpaceForm(kappa)
    for p in random_points(sf, rng, 10, radius=0.5):
        u, w = rng.normal(size=3), rng.normal(size=3)
        param = rng.uniform(-2, 2)
        q, u2 = pushforward(sf, iso, param, p, u)
        _, w2 = pushforward(sf, iso, param, p, w)
        assert u2 @ w2 == pytest.approx(u @ w, abs=1e-9)


def test_frame_vector_helpers():
    v = FrameVector(np.zeros(3), [3.0, 4.0, 0.0])
    assert v.norm() == pytest.approx(5.0)
    assert v.is_horizontal() and not v.is_vertical()
    assert FrameVector(np.zeros(3), T).is_vertical()
    with pytest.raises(InputError):
        FrameVector(np.zeros(3), [1.0, 2.0])
