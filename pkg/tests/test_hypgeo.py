import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fuchsqd.hypgeo import (
    DiscAutomorphism,
    DiscPoint,
    PolarQuadratureGrid,
    automorphism_to_zero,
    ball_volume,
    circumference,
    hyp_distance,
    hyp_distance_array,
    integrate_radial,
    pairwise_distances,
    pseudo_distance,
    sup_grid,
)

from strategies import automorphisms, disc_points


def test_point_rejects_outside_disc():
    with pytest.raises(ValueError):
        DiscPoint(1.0)
    with pytest.raises(ValueError):
        DiscPoint(complex(float("nan"), 0))


def test_from_polar_and_boundary_guard():
    p = DiscPoint.from_polar(10.0, 1.0)
    assert p.conformal == pytest.approx(1.0 / math.cosh(10.0) ** 2, rel=1e-6)
    assert p.radius == pytest.approx(10.0, rel=1e-8)
    with pytest.raises(ValueError):
        DiscPoint.from_polar(15.0)


def test_distance_basic_values():
    assert hyp_distance(0, 0) == 0.0
    # oracle: integrate ds = |dz| / (1 - |z|^2) along [0, 0.5]
    seg, _ = integrate.quad(lambda x: 1.0 / (1.0 - x * x), 0.0, 0.5, epsabs=1e-14)
    assert hyp_distance(0, 0.5) == pytest.approx(seg, rel=1e-12)
    assert hyp_distance(0, 0.5) == pytest.approx(0.5493061443340549, rel=1e-14)


def test_distance_by_moving_one_point_to_zero():
    phi = automorphism_to_zero(0.3)
    assert hyp_distance(0.3, 0.3j) == pytest.approx(hyp_distance(0, phi(0.3j)), rel=1e-13)


@given(disc_points(), disc_points(), automorphisms())
def test_distance_invariant_under_automorphisms(p, q, g):
    d = hyp_distance(p, q)
    assert hyp_distance(g(p), g(q)) == pytest.approx(d, rel=1e-8, abs=1e-8)


@given(disc_points(), disc_points(), disc_points())
def test_triangle_inequality(p, q, w):
    assert hyp_distance(p, w) <= hyp_distance(p, q) + hyp_distance(q, w) + 1e-9


def test_pseudo_distance_and_arrays():
    z = np.array([0.0, 0.5, 0.3j])
    assert pseudo_distance(0, 0.5) == pytest.approx(0.5)
    D = pairwise_distances(z)
    assert np.allclose(D, D.T) and np.all(np.diag(D) == 0)
    assert D[0, 1] == pytest.approx(math.atanh(0.5))
    assert np.allclose(hyp_distance_array(0.5, z), D[1])


def test_automorphism_examples():
    assert DiscAutomorphism.identity()(0.4 + 0.1j) == 0.4 + 0.1j
    phi = automorphism_to_zero(0.5)
    assert abs(phi(0.5)) == 0.0
    h = 1e-6
    fd = (phi(h) - phi(-h)) / (2 * h)
    assert phi.derivative(0.0) == pytest.approx(fd, rel=1e-8)
    assert abs(phi.derivative(0.5)) == pytest.approx(4.0 / 3.0, rel=1e-14)


@given(automorphisms(), disc_points(2.0))
def test_inverse_round_trip(g, p):
    w = g.inverse()(g(p.z))
    assert abs(w - p.z) < 1e-9


@given(automorphisms(1.5), automorphisms(1.5), disc_points(1.5))
def test_composition_matches_pointwise(g, h, p):
    assert abs((g @ h)(p.z) - g(h(p.z))) < 1e-9


@given(automorphisms())
def test_matrix_round_trip(g):
    m = g.matrix()
    assert abs(np.linalg.det(m) - 1.0) < 1e-8 * np.abs(m).max() ** 2
    back = DiscAutomorphism.from_matrix(m)
    for z in (0.0, 0.3 + 0.1j, -0.5j):
        assert abs(back(z) - g(z)) < 1e-9


def test_translation_moves_origin():
    t = DiscAutomorphism.translation(1.3, math.pi / 4)
    assert hyp_distance(0, t(0)) == pytest.approx(1.3, rel=1e-13)
    assert np.angle(t(0)) == pytest.approx(math.pi / 4)


def test_ball_volume():
    assert ball_volume(0) == 0
    for R in (1.0, 2.0):
        rho = math.tanh(R)
        # oracle: 2D quadrature of dv_g over the Euclidean disc of radius tanh R
        v, _ = integrate.dblquad(lambda s, th: s / (1 - s * s) ** 2, 0, 2 * math.pi, 0, rho,
                                 epsabs=1e-12, epsrel=1e-12)
        assert ball_volume(R) == pytest.approx(v, rel=1e-9)
    assert ball_volume(1.0) == pytest.approx(4.33885, abs=1e-5)
    assert ball_volume(2.0) == pytest.approx(41.32, abs=1e-2)
    with pytest.raises(ValueError):
        ball_volume(-1)


@given(st.floats(0.01, 5.0))
def test_circumference_is_volume_derivative(R):
    h = 1e-5
    fd = (ball_volume(R + h) - ball_volume(R - h)) / (2 * h)
    assert circumference(R) == pytest.approx(fd, rel=1e-6)


def test_integrate_radial_examples():
    assert integrate_radial(lambda t: 1.0, 0.0, 2.0) == pytest.approx(ball_volume(2.0), rel=1e-10)
    sech4 = lambda t: 1.0 / math.cosh(t) ** 4  # noqa: E731
    assert integrate_radial(sech4, 0.0, math.inf) == pytest.approx(math.pi, rel=1e-10)
    for R in (0.5, 2.0, 7.0):
        assert integrate_radial(sech4, R, math.inf) == pytest.approx(
            math.pi / math.cosh(R) ** 2, rel=1e-8)
    with pytest.raises(ValueError):
        integrate_radial(sech4, 2.0, 1.0)


def test_polar_grid_integrates_volume():
    g = PolarQuadratureGrid.build(3.0, n_panels=6, order=12, n_theta=16)
    assert g.total_weight() == pytest.approx(ball_volume(3.0), rel=1e-12)
    assert g.points.shape == g.conformal.shape == g.weights.shape
    assert np.allclose(g.conformal, 1 - np.abs(g.points) ** 2, rtol=1e-10)


def test_polar_grid_csv(tmp_path):
    g = PolarQuadratureGrid.build(1.0, n_panels=1, order=2, n_theta=3)
    path = tmp_path / "g.csv"
    g.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "d,theta,weight"
    assert len(lines) == 1 + 6


def test_sup_grid_covers_ball_and_patches():
    z, w = sup_grid(2.0, step=0.5, n_theta=8, centers=[0.5])
    assert np.all(np.abs(z) < 1)
    assert np.allclose(w, 1 - np.abs(z) ** 2, rtol=1e-9)
    assert np.max(hyp_distance_array(0, z)) <= 2.0 + 1e-9
    assert np.sum(hyp_distance_array(0.5, z) < 0.51) > 100
