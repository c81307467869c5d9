import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuchsqd.hypgeo import DiscPoint, hyp_distance, integrate_radial
from fuchsqd.quaddiff import (
    QDSample,
    dump_samples,
    extension_hyp_norm_profile,
    hyp_norm,
    l1_norm,
    l1_norm_quadrature,
    l1_norm_radial,
    load_samples,
    minimal_extension,
    pullback_extension,
    pullback_sample,
    symmetry_check,
    tail_mass,
    tail_mass_quadrature,
)

from strategies import automorphisms, coeffs, disc_points


def test_hyp_norm_examples():
    assert hyp_norm(QDSample(0, 1)) == 1
    assert hyp_norm(QDSample(0.5, 1)) == pytest.approx(0.5625, rel=1e-15)
    assert hyp_norm(QDSample(0.3 - 0.2j, 0)) == 0
    with pytest.raises(ValueError):
        QDSample(0, complex(float("inf"), 0))


def test_extension_examples():
    e0 = minimal_extension(QDSample(0, 1))
    assert np.all(e0(np.array([0, 0.5, -0.9j])) == 1)
    e = minimal_extension(QDSample(0.5, 1))
    assert e(0.5) == pytest.approx(1.0, rel=1e-15)
    assert e(0.0) == pytest.approx(0.31640625, rel=1e-15)
    assert pullback_extension(QDSample(0.5, 1), 0.0) == pytest.approx(0.31640625, rel=1e-14)


@given(disc_points(3.0), coeffs, disc_points(3.0))
def test_closed_form_matches_pullback_oracle(p, c, x):
    s = QDSample(p, c)
    a, b = minimal_extension(s)(x.z), pullback_extension(s, x.z)
    assert abs(a - b) <= 1e-9 * abs(b)


@given(disc_points(3.0), coeffs)
def test_extension_property(p, c):
    s = QDSample(p, c)
    assert minimal_extension(s)(p.z) == pytest.approx(c, rel=1e-12, abs=1e-300)


@given(disc_points(3.0), coeffs.filter(lambda c: abs(c) > 1e-6), disc_points(4.0))
def test_radial_law(p, c, x):
    s = QDSample(p, c)
    got = minimal_extension(s).hyp_norm_at(x.z) / hyp_norm(s)
    assert got == pytest.approx(float(extension_hyp_norm_profile(hyp_distance(p, x))),
                                rel=1e-8, abs=1e-14)


def test_profile_endpoints():
    assert extension_hyp_norm_profile(0.0) == 1.0
    assert extension_hyp_norm_profile(1.0) == pytest.approx(1 / math.cosh(1) ** 4)


def test_l1_examples():
    assert l1_norm(minimal_extension(QDSample(0, 1))) == pytest.approx(math.pi, rel=1e-15)
    assert l1_norm(minimal_extension(QDSample(0, 2))) == pytest.approx(2 * math.pi, rel=1e-15)
    e = minimal_extension(QDSample(0.7, 1))
    want = math.pi * (1 - 0.49) ** 2
    assert l1_norm(e) == pytest.approx(want, rel=1e-14)
    assert l1_norm_radial(e) == pytest.approx(want, rel=1e-9)
    assert l1_norm_quadrature(e) == pytest.approx(want, rel=1e-9)


@given(st.floats(0.0, 3.0), st.floats(0.0, 2 * math.pi), coeffs.filter(lambda c: abs(c) > 1e-3))
def test_mass_identity_by_quadrature(d, th, c):
    e = minimal_extension(QDSample(DiscPoint.from_polar(d, th), c))
    assert l1_norm_quadrature(e) == pytest.approx(l1_norm(e), rel=1e-7)


def test_tail_mass():
    assert tail_mass(0) == pytest.approx(math.pi)
    assert tail_mass(2) == pytest.approx(0.2220, abs=1e-4)
    assert tail_mass(2) == pytest.approx(
        integrate_radial(lambda t: 1 / math.cosh(t) ** 4, 2, math.inf), rel=1e-9)
    vals = [tail_mass(R) for R in np.linspace(0, 20, 41)]
    assert all(a > b for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-16
    for R in (0.5, 1.0, 4.0):
        assert tail_mass_quadrature(R) == pytest.approx(tail_mass(R), rel=1e-7)
    with pytest.raises(ValueError):
        tail_mass(-0.1)


def test_symmetry_examples():
    a, b = symmetry_check(QDSample(0, 1), QDSample(0.5, 1))
    assert a == pytest.approx(0.5625, rel=1e-14) and b == pytest.approx(0.5625, rel=1e-14)
    s = QDSample(0.2j, 3 - 1j)
    assert symmetry_check(s, s) == pytest.approx((1.0, 1.0), rel=1e-14)
    with pytest.raises(ValueError):
        symmetry_check(s, QDSample(0.1, 0))


@given(disc_points(3.0), coeffs.filter(lambda c: abs(c) > 1e-6),
       disc_points(3.0), coeffs.filter(lambda c: abs(c) > 1e-6))
def test_symmetry_random(p, c1, q, c2):
    a, b = symmetry_check(QDSample(p, c1), QDSample(q, c2))
    assert abs(a - b) <= 1e-10 * max(a, 1e-300) + 1e-14


@given(disc_points(2.0), coeffs, automorphisms(2.0), disc_points(2.0))
def test_pullback_commutes_with_extension(p, c, g, x):
    s = QDSample(p, c)
    lhs = minimal_extension(pullback_sample(s, g))(x.z)
    rhs = minimal_extension(s)(g(x.z)) * g.derivative(x.z) ** 2
    assert abs(lhs - rhs) <= 1e-8 * abs(c) * p.conformal ** 2 / (1 - abs(x.z) ** 2) ** 2 + 1e-300


def test_json_round_trip_is_bit_exact():
    rng = np.random.default_rng(0)
    samples = [QDSample(complex(*(rng.random(2) * 0.6)), complex(*rng.normal(size=2)))
               for _ in range(20)]
    text = dump_samples(samples)
    back = load_samples(text)
    assert back == samples
    obj = json.loads(text)[0]
    assert set(obj) == {"t_re", "t_im", "c_re", "c_im"}
