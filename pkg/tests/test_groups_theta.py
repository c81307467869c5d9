import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuchsqd.groups import (
    FuchsianGroup,
    group_from_json,
    octagon_genus2,
    orbit_points,
    schottky,
    triangle_237,
)
from fuchsqd.hypgeo import DiscAutomorphism, hyp_distance, pairwise_distances
from fuchsqd.theta import (
    EnumerationCapExceeded,
    automorphy_check,
    automorphy_defects,
    enumerate_group,
    sphere_sums,
    theta_profile,
    theta_series,
)


@pytest.fixture(scope="module")
def genus2():
    g = octagon_genus2()
    return g, enumerate_group(g, 6)


def _is_identity(m, tol=1e-9):
    return np.allclose(m, np.eye(2), atol=tol) or np.allclose(m, -np.eye(2), atol=tol)


def test_letters_are_su11():
    for g in (octagon_genus2(), schottky(), triangle_237()):
        for m in g.letters:
            assert abs(np.linalg.det(m) - 1) < 1e-12
            assert m[1, 1] == pytest.approx(np.conj(m[0, 0]))
            assert m[1, 0] == pytest.approx(np.conj(m[0, 1]))
        for i, j in enumerate(g.inverse_of):
            assert _is_identity(g.letters[i] @ g.letters[j])


def test_alphabet_sizes():
    assert len(octagon_genus2().letters) == 8
    assert len(schottky().letters) == 4
    # the half-turn is its own inverse
    assert len(triangle_237().letters) == 3


def test_triangle_relations():
    g = triangle_237()
    rot, half = (x.matrix() for x in g.generators)
    assert _is_identity(np.linalg.matrix_power(rot, 7))
    assert _is_identity(half @ half)
    assert _is_identity(np.linalg.matrix_power(rot @ half, 3))


def test_octagon_generators_translate_by_side_pairing_length():
    rho = math.acosh(1 + math.sqrt(2))
    for gen in octagon_genus2().generators:
        assert hyp_distance(0, gen(0)) == pytest.approx(rho, rel=1e-12)


def test_group_json():
    for g in (octagon_genus2(), schottky(1.5), triangle_237()):
        back = group_from_json(g.to_json())
        assert back.kind == g.kind
        assert all(np.allclose(a, b) for a, b in zip(back.letters, g.letters))
    with pytest.raises(ValueError):
        group_from_json({"kind": "fuchsian-mystery"})
    with pytest.raises(ValueError):
        schottky(0.5)
    with pytest.raises(TypeError):
        FuchsianGroup((np.eye(2),))


def test_enumeration_small_cases():
    g = octagon_genus2()
    e0 = enumerate_group(g, 0)
    assert len(e0) == 1 and e0.counts == [1]
    e1 = enumerate_group(g, 1)
    assert e1.counts == [1, 8]
    # oracle: the 9 elements differ at three test points
    pts = [0.0, 0.3 + 0.1j, -0.2j]
    images = np.array([[e1.automorphism(i)(p) for p in pts] for i in range(len(e1))])
    for i in range(9):
        for j in range(i):
            assert np.max(np.abs(images[i] - images[j])) > 1e-3
    with pytest.raises(ValueError):
        enumerate_group(g, -1)


def test_surface_group_counts(genus2):
    # free-group sphere sizes 8 * 7^(L-1), less 8 coincidences at L = 4
    # from the cyclic conjugates of the length-8 relator
    _, en = genus2
    assert en.counts[:5] == [1, 8, 56, 392, 2744 - 8]
    free = [1] + [8 * 7 ** (k - 1) for k in range(1, 7)]
    assert all(c <= f for c, f in zip(en.counts, free))
    assert en.dedup_certificate()


def test_schottky_is_free():
    en = enumerate_group(schottky(), 6)
    assert en.counts == [1] + [4 * 3 ** (k - 1) for k in range(1, 7)]
    assert en.dedup_certificate()


def test_enumeration_deterministic_and_capped():
    a = enumerate_group(schottky(), 5)
    b = enumerate_group(schottky(), 5)
    assert np.array_equal(a.alpha, b.alpha) and np.array_equal(a.beta, b.beta)
    with pytest.raises(EnumerationCapExceeded):
        enumerate_group(octagon_genus2(), 6, cap=1000)


def test_truncate_and_orbit_separation(genus2):
    _, en = genus2
    t = en.truncate(3)
    assert t.counts == en.counts[:4]
    assert en.orbit_separation(0.1 + 0.2j) > 0.5


def test_orbit_points_match_group_action():
    pts = orbit_points(triangle_237(), 0j, 2.0)
    assert len(pts) == 176
    d = pairwise_distances(pts)
    np.fill_diagonal(d, np.inf)
    assert d.min() > 0.5
    assert np.all(np.arctanh(np.abs(pts)) <= 2.0)


def test_theta_trivial_cases():
    triv = FuchsianGroup(())
    v = theta_series(triv, [1, 2, 0.5], 0.3 + 0.1j, 5)
    z = 0.3 + 0.1j
    assert v.value == pytest.approx(1 + 2 * z + 0.5 * z * z)
    assert v.tail_estimate == 0
    g = octagon_genus2()
    assert theta_series(g, [1], 0.2, 0).value == 1
    with pytest.raises(ValueError):
        theta_series(g, np.ones(12), 0.0, 1)


def test_identity_defect_is_zero(genus2):
    g, en = genus2
    assert automorphy_check(g, [1, 0.3j], 0.1 + 0.2j, DiscAutomorphism.identity(), 4,
                            enum=en) == 0.0


def test_truncations_agree_within_tail(genus2):
    g, en = genus2
    z = 0.1 + 0.2j
    a = theta_series(g, [1], z, 4, enum=en)
    b = theta_series(g, [1], z, 6, enum=en)
    assert abs(a.value - b.value) < a.tail_estimate
    assert b.tail_estimate < a.tail_estimate


def test_profile_matches_series(genus2):
    g, en = genus2
    z = -0.2 + 0.1j
    p = theta_profile(en, [1, 0.5], z)
    for L in range(7):
        v = theta_series(g, [1, 0.5], z, L, enum=en)
        assert p.value(L) == pytest.approx(v.value, rel=1e-13)
        if L:
            assert p.tail_estimate(L) == pytest.approx(v.tail_estimate, rel=1e-12)


@given(st.integers(0, 3), st.floats(0, 0.35), st.floats(0, 2 * math.pi))
def test_weight_four_transformation_improves_with_L(genus2, i, rad, th):
    g, en = genus2
    z = rad * np.exp(1j * th)
    gamma = g.generators[i]
    d = automorphy_defects(en, [1, 0.2], z, gamma, [2, 4, 6])
    assert d[0] > d[1] > d[2]
    assert d[2] == pytest.approx(automorphy_check(g, [1, 0.2], z, gamma, 6, enum=en), rel=1e-9)


def test_schottky_sphere_sums_decay_geometrically():
    s = sphere_sums(enumerate_group(schottky(), 7), 0.1 + 0.2j)
    ratios = s[2:] / s[1:-1]
    assert np.all(ratios < 0.01)
    assert ratios.max() / ratios.min() < 1.2
