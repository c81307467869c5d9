import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuchsqd.extend import (
    IllConditionedError,
    RefusedError,
    check_admissible,
    extend_direct,
    extend_neumann,
    extension_sup_certificate,
    measured_extension_sup,
    zero_pad,
)
from fuchsqd.fuchsian import (
    R_STAR,
    QDData,
    SeparatedSet,
    constant_table,
    make_separated_set,
)
from fuchsqd.hypgeo import DiscPoint


def _random(r, R, seed, n_max=60, proposals=None):
    S = make_separated_set("greedy-random", r, R, seed=seed, n_max=n_max, radial="uniform",
                           proposals=proposals)
    rng = np.random.default_rng(seed)
    h = np.sqrt(rng.random(len(S))) * np.exp(2j * np.pi * rng.random(len(S)))
    return QDData.from_hyp_values(S, h)


def test_singleton_converges_in_one_step():
    d = QDData(SeparatedSet((DiscPoint(0.3 + 0.1j),), 4.0), [2 - 1j])
    res = extend_neumann(d)
    assert res.iterations == 1 and res.converged
    assert np.array_equal(res.solved_coeffs, d.coeffs)
    direct = extend_direct(d)
    assert direct.solved_coeffs == pytest.approx(d.coeffs, rel=1e-15)
    assert measured_extension_sup(res) == pytest.approx(d.sup_norm, rel=1e-12)
    assert measured_extension_sup(res) <= extension_sup_certificate(res)


def test_zero_data():
    d = QDData(SeparatedSet((DiscPoint(0), DiscPoint(0.999)), 3.0), [0, 0])
    res = extend_neumann(d)
    assert res.converged and res.iterations == 0 and np.all(res.solved_coeffs == 0)


@pytest.mark.parametrize("seed", range(4))
def test_residuals_shrink_by_D_each_step(seed):
    # r = 2 gives D = 0.724, so the contraction has to do real work
    r = 2.0
    d = _random(r, 7.0, seed, n_max=120, proposals=3000)
    D = constant_table(r).D
    res = extend_neumann(d, tol=1e-12)
    assert res.converged
    h = res.residual_history
    for n, x in enumerate(h):
        assert x <= D ** n * h[0] * (1 + 1e-9) + 1e-15
    assert all(x <= D + 1e-9 for x in res.residual_ratios())
    assert res.iterations >= 3


def test_unit_data_at_r4():
    S = make_separated_set("greedy-random", 4.0, 8.0, seed=11, n_max=30, proposals=3000)
    assert len(S) == 30
    d = QDData.from_hyp_values(S, np.ones(30))
    res = extend_neumann(d, tol=1e-10)
    assert res.converged
    assert max(res.residual_ratios()) <= 0.0760
    assert res.iterations <= math.ceil(math.log(1e-10) / math.log(constant_table(4.0).D))


@pytest.mark.parametrize("seed", range(5))
def test_direct_and_neumann_agree(seed):
    d = _random(4.0, 8.0, seed, n_max=30)
    a = extend_neumann(d, tol=1e-12)
    b = extend_direct(d)
    assert np.max(np.abs(a.solved.hyp_values - b.solved.hyp_values)) <= 1e-10 * d.sup_norm


def test_interpolation_residual_below_tol():
    d = _random(2.5, 6.0, 3, n_max=80, proposals=2000)
    res = extend_neumann(d, tol=1e-11)
    assert res.interpolation_residual() <= 1e-11 * d.sup_norm
    direct = extend_direct(d)
    assert direct.interpolation_residual() <= 1e-12 * d.sup_norm


@pytest.mark.parametrize("sign", [1, -1])
def test_two_point_closed_form(sign):
    r = 3.0
    x = math.tanh(r)
    S = SeparatedSet((DiscPoint(0), DiscPoint(x)), r * (1 - 1e-12))
    d = QDData.from_hyp_values(S, [1.0, sign * 1.0])
    k = 1 / math.cosh(r) ** 4
    want = np.array([1.0, sign * 1.0]) / (1 + sign * k)
    for res in (extend_direct(d), extend_neumann(d, tol=1e-14)):
        assert res.solved.hyp_values == pytest.approx(want, rel=1e-9)


def test_refusal():
    for r in (1.0, 1.5, R_STAR):
        with pytest.raises(RefusedError, match="asinh"):
            check_admissible(r)
    check_admissible(float(np.nextafter(R_STAR, 3)))
    d = QDData(SeparatedSet((DiscPoint(0), DiscPoint(0.95)), 1.5), [1, 1])
    with pytest.raises(RefusedError):
        extend_neumann(d)
    # the direct solver has no such precondition
    res = extend_direct(d)
    assert res.certified_sup_bound == math.inf
    with pytest.raises(ValueError):
        extend_neumann(d, tol=0.0)


def test_non_convergence_is_flagged():
    d = _random(2.0, 6.0, 0, n_max=80, proposals=2000)
    res = extend_neumann(d, tol=1e-15, max_iter=1)
    assert not res.converged and res.iterations == 1
    with pytest.raises(ValueError):
        extension_sup_certificate(res)


def test_ill_conditioned_system():
    S = SeparatedSet((DiscPoint(0), DiscPoint(1e-9)), 1e-10)
    with pytest.raises(IllConditionedError):
        extend_direct(QDData(S, [1, 1]))


def test_zero_padding():
    big = make_separated_set("greedy-random", 3.0, 6.0, seed=2, n_max=20)
    sub = SeparatedSet(big.points[::3], 3.0)
    d = QDData.from_hyp_values(sub, np.arange(1, len(sub) + 1, dtype=float))
    res = extend_neumann(d, enclosing=big)
    assert len(res.data.support) == len(big)
    series = res.series
    vals = series(big.z) * (1 - np.abs(big.z) ** 2) ** 2
    target = np.zeros(len(big), complex)
    target[::3] = d.hyp_values
    assert np.max(np.abs(vals - target)) <= 1e-9 * d.sup_norm
    with pytest.raises(ValueError):
        zero_pad(QDData(SeparatedSet((DiscPoint(0.123),), 3.0), [1]), big)


@given(st.integers(0, 500), st.complex_numbers(max_magnitude=5).filter(lambda a: abs(a) > 1e-3))
def test_solution_is_linear(seed, a):
    d = _random(3.0, 5.0, seed % 40, n_max=25)
    b = extend_direct(d.with_coeffs(a * d.coeffs)).solved_coeffs
    assert np.allclose(b, a * extend_direct(d).solved_coeffs, rtol=1e-10,
                       atol=1e-12 * abs(a) * np.abs(d.coeffs).max())


@pytest.mark.parametrize("seed", range(5))
def test_certificate_holds(seed):
    d = _random(4.0, 8.0, seed, n_max=40)
    res = extend_neumann(d)
    cert = extension_sup_certificate(res)
    assert cert == pytest.approx(constant_table(4.0).E * d.sup_norm)
    assert measured_extension_sup(res) <= cert


def test_result_json_keys():
    d = _random(4.0, 6.0, 0, n_max=5)
    obj = extend_neumann(d).to_json()
    assert {"coeffs", "iterations", "residuals", "E_bound"} <= set(obj)
