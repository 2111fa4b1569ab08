import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from supercrit.algebra import ORACLE_DILATION, hopf_map_array
from supercrit.geometry import make_profile
from supercrit.reduction import (INF, OrbitData, RotationalSpec, critical_exponent,
                                 hopf_multiplicity_terms, hopf_reduce, level_bound, lift,
                                 plain_problem, ps_threshold, residual_transfer, symmetry_reduce)


@pytest.mark.parametrize("N,k,expected", [(3, 0, 6.0), (4, 1, 6.0), (5, 2, 6.0), (5, 0, 10 / 3),
                                          (16, 13, 6.0), (4, 2, INF), (3, 1, INF)])
def test_critical_exponent_values(N, k, expected):
    assert critical_exponent(N, k) == expected


@given(N=st.integers(3, 40), data=st.data())
def test_critical_exponent_decreases_with_dimension_gap(N, data):
    k = data.draw(st.integers(0, N - 4)) if N >= 4 else 0
    if N - k - 1 >= 3:
        assert critical_exponent(N, k) < critical_exponent(N, k + 1)


def test_critical_exponent_rejects_bad_input():
    with pytest.raises(ValueError):
        critical_exponent(2, 0)
    with pytest.raises(ValueError):
        critical_exponent(5, 6)


def test_problem_rejects_small_exponent():
    with pytest.raises(ValueError):
        plain_problem(make_profile("ball", center=[0, 0], radius=1.0), 2.0)


def test_hopf_reduce_coefficients():
    U = make_profile("shell", center=[0, 0, 0], inner=0.5, outer=1.0)
    pr = hopf_reduce(U, 1.5, 4.0)
    x = np.array([[0.6, 0.0, 0.0], [0.0, 0.0, -0.9]])
    assert np.allclose(pr.coefficient(x), 1 / (4 * np.array([0.6, 0.9])))
    assert np.allclose(pr.linear(x), 1.5 / (4 * np.array([0.6, 0.9])))
    assert pr.meta["algebra_dim"] == 2


def test_hopf_reduce_rejects_origin():
    with pytest.raises(ValueError):
        hopf_reduce(make_profile("ball", center=[0, 0, 0], radius=1.0), 0.0, 4.0)


def test_hopf_reduce_rejects_bad_dimension():
    with pytest.raises(ValueError):
        hopf_reduce(make_profile("ball", center=[3, 0, 0, 0], radius=1.0), 0.0, 4.0)


def test_lift_composes_with_hopf(rng):
    v = lambda x: x[:, 0] + 2 * x[:, -1]
    u = lift(v)
    z = rng.normal(size=(20, 4))
    x = hopf_map_array(z)
    assert np.allclose(u(z), x[:, 0] + 2 * x[:, -1])


def test_lift_is_constant_on_fibres(rng):
    # multiplying (z1, z2) by a unit complex number leaves pi unchanged
    v = lambda x: np.sin(x[:, 0]) + x[:, 1] * x[:, 2]
    u = lift(v)
    z = rng.normal(size=(10, 4))
    theta = 0.7
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    zr = np.concatenate([z[:, :2] @ rot.T, z[:, 2:] @ rot.T], axis=1)
    assert np.allclose(u(z), u(zr))


def test_residual_transfer_polynomial(rng):
    U = make_profile("shell", center=[0, 0, 0], inner=0.5, outer=1.0)
    pr = hopf_reduce(U, 0.5, 4.0)
    v = lambda x: 1 - np.sum(x * x, axis=1) + 0.3 * x[:, 0] * x[:, 2]
    d = rng.normal(size=(20, 4))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    z = d * np.sqrt(rng.uniform(0.6, 0.9, size=(20, 1)))
    rt = residual_transfer(v, pr, z)
    assert np.max(rt.relative_error) < 1e-4


def test_rotational_spec_round_trip(rng):
    prof = make_profile("ball", center=[2, 0, 0], radius=0.5)
    spec = RotationalSpec((1,), 4, prof)
    x = prof.interior_samples(10)
    y = spec.to_ambient(x, seed=1)
    assert y.shape == (10, 4)
    assert np.allclose(spec.to_profile(y), x)


def test_rotational_spec_dimension_check():
    prof = make_profile("ball", center=[2, 0], radius=0.5)
    with pytest.raises(ValueError):
        RotationalSpec((1,), 4, prof)


def test_chain_rule_gradient(rng):
    prof = make_profile("ball", center=[2, 0, 0], radius=0.5)
    spec = RotationalSpec((1,), 4, prof, lambda x: x[:, 0] ** 2 * (1 + x[:, 1]),
                          lambda x: np.stack([2 * x[:, 0] * (1 + x[:, 1]), x[:, 0] ** 2, 0 * x[:, 0]], 1))
    y = spec.to_ambient(prof.interior_samples(5), seed=2)
    g = spec.gradK_ambient(y)
    h = 1e-6
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        fd = (spec.K_ambient(y + e) - spec.K_ambient(y - e)) / (2 * h)
        assert np.allclose(g[:, j], fd, atol=1e-6)


def test_symmetry_reduce_weights():
    prof = make_profile("ball", center=[2, 0, 0], radius=0.5)
    pr = symmetry_reduce(RotationalSpec((2,), 5, prof), 4.0)
    x = np.array([[2.0, 0.1, 0.0]])
    assert pr.weight(x)[0] == pytest.approx(4.0)
    assert pr.coefficient(x)[0] == pytest.approx(4.0)


def test_symmetry_reduce_rejects_axis():
    prof = make_profile("ball", center=[0.2, 0, 0], radius=0.5)
    with pytest.raises(ValueError):
        symmetry_reduce(RotationalSpec((1,), 4, prof), 4.0)


def test_ps_threshold_and_levels():
    orbit = OrbitData(min_orbit_weight=2.0, M=4, sobolev_constant=3.0)
    assert ps_threshold(orbit) == pytest.approx(2.0 * 9.0 / 4)
    assert ps_threshold(OrbitData(math.inf, 4)) == INF
    bound = level_bound([1.0, 2.0], orbit)
    assert bound.c_upper == 3.0
    assert bound.ell_upper == pytest.approx(3.0 / (9.0 / 4))
    with pytest.raises(ValueError):
        level_bound([], orbit)


def test_multiplicity_terms_side_by_side():
    U = make_profile("shell", center=[0, 0, 0], inner=0.5, outer=1.0)
    out = hopf_multiplicity_terms(3, U, 2, 7.0)
    assert set(out) == {"lhs", "ell_upper"}
    assert out["lhs"] == pytest.approx(3 * 0.5 ** 0.5, rel=1e-6)
