import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from supercrit.algebra import (DIMS, NOMINAL_DILATION, ORACLE_DILATION, AlgebraElement, DilationModel,
                               HopfPoint, cd_mul, conjugate, dilation_sq, hopf_map, hopf_map_array,
                               morphism_residual, mul, multiplication_table, oracle_dilation_constant)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def elements(dim):
    return arrays(np.float64, dim, elements=finite).map(AlgebraElement)


@pytest.mark.parametrize("dim", DIMS)
def test_basis_unit_is_identity(dim):
    one = AlgebraElement.basis(dim, 0)
    for i in range(dim):
        e = AlgebraElement.basis(dim, i)
        assert mul(one, e) == e and mul(e, one) == e


@pytest.mark.parametrize("dim", [2, 4, 8])
def test_imaginary_units_square_to_minus_one(dim):
    for i in range(1, dim):
        e = AlgebraElement.basis(dim, i)
        assert mul(e, e) == -AlgebraElement.basis(dim, 0)


def test_quaternion_products_match_hamilton():
    i, j, k = (AlgebraElement.basis(4, n) for n in (1, 2, 3))
    assert mul(i, j) == k
    assert mul(j, k) == i
    assert mul(k, i) == j
    assert mul(j, i) == -k


def test_octonions_are_not_associative():
    e = [AlgebraElement.basis(8, n) for n in range(8)]
    left = mul(mul(e[1], e[2]), e[4])
    right = mul(e[1], mul(e[2], e[4]))
    assert left == -right


def test_multiplication_table_signs_are_units():
    table = multiplication_table(8)
    for row in table:
        assert sorted(k for _, k in row) == list(range(8))
        assert all(s in (-1, 1) for s, _ in row)


@pytest.mark.parametrize("dim", DIMS)
def test_zero_times_anything_is_zero(dim):
    a = AlgebraElement(np.arange(1.0, dim + 1))
    assert mul(AlgebraElement.zero(dim), a) == AlgebraElement.zero(dim)


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        mul(AlgebraElement.basis(2, 0), AlgebraElement.basis(4, 0))


def test_unsupported_dimension_raises():
    with pytest.raises(ValueError):
        AlgebraElement(np.ones(3))


@pytest.mark.parametrize("dim", DIMS)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_norm_is_multiplicative(dim, data):
    a = data.draw(elements(dim))
    b = data.draw(elements(dim))
    assert np.isclose(mul(a, b).norm(), a.norm() * b.norm(), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("dim", DIMS)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_conjugate_reverses_products(dim, data):
    a = data.draw(elements(dim))
    b = data.draw(elements(dim))
    assert conjugate(mul(a, b)).isclose(mul(conjugate(b), conjugate(a)), atol=1e-9)


@pytest.mark.parametrize("dim", DIMS)
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_alternative_law(dim, data):
    a = data.draw(elements(dim))
    b = data.draw(elements(dim))
    assert mul(mul(a, a), b).isclose(mul(a, mul(a, b)), atol=1e-8)


@pytest.mark.parametrize("dim", DIMS)
def test_hopf_norm_identity(dim, rng):
    z = rng.normal(size=(1000, 2 * dim))
    assert np.allclose(np.linalg.norm(hopf_map_array(z), axis=1), np.sum(z * z, axis=1), rtol=1e-12)


def test_hopf_of_origin_is_origin():
    p = HopfPoint(AlgebraElement.zero(4), AlgebraElement.zero(4))
    assert np.all(hopf_map(p) == 0)


def test_hopf_complex_closed_form():
    z = np.array([0.3, -0.7, 1.1, 0.4])
    z1, z2 = complex(z[0], z[1]), complex(z[2], z[3])
    w = 2 * z1.conjugate() * z2
    expected = [w.real, w.imag, abs(z1) ** 2 - abs(z2) ** 2]
    assert np.allclose(hopf_map_array(z), expected, rtol=0, atol=1e-15)


def test_hopf_point_round_trip(rng):
    x = rng.normal(size=8)
    p = HopfPoint.from_array(x)
    assert np.array_equal(p.to_array(), x)
    assert p.norm_sq() == pytest.approx(float(x @ x))


def test_hopf_point_requires_matching_algebras():
    with pytest.raises(ValueError):
        HopfPoint(AlgebraElement.zero(2), AlgebraElement.zero(4))


def test_dilation_oracle_is_four():
    # Lap_{R^4} |z|^4 = 24 |z|^2 and Lap_{R^3} |w|^2 = 6 force the constant 4
    assert oracle_dilation_constant() == 4.0
    assert ORACLE_DILATION.constant == 4.0
    assert NOMINAL_DILATION.constant == 2.0


def test_dilation_model_rejects_nonpositive():
    with pytest.raises(ValueError):
        DilationModel(0.0)


def test_dilation_sq_of_origin_is_zero():
    assert dilation_sq(np.zeros(4), ORACLE_DILATION) == 0.0


@pytest.mark.parametrize("dim", DIMS)
def test_morphism_residual_vanishes_for_linear_functions(dim, rng):
    c = rng.normal(size=dim + 1)
    v = lambda w: w @ c
    x = rng.normal(size=2 * dim)
    x /= np.linalg.norm(x)
    assert morphism_residual(v, x, h=1e-2) < 1e-8


def test_morphism_residual_flags_wrong_constant(rng):
    v = lambda w: np.sum(w * w, axis=-1)
    x = np.array([0.5, 0.1, -0.4, 0.6])
    good = morphism_residual(v, x, h=1e-3, model=ORACLE_DILATION)
    bad = morphism_residual(v, x, h=1e-3, model=NOMINAL_DILATION)
    assert good < 1e-4 < bad


def test_cd_mul_batches(rng):
    a = rng.normal(size=(5, 8))
    b = rng.normal(size=(5, 8))
    out = cd_mul(a, b)
    for i in range(5):
        assert np.allclose(out[i], cd_mul(a[i], b[i]))
