import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_rotation
from isoperi.errors import InputError
from isoperi.forms import AxisPlane, ConstantTwoForm, axis_planes, comass, interior_product
from oracles import COMASS_BLOCK_FORM, SQRT5, double_interior_product


def random_form(rng, n):
    return ConstantTwoForm(n, {p: rng.normal() for p in axis_planes(n)})


def test_axis_plane_validation():
    assert AxisPlane.checked(0, 2, 3) == (0, 2)
    for bad in [(1, 1), (2, 1), (0, 3), (-1, 1)]:
        with pytest.raises(InputError):
            AxisPlane.checked(*bad, 3)


def test_interior_product_unit_form():
    omega = ConstantTwoForm.axis(2, 0, 1)
    np.testing.assert_array_equal(interior_product(omega, [0, 1]), [-1, 0])


def test_interior_product_zero_tangent(rng):
    omega = random_form(rng, 4)
    np.testing.assert_array_equal(interior_product(omega, np.zeros(4)), np.zeros(4))


def test_interior_product_double_curve_is_curvature():
    omega = ConstantTwoForm(4, {(0, 1): 1 / SQRT5, (2, 3): 2 / SQRT5})
    for s in np.linspace(0, 2 * np.pi, 7):
        T = np.array([-np.sin(s), np.cos(s), -2 * np.sin(2 * s), 2 * np.cos(2 * s)]) / SQRT5
        np.testing.assert_allclose(interior_product(omega, T), double_interior_product(s), atol=1e-15)


def test_interior_product_dimension_mismatch():
    with pytest.raises(InputError):
        interior_product(ConstantTwoForm.axis(3, 0, 1), [1.0, 0.0])


def test_interior_product_bilinear(rng):
    for n in (2, 3, 5):
        a, b = random_form(rng, n), random_form(rng, n)
        T, U = rng.normal(size=n), rng.normal(size=n)
        s, t = rng.normal(size=2)
        lhs = interior_product(s * a + t * b, T)
        np.testing.assert_allclose(lhs, s * interior_product(a, T) + t * interior_product(b, T), atol=1e-12)
        lhs = interior_product(a, s * T + t * U)
        np.testing.assert_allclose(lhs, s * interior_product(a, T) + t * interior_product(a, U), atol=1e-12)


def test_alternating(rng):
    for _ in range(50):
        n = int(rng.integers(2, 6))
        omega, T = random_form(rng, n), rng.normal(size=n)
        assert abs(interior_product(omega, T) @ T) < 1e-13 * (1 + T @ T)


def test_comass_examples():
    assert comass(ConstantTwoForm.axis(2, 0, 1)) == pytest.approx(1.0, abs=1e-15)
    block = ConstantTwoForm(4, {(0, 1): 1.0, (2, 3): 2.0})
    assert comass(block) == pytest.approx(COMASS_BLOCK_FORM, abs=1e-14)
    assert comass(ConstantTwoForm.zero(3)) == 0.0


def test_comass_dominates_sampled_pairs(rng):
    for n in (3, 4):
        omega = random_form(rng, n)
        A = omega.matrix()
        U = rng.normal(size=(10_000, 2, n))
        u = U[:, 0] / np.linalg.norm(U[:, 0], axis=1)[:, None]
        w = U[:, 1] - np.sum(U[:, 1] * u, axis=1)[:, None] * u
        w /= np.linalg.norm(w, axis=1)[:, None]
        vals = np.einsum("ki,ij,kj->k", u, A, w)
        c = comass(omega)
        assert vals.max() <= c + 1e-12
        assert vals.max() >= c - 0.05 * c


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 4), st.floats(-5, 5), st.integers(0, 2**31))
def test_comass_homogeneous_and_rotation_invariant(n, lam, seed):
    rng = np.random.default_rng(seed)
    omega = random_form(rng, n)
    assert comass(lam * omega) == pytest.approx(abs(lam) * comass(omega), rel=1e-12, abs=1e-14)
    R = random_rotation(rng, n)
    assert comass(omega.rotated(R)) == pytest.approx(comass(omega), rel=1e-12)


def test_rotated_matches_pullback(rng):
    omega = random_form(rng, 4)
    R = random_rotation(rng, 4)
    u, v = rng.normal(size=(2, 4))
    # pushing forward the form and the vectors together leaves the pairing fixed
    assert omega.rotated(R)(R @ u, R @ v) == pytest.approx(omega(u, v), abs=1e-12)


def test_sparse_storage_and_sign_flip():
    f = ConstantTwoForm.axis(3, 2, 0, 1.5)
    assert dict(f.coeffs) == {AxisPlane(0, 2): -1.5}
    assert f[(2, 0)] == 1.5
    assert f[(0, 1)] == 0.0
    assert ConstantTwoForm(3, {(0, 1): 0.0}).coeffs == {}


def test_invalid_forms():
    with pytest.raises(InputError):
        ConstantTwoForm(3, {(0, 3): 1.0})
    with pytest.raises(InputError):
        ConstantTwoForm(2, {(0, 1): float("nan")})
    with pytest.raises(InputError):
        ConstantTwoForm.from_matrix(np.eye(3))


def test_serialization_round_trip_exact(rng):
    omega = ConstantTwoForm(5, {p: rng.normal() for p in axis_planes(5)[::2]})
    text = json.dumps(omega.to_list())
    back = ConstantTwoForm.from_list(5, json.loads(text))
    assert back == omega
    assert ConstantTwoForm.from_dict(json.loads(json.dumps(omega.to_dict()))) == omega


def test_from_list_rejects_garbage():
    with pytest.raises(InputError):
        ConstantTwoForm.from_list(2, [{"i": 0, "coeff": 1}])
