import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from finegrain.clifford import (
    I2,
    X,
    Y,
    Z,
    anticommutator,
    effects_from_observable,
    gamma_generators,
    observable,
    qubits_for,
)
from finegrain.linalg import kron_all


def test_two_generators_are_x_and_y():
    g = gamma_generators(2)
    assert g.dim == 2
    np.testing.assert_array_equal(g[0], X)
    np.testing.assert_array_equal(g[1], Y)


def test_three_generators_close_with_z():
    g = gamma_generators(3)
    assert g.dim == 2
    np.testing.assert_array_equal(g[2], Z)


def test_single_generator():
    g = gamma_generators(1)
    assert g.dim == 2 and len(g) == 1
    np.testing.assert_array_equal(g[0], X)


def test_five_generators_on_two_qubits():
    g = gamma_generators(5)
    assert g.dim == 4
    expected = [kron_all(X, I2), kron_all(Y, I2), kron_all(Z, X), kron_all(Z, Y), kron_all(Z, Z)]
    for got, want in zip(g, expected):
        np.testing.assert_array_equal(got, want)


def test_big_endian_ordering():
    # the Z string sits on the leftmost factor
    g = gamma_generators(4)
    np.testing.assert_array_equal(g[2], np.kron(Z, X))
    assert not np.array_equal(g[2], np.kron(X, Z))


@pytest.mark.parametrize("count", range(1, 14))
def test_clifford_relations(count):
    g = gamma_generators(count)
    assert g.dim == 2 ** qubits_for(count)
    ident = np.eye(g.dim)
    for j in range(count):
        np.testing.assert_array_equal(g[j] @ g[j], ident)
        np.testing.assert_array_equal(g[j], g[j].conj().T)
        assert abs(np.trace(g[j])) == 0
        for k in range(j + 1, count):
            np.testing.assert_array_equal(anticommutator(g[j], g[k]), 0)


@pytest.mark.parametrize("count", [0, -1, 22, 2.0])
def test_out_of_range_count(count):
    with pytest.raises(ValueError):
        gamma_generators(count)


def test_generators_are_read_only():
    g = gamma_generators(3)
    with pytest.raises(ValueError):
        g[0][0, 0] = 5


def test_observable_examples():
    np.testing.assert_allclose(observable([1, 0, 0], gamma_generators(3)), X)
    np.testing.assert_allclose(observable(np.array([1, 1, 0]) / np.sqrt(2), gamma_generators(3)),
                               (X + Y) / np.sqrt(2))


def test_observable_length_mismatch():
    with pytest.raises(ValueError):
        observable([1, 0], gamma_generators(3))


def test_effects_of_z():
    e0, e1 = effects_from_observable(Z)
    np.testing.assert_array_equal(e0, np.diag([1, 0]))
    np.testing.assert_array_equal(e1, np.diag([0, 1]))


def test_effects_of_x():
    e0, e1 = effects_from_observable(X)
    np.testing.assert_allclose(e0, np.full((2, 2), 0.5))
    np.testing.assert_allclose(e1, np.array([[0.5, -0.5], [-0.5, 0.5]]))


def test_effects_reject_non_involution():
    with pytest.raises(ValueError):
        effects_from_observable(2 * Z)
    with pytest.raises(ValueError):
        effects_from_observable(X + Z)


vectors = arrays(np.float64, 5, elements=st.floats(-3, 3, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(vectors)
def test_observable_squares_to_norm(v):
    b = observable(v, gamma_generators(5))
    np.testing.assert_allclose(b @ b, np.dot(v, v) * np.eye(4), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(vectors, vectors)
def test_anticommutator_is_inner_product(v, w):
    g = gamma_generators(5)
    ac = anticommutator(observable(v, g), observable(w, g))
    np.testing.assert_allclose(ac, 2 * np.dot(v, w) * np.eye(4), atol=1e-11)


@settings(max_examples=40, deadline=None)
@given(vectors.filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_unit_observable_effects_are_projectors(v):
    b = observable(v / np.linalg.norm(v), gamma_generators(5))
    e0, e1 = effects_from_observable(b)
    np.testing.assert_allclose(e0 + e1, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(e0 @ e0, e0, atol=1e-12)
    assert np.trace(e0).real == pytest.approx(2.0, abs=1e-12)
