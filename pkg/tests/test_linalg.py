import numpy as np
import pytest

from finegrain.clifford import I2, X, Y, Z
from finegrain.linalg import (
    DensityMatrixError,
    NotHermitianError,
    hermitian_eig,
    maximally_entangled,
    partial_trace,
    projector,
    tensor_product,
    validate_density,
)
from finegrain.uncertainty import clifford_state

from conftest import random_density, random_hermitian

KET0 = np.array([1, 0])
KETP = np.array([1, 1]) / np.sqrt(2)


def test_tensor_identity():
    np.testing.assert_array_equal(tensor_product(I2, I2), np.eye(4))


def test_tensor_zz_diagonal():
    zz = tensor_product(Z, Z)
    np.testing.assert_array_equal(np.diag(zz), [1, -1, -1, 1])
    np.testing.assert_array_equal(zz, np.diag(np.diag(zz)))


def test_tensor_xz_blocks():
    expected = np.array([
        [0, 0, 1, 0],
        [0, 0, 0, -1],
        [1, 0, 0, 0],
        [0, -1, 0, 0],
    ])
    np.testing.assert_array_equal(tensor_product(X, Z), expected)


def test_tensor_shape_rectangular():
    a = np.ones((2, 3))
    b = np.ones((4, 1))
    assert tensor_product(a, b).shape == (8, 3)


def test_partial_trace_product_state():
    rho = projector(np.kron(KET0, KET0))
    np.testing.assert_allclose(partial_trace(rho, 2, 2, over="A"), projector(KET0), atol=1e-15)


def test_partial_trace_maximally_entangled_marginal():
    np.testing.assert_allclose(partial_trace(maximally_entangled(2), 2, 2, over="A"), np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(partial_trace(maximally_entangled(4), 4, 4, over="B"), np.eye(4) / 4, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_partial_trace_of_product_recovers_factors(seed):
    rng = np.random.default_rng(seed)
    ra, rb = random_density(rng, 2), random_density(rng, 3)
    joint = tensor_product(ra, rb)
    np.testing.assert_allclose(partial_trace(joint, 2, 3, over="B"), ra, atol=1e-14)
    np.testing.assert_allclose(partial_trace(joint, 2, 3, over="A"), rb, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_partial_trace_of_operator_product(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    np.testing.assert_allclose(partial_trace(tensor_product(a, b), 3, 2, over="A"), np.trace(a) * b, atol=1e-13)


def test_partial_trace_preserves_trace(rng):
    rho = random_density(rng, 6)
    assert np.trace(partial_trace(rho, 2, 3)).real == pytest.approx(1.0, abs=1e-14)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), 2, 3)
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), 2, 2, over="C")


def test_eig_pauli_z():
    w, v = hermitian_eig(Z)
    np.testing.assert_array_equal(w, [1.0, -1.0])


def test_eig_clifford_combination():
    w, _ = hermitian_eig((X + Z) / np.sqrt(2))
    np.testing.assert_allclose(w, [1.0, -1.0], atol=1e-15)


def test_eig_chsh_uncertainty_operator():
    q = 0.5 * (projector(KET0) + projector(KETP))
    w, v = hermitian_eig(q)
    assert w[0] == pytest.approx(0.5 + 1 / (2 * np.sqrt(2)), abs=1e-14)
    # top eigenvector is the +1 eigenvector of (X + Z)/sqrt(2)
    top = projector(v[:, 0])
    np.testing.assert_allclose(top, (np.eye(2) + (X + Z) / np.sqrt(2)) / 2, atol=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 7, 16, 32])
def test_eig_matches_lapack_oracle(d):
    rng = np.random.default_rng(d)
    h = random_hermitian(rng, d)
    w, v = hermitian_eig(h)
    scale = np.max(np.abs(h))
    np.testing.assert_allclose(w, np.linalg.eigvalsh(h)[::-1], atol=1e-12 * scale * d)
    assert np.all(np.diff(w) <= 0)
    assert np.max(np.abs(h @ v - v * w)) <= 1e-9 * scale
    assert np.max(np.abs(v.conj().T @ v - np.eye(d))) <= 1e-9
    assert np.max(np.abs((v * w) @ v.conj().T - h)) <= 1e-9 * scale


def test_eig_degenerate_cluster_projector():
    rng = np.random.default_rng(3)
    u, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    h = u @ np.diag([2.0, 2.0, -1.0, 0.5]) @ u.conj().T
    w, v = hermitian_eig(h)
    np.testing.assert_allclose(w, [2.0, 2.0, 0.5, -1.0], atol=1e-12)
    top = v[:, :2] @ v[:, :2].conj().T
    np.testing.assert_allclose(top, u[:, :2] @ u[:, :2].conj().T, atol=1e-12)


def test_eig_deterministic_bytes():
    rng = np.random.default_rng(11)
    h = random_hermitian(rng, 12)
    w1, v1 = hermitian_eig(h.copy())
    w2, v2 = hermitian_eig(h.copy())
    assert w1.tobytes() == w2.tobytes()
    assert v1.tobytes() == v2.tobytes()


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NotHermitianError):
        hermitian_eig(np.ones((2, 3)))


def test_eig_zero_matrix():
    w, v = hermitian_eig(np.zeros((3, 3)))
    np.testing.assert_array_equal(w, 0.0)
    np.testing.assert_array_equal(v, np.eye(3))


def test_validate_density_accepts_maximally_mixed():
    rho = validate_density(np.eye(2) / 2)
    assert not rho.flags.writeable


def test_validate_density_reports_positivity():
    # unit trace, but one negative eigenvalue
    with pytest.raises(DensityMatrixError) as info:
        validate_density(np.diag([2.0, -1.0]))
    assert set(info.value.failures) == {"positivity"}
    assert info.value.failures["positivity"] == pytest.approx(1.0)


def test_validate_density_reports_every_failure():
    with pytest.raises(DensityMatrixError) as info:
        validate_density(np.diag([1.0, -0.5]))
    assert set(info.value.failures) == {"trace", "positivity"}


def test_validate_density_trace_violation_magnitude():
    with pytest.raises(DensityMatrixError) as info:
        validate_density(np.diag([0.7, 0.7]))
    assert info.value.failures == {"trace": pytest.approx(0.4)}


def test_validate_density_hermiticity():
    with pytest.raises(DensityMatrixError) as info:
        validate_density(np.array([[0.5, 0.1], [0.0, 0.5]]))
    assert "hermiticity" in info.value.failures


def test_validate_density_clifford_state():
    r = np.ones(3) / np.sqrt(3)
    rho = validate_density(clifford_state(r))
    w, _ = hermitian_eig(rho)
    assert w[-1] >= -1e-10
    np.testing.assert_allclose(w, [1.0, 0.0], atol=1e-14)


def test_validate_density_rejects_nan():
    with pytest.raises(DensityMatrixError):
        validate_density(np.array([[np.nan, 0], [0, 1]]))


def test_pauli_algebra_sanity():
    np.testing.assert_allclose(X @ Y, 1j * Z)
