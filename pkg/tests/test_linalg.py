import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from qbclab.errors import DimensionError, NormalizationError, NotHermitianError
from qbclab.linalg import (
    DensityMatrix,
    StateVector,
    SubsystemShape,
    hermitian_eig,
    inner_product,
    operator_sqrt,
    operator_sqrt_inv,
    partial_trace,
    reduced_from_pure,
    tensor_product,
    trace_distance,
)
from qbclab.states import omega, phi_minus, phi_plus, rho_minus, rho_plus

from conftest import random_unitary


def test_inner_product_examples():
    assert inner_product(phi_plus(5, 1), phi_plus(5, 1)) == pytest.approx(1.0)
    for n in (2, 3, 9):
        assert abs(inner_product(phi_plus(n, 1), phi_minus(n, 1))) < 1e-15
    # hand expansion: (1/2)(<0|+<1|)(|0>-|2>) = 1/2
    assert inner_product(phi_plus(3, 1), phi_minus(3, 2)) == pytest.approx(0.5, abs=1e-15)


def test_inner_product_is_conjugate_linear_in_first_argument():
    a = StateVector([1j, 0])
    b = StateVector([1, 0])
    assert inner_product(a, b) == pytest.approx(-1j)


def test_inner_product_dimension_mismatch():
    with pytest.raises(DimensionError):
        inner_product(StateVector.basis(2, 0), StateVector.basis(3, 0))


def test_tensor_product_basis_and_index_arithmetic():
    assert tensor_product(StateVector.basis(2, 0), StateVector.basis(3, 0)).allclose(StateVector.basis(6, 0))
    a = StateVector([1 / math.sqrt(2), 1 / math.sqrt(2)])
    b = StateVector.basis(4, 1)
    out = tensor_product(a, b).amps
    expected = np.zeros(8)
    expected[[1, 4 + 1]] = 1 / math.sqrt(2)
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_tensor_product_sparse_matches_dense():
    sp = tensor_product(phi_plus(5, 2), phi_minus(4, 3))
    dense = np.kron(phi_plus(5, 2).amps, phi_minus(4, 3).amps)
    np.testing.assert_allclose(sp.amps, dense, atol=1e-15)


@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False), min_size=2, max_size=5),
       st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False), min_size=2, max_size=5))
def test_tensor_norm_is_multiplicative(x, y):
    a, b = StateVector(x), StateVector(y)
    assert tensor_product(a, b).norm() == pytest.approx(a.norm() * b.norm(), rel=1e-9, abs=1e-12)


def test_partial_trace_product_state(rng):
    ra = DensityMatrix(np.diag([0.3, 0.7]))
    rb = phi_plus(3, 2).density()
    joint = tensor_product(ra, rb)
    out = partial_trace(joint, SubsystemShape([2, 3]), keep=1)
    np.testing.assert_allclose(out.matrix, rb.matrix, atol=1e-14)
    assert out.trace() == pytest.approx(1.0, abs=1e-10)


def test_partial_trace_of_omega_is_rho_plus():
    # brute force: sum over alpha index of the 3x3 blocks of the 9x9 projector
    w = omega(3).amps
    big = np.outer(w, w.conj()).reshape(3, 3, 3, 3)
    oracle = sum(big[a, :, a, :] for a in range(3))
    got = partial_trace(omega(3).density(), SubsystemShape([3, 3]), keep=1).matrix
    np.testing.assert_allclose(got, oracle, atol=1e-14)
    np.testing.assert_allclose(got, rho_plus(3).matrix, atol=1e-14)
    np.testing.assert_allclose(reduced_from_pure(omega(3), SubsystemShape([3, 3]), 1).matrix, got, atol=1e-14)


def test_hermitian_eig_examples():
    vals, vecs = hermitian_eig(np.eye(4))
    np.testing.assert_allclose(vals, 1.0)
    vals, _ = hermitian_eig(np.array([[0, 1], [1, 0]]))
    np.testing.assert_allclose(sorted(vals), [-1, 1], atol=1e-15)
    vals, _ = hermitian_eig(rho_plus(5).matrix - rho_minus(5).matrix)
    nz = sorted(v for v in vals if abs(v) > 1e-12)
    np.testing.assert_allclose(nz, [-0.5, 0.5], atol=1e-12)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_hermitian_eig_reconstructs(rng):
    u = random_unitary(6, rng)
    op = u @ np.diag(rng.normal(size=6)) @ u.conj().T
    vals, vecs = hermitian_eig(op)
    rebuilt = sum(v * np.outer(x.amps, x.amps.conj()) for v, x in zip(vals, vecs))
    np.testing.assert_allclose(rebuilt, op, atol=1e-12)


def test_trace_distance_examples():
    assert trace_distance(rho_plus(4), rho_plus(4)) == pytest.approx(0.0, abs=1e-14)
    assert trace_distance(StateVector.basis(3, 0).density(), StateVector.basis(3, 2).density()) == pytest.approx(1.0)
    assert trace_distance(rho_plus(5), rho_minus(5)) == pytest.approx(0.5, abs=1e-12)


def test_trace_distance_matches_scipy_oracle(rng):
    for _ in range(5):
        u = random_unitary(5, rng)
        p = rng.dirichlet(np.ones(5))
        q = rng.dirichlet(np.ones(5))
        r1 = DensityMatrix(np.diag(p))
        r2 = DensityMatrix(u @ np.diag(q) @ u.conj().T)
        oracle = 0.5 * np.sum(scipy.linalg.svdvals(r1.matrix - r2.matrix))
        assert trace_distance(r1, r2) == pytest.approx(oracle, abs=1e-12)


def test_operator_sqrt_inv_examples():
    np.testing.assert_allclose(operator_sqrt_inv(np.eye(3)), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(operator_sqrt_inv(np.diag([4.0, 0.0]), cutoff=1e-12), np.diag([0.5, 0.0]), atol=1e-15)
    rho = rho_plus(3).matrix
    m = operator_sqrt_inv(rho)
    support = m @ rho @ m
    np.testing.assert_allclose(support @ support, support, atol=1e-12)
    assert np.trace(support).real == pytest.approx(np.linalg.matrix_rank(rho))


def test_operator_sqrt_matches_scipy(rng):
    u = random_unitary(4, rng)
    op = u @ np.diag([0.1, 0.2, 0.3, 0.4]) @ u.conj().T
    np.testing.assert_allclose(operator_sqrt(op), scipy.linalg.sqrtm(op), atol=1e-10)


def test_state_vector_validation():
    with pytest.raises(NormalizationError):
        StateVector([0, 0]).normalized()
    with pytest.raises(DimensionError):
        StateVector.basis(3, 3)
    s = StateVector.from_sparse(10, {2: 1.0})
    assert s.is_sparse and s.dim == 10 and s.amps[2] == 1.0
    with pytest.raises(ValueError):
        s.amps[0] = 5  # read-only view


def test_density_matrix_rejects_bad_input():
    with pytest.raises(NotHermitianError):
        DensityMatrix(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(Exception):
        DensityMatrix(np.diag([0.3, 0.3]))  # trace 0.6


def test_equal_up_to_phase():
    a = phi_plus(4, 2)
    assert a.equal_up_to_phase(StateVector(np.exp(0.7j) * a.amps))
    assert not a.equal_up_to_phase(phi_minus(4, 2))
