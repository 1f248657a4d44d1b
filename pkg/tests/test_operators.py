import numpy as np
import pytest

from qmarket.errors import InternalConsistencyError, ValidationError
from qmarket.operators import (
    I2,
    SX,
    SY,
    SZ,
    apply_function,
    as_hermitian,
    herm_to_vec,
    hs_inner,
    min_eigenvalue,
    pauli_operator,
    spectral_decompose,
    tensor_product,
    vec_to_herm,
)

from conftest import random_hermitian


def test_as_hermitian_rejects_nonhermitian():
    with pytest.raises(ValidationError):
        as_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_as_hermitian_symmetrizes_small_noise():
    m = np.eye(2) + 1e-14 * np.array([[0, 1], [0, 0]])
    h = as_hermitian(m)
    assert np.abs(h - h.conj().T).max() == 0.0


def test_dimension_cap():
    with pytest.raises(ValidationError):
        as_hermitian(np.eye(65))


def test_spectral_sigma_z():
    res = spectral_decompose(SZ)
    assert res.eigenvalues == (-1.0, 1.0)
    np.testing.assert_allclose(res.projections[0], np.diag([0.0, 1.0]), atol=1e-12)
    np.testing.assert_allclose(res.projections[1], np.diag([1.0, 0.0]), atol=1e-12)


def test_spectral_rate_operator():
    # 0.05 I + 0.15 sx has spectrum x0 -/+ |x|
    res = spectral_decompose(pauli_operator(0.05, 0.15, 0.0, 0.0))
    np.testing.assert_allclose(res.eigenvalues, [-0.1, 0.2], atol=1e-12)


def test_spectral_identity_clustering():
    res = spectral_decompose(np.eye(3, dtype=complex), cluster_tol=1e-8)
    assert res.eigenvalues == (1.0,)
    np.testing.assert_allclose(res.projections[0], np.eye(3), atol=1e-12)


def test_spectral_reconstruction_random(rng):
    for dim in (2, 5, 16):
        x = random_hermitian(rng, dim)
        res = spectral_decompose(x)
        assert np.linalg.norm(res.reconstruct() - x) <= 1e-9 * np.linalg.norm(x)
        for i, ei in enumerate(res.projections):
            assert np.abs(ei @ ei - ei).max() <= 1e-10
            for j, ej in enumerate(res.projections):
                if i != j:
                    assert np.linalg.norm(ei @ ej) <= 1e-9
        total = sum(res.projections)
        np.testing.assert_allclose(total, np.eye(dim), atol=1e-10)


def test_apply_function_identity(rng):
    x = random_hermitian(rng, 4)
    np.testing.assert_allclose(apply_function(x, lambda s: s), x, atol=1e-9)


def test_apply_function_call_payoff_diagonal():
    x = np.diag([90.0, 120.0]).astype(complex)
    out = apply_function(x, lambda s: max(s - 100.0, 0.0))
    np.testing.assert_allclose(out, np.diag([0.0, 20.0]), atol=1e-9)


def test_apply_function_two_period_tensor_payoff():
    # terminal asset of the 2-period market: spectrum {81, 108, 144}
    a = pauli_operator(0.05, 0.15, 0.0, 0.0)
    s2 = 100.0 * np.kron(I2 + a, I2 + a)
    payoff = apply_function(s2, lambda s: max(s - 100.0, 0.0))
    vals = np.linalg.eigvalsh(payoff)
    np.testing.assert_allclose(sorted(set(np.round(vals, 6))), [0.0, 8.0, 44.0], atol=1e-9)


def test_apply_function_nonfinite_rejected():
    with pytest.raises(ValidationError):
        apply_function(np.diag([0.0, 1.0]).astype(complex), lambda s: 1.0 / s if s else np.inf)


def test_apply_function_composition(rng):
    x = random_hermitian(rng, 5)
    h = lambda s: s + 3.0
    g = lambda s: s * s
    left = apply_function(x, lambda s: g(h(s)))
    right = apply_function(apply_function(x, h), g)
    assert np.linalg.norm(left - right) <= 1e-8 * max(1.0, np.linalg.norm(left))


def test_tensor_identities():
    np.testing.assert_allclose(tensor_product(I2, I2), np.eye(4))
    np.testing.assert_allclose(tensor_product(SZ, I2), np.diag([1.0, 1.0, -1.0, -1.0]))


def test_tensor_trace_multiplicative(rng):
    a = random_hermitian(rng, 3)
    b = random_hermitian(rng, 4)
    assert np.isclose(np.trace(tensor_product(a, b)), np.trace(a) * np.trace(b))


def test_tensor_associative(rng):
    a = random_hermitian(rng, 2)
    b = random_hermitian(rng, 2)
    c = random_hermitian(rng, 3)
    left = tensor_product(tensor_product(a, b), c)
    right = tensor_product(a, tensor_product(b, c))
    np.testing.assert_allclose(left, right, rtol=1e-15, atol=1e-15)


def test_tensor_cap():
    with pytest.raises(ValidationError):
        tensor_product(np.eye(16), np.eye(8))


def test_hs_inner_values():
    assert hs_inner(I2, I2) == pytest.approx(2.0)
    assert hs_inner(SX, SY) == pytest.approx(0.0, abs=1e-12)
    assert hs_inner(SX, SX) == pytest.approx(2.0)


def test_hs_inner_is_inner_product(rng):
    a = random_hermitian(rng, 4)
    b = random_hermitian(rng, 4)
    assert hs_inner(a, b) == pytest.approx(hs_inner(b, a))
    assert hs_inner(a, a) > 0.0


def test_hs_inner_imag_residue_rejected():
    # non-Hermitian pair with genuinely complex trace
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    b = np.array([[0, 0], [1j, 0]], dtype=complex)
    with pytest.raises(InternalConsistencyError):
        hs_inner(a, b)


def test_min_eigenvalue():
    assert min_eigenvalue(np.eye(3)) == pytest.approx(1.0)
    assert min_eigenvalue(SX) == pytest.approx(-1.0)
    u = np.array([1.0, 1.0]) / np.sqrt(2)
    assert min_eigenvalue(np.outer(u, u)) == pytest.approx(0.0, abs=1e-12)


def test_herm_vec_isometry(rng):
    for dim in (2, 3, 7):
        a = random_hermitian(rng, dim)
        b = random_hermitian(rng, dim)
        va, vb = herm_to_vec(a), herm_to_vec(b)
        assert float(va @ vb) == pytest.approx(hs_inner(a, b))
        np.testing.assert_allclose(vec_to_herm(va, dim), a, atol=1e-12)
