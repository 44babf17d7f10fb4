import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from utils import SIGMA_X, SIGMA_Z, cases, hermitian

from majlab.ensemble import random_complex, random_unitary, stream
from majlab.exceptions import ConvergenceError, DimensionError, HermitianError
from majlab.linalg import (
    HermitianMatrix,
    Spectrum,
    ad_power,
    adjoint,
    anticommutator,
    commutator,
    eigvals,
    expm_hermitian,
    hermitian_eig,
    hermitian_function,
    hermitian_power,
    matmul,
    matrix_power,
    re_part,
    singular_values,
)
from majlab.util import Tolerances


def test_matmul():
    m = np.array([[1, 2j], [3, 4]])
    np.testing.assert_array_equal(matmul(np.eye(2), m), m)
    np.testing.assert_array_equal(matmul(m, np.zeros((2, 2))), np.zeros((2, 2)))
    np.testing.assert_array_equal(matmul(SIGMA_X, SIGMA_Z), [[0, -1], [1, 0]])


def test_matmul_dimension_mismatch():
    with pytest.raises(DimensionError):
        matmul(np.eye(2), np.eye(3))


def test_rejects_malformed():
    with pytest.raises(DimensionError):
        HermitianMatrix(np.zeros((2, 3)))
    with pytest.raises(ValueError, match="finite"):
        HermitianMatrix([[np.nan, 0], [0, 1]])


def test_adjoint():
    np.testing.assert_array_equal(adjoint(SIGMA_X), SIGMA_X)
    np.testing.assert_array_equal(adjoint([[0, 1], [0, 0]]), [[0, 0], [1, 0]])
    np.testing.assert_array_equal(adjoint([[0, 1j], [0, 0]]), [[0, 0], [-1j, 0]])


def test_hermitian_construction():
    m = hermitian(0, 4)
    nudged = m + 1e-14 * np.triu(np.ones((4, 4)), 1)
    h = HermitianMatrix(nudged)
    np.testing.assert_array_equal(h.matrix, h.matrix.conj().T)
    assert not h.matrix.flags.writeable

    with pytest.raises(HermitianError):
        HermitianMatrix([[0, 1], [0, 0]])


def test_re_part():
    np.testing.assert_array_equal(re_part(SIGMA_X).matrix, SIGMA_X)
    k = np.array([[1j, 2], [-2, 0]])
    np.testing.assert_array_equal(re_part(k).matrix, np.zeros((2, 2)))
    np.testing.assert_array_equal(re_part([[0, 2], [0, 0]]).matrix, [[0, 1], [1, 0]])


def test_spectrum_order():
    with pytest.raises(ValueError, match="nonincreasing"):
        Spectrum(np.array([1.0, 2.0]))
    assert list(Spectrum.from_unsorted([1.0, 3.0, -2.0])) == [3.0, 1.0, -2.0]
    with pytest.raises(ValueError, match="nonnegative"):
        Spectrum(np.array([1.0, -1.0]), nonnegative=True)


def test_eig_small_cases():
    assert list(eigvals(np.diag([1.0, 5.0, -2.0]))) == [5.0, 1.0, -2.0]
    np.testing.assert_allclose(eigvals(SIGMA_X).values, [1.0, -1.0], atol=1e-15)


@pytest.mark.parametrize("n,trial", cases(trials=8))
def test_eig_invariants(n, trial):
    m = hermitian(11, n, trial)
    decomposition = hermitian_eig(m)
    v, values = decomposition.vectors, decomposition.spectrum.values
    norm = np.linalg.norm(m)

    assert np.all(np.diff(values) <= 0)
    assert np.linalg.norm(m @ v - v * values) <= 1e-10 * norm
    assert np.linalg.norm(v.conj().T @ v - np.eye(n)) <= 1e-10
    assert np.linalg.norm(decomposition.reconstruct() - m) <= 1e-10 * (1 + norm)
    np.testing.assert_allclose(values, np.linalg.eigvalsh(m)[::-1], atol=1e-10)


@pytest.mark.parametrize("n,trial", cases(dims=range(2, 5), trials=10))
def test_eig_characteristic_polynomial(n, trial):
    m = hermitian(12, n, trial)
    roots = np.sort(np.roots(np.poly(m)).real)[::-1]
    # quartic root finding is itself only accurate to about 1e-9
    atol = 1e-10 if n <= 3 else 1e-8
    np.testing.assert_allclose(eigvals(m).values, roots, atol=atol)


def test_eig_degenerate():
    u = random_unitary(stream(3, 0), 4)
    m = (u * np.array([2.0, 2.0, -1.0, -1.0])) @ u.conj().T
    np.testing.assert_allclose(eigvals(m).values, [2.0, 2.0, -1.0, -1.0], atol=1e-12)


def test_eig_no_convergence():
    with pytest.raises(ConvergenceError):
        hermitian_eig(SIGMA_X, Tolerances(max_sweeps=0))


@seed(1)
@settings(max_examples=50, deadline=None)
@given(
    entries=arrays(
        np.float64,
        (2, 5, 5),
        elements=st.floats(min_value=-10, max_value=10, allow_subnormal=False),
    )
)
def test_eig_reconstruction_hypothesis(entries):
    g = entries[0] + 1j * entries[1]
    m = (g + g.conj().T) / 2
    decomposition = hermitian_eig(m)
    assert np.linalg.norm(decomposition.reconstruct() - m) <= 1e-10 * (1 + np.linalg.norm(m))


def test_singular_values_small_cases():
    u = random_unitary(stream(4, 0), 3)
    np.testing.assert_allclose(singular_values(u).values, np.ones(3), atol=1e-7)
    np.testing.assert_allclose(singular_values(np.diag([3.0, -4.0])).values, [4.0, 3.0])
    np.testing.assert_allclose(singular_values([[0, 2], [0, 0]]).values, [2.0, 0.0])


@pytest.mark.parametrize("n,trial", cases(trials=4))
def test_singular_values_of_hermitian(n, trial):
    m = hermitian(13, n, trial)
    expected = np.sort(np.abs(eigvals(m).values))[::-1]
    np.testing.assert_allclose(singular_values(m).values, expected, atol=1e-7)


@pytest.mark.parametrize("n,trial", cases(trials=10))
def test_fan_hoffman(n, trial):
    y = random_complex(stream(14, n, trial), n)
    assert np.all(eigvals(re_part(y)).values <= singular_values(y).values + 1e-10)


def test_commutator_primitives():
    np.testing.assert_array_equal(commutator(SIGMA_X, SIGMA_Z), [[0, -2], [2, 0]])
    np.testing.assert_array_equal(anticommutator(SIGMA_X, SIGMA_Z), np.zeros((2, 2)))
    np.testing.assert_array_equal(ad_power(SIGMA_X, SIGMA_Z, 0), SIGMA_Z)
    np.testing.assert_array_equal(ad_power(SIGMA_X, SIGMA_Z, 2), 4 * SIGMA_Z)


@pytest.mark.parametrize("n", range(2, 7))
def test_expm_against_scipy(n):
    m = hermitian(15, n)
    np.testing.assert_allclose(expm_hermitian(m).matrix, scipy.linalg.expm(m), atol=1e-10)
    np.testing.assert_allclose(
        eigvals(expm_hermitian(m)).values, np.exp(eigvals(m).values), atol=1e-10
    )


def test_hermitian_function_and_powers():
    m = hermitian(16, 4)
    np.testing.assert_allclose(hermitian_function(m, lambda x: x**3).matrix, m @ m @ m, atol=1e-12)
    np.testing.assert_allclose(hermitian_power(m, 3).matrix, m @ m @ m, atol=1e-14)
    np.testing.assert_array_equal(matrix_power(m, 0), np.eye(4))


def test_eig_small_off_diagonal():
    m = np.diag([2.0, 1.0, -1.5]).astype(complex)
    m[0, 1] = m[1, 0] = 1e-9
    decomposition = hermitian_eig(m)
    assert np.linalg.norm(decomposition.reconstruct() - m) <= 1e-14
    np.testing.assert_allclose(
        decomposition.spectrum.values, np.linalg.eigvalsh(m)[::-1], atol=1e-14
    )


@pytest.mark.parametrize("trial", range(40))
def test_eig_dimension_six(trial):
    m = hermitian(17, 6, trial)
    decomposition = hermitian_eig(m)
    assert np.linalg.norm(decomposition.reconstruct() - m) <= 1e-10 * np.linalg.norm(m)
    np.testing.assert_allclose(
        decomposition.spectrum.values, np.linalg.eigvalsh(m)[::-1], atol=1e-10
    )


def test_eig_residual_check():
    with pytest.raises(ConvergenceError, match="residual"):
        hermitian_eig(hermitian(18, 4), Tolerances(eig_offdiag_tol=1.0, eig_tol=1e-12))
