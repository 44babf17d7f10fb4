"""Dense complex linear algebra: Hermitian matrices, spectra and a Jacobi eigensolver.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. ``HermitianMatrix`` wraps
such an array after checking it against its adjoint, and stores the exactly symmetrized
form so that ``M == M*`` holds bit for bit afterwards.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from majlab.exceptions import ConvergenceError, DimensionError, HermitianError
from majlab.util import DEFAULT_TOLERANCES, Tolerances

L = logging.getLogger(__name__)

# rotations on smaller entries would divide by a subnormal
_TINY = float(np.finfo(float).tiny)

ComplexMatrix = np.ndarray
MatrixLike = Union["HermitianMatrix", np.ndarray, Sequence[Sequence[complex]]]


def as_complex_matrix(data: MatrixLike) -> ComplexMatrix:
    """Square complex array from ``data``.

    Raises:
        DimensionError: if ``data`` is not a non-empty square matrix
        ValueError: if an entry is NaN or infinite
    """
    if isinstance(data, HermitianMatrix):
        return data.matrix
    matrix = np.array(data, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise DimensionError(f"Expected a non-empty square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Matrix entries must be finite")
    return matrix


def _check_same_dim(a: ComplexMatrix, b: ComplexMatrix):
    if a.shape != b.shape:
        raise DimensionError(f"Dimension mismatch: {a.shape} vs {b.shape}")


def frobenius(a: MatrixLike) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(as_complex_matrix(a)))


class HermitianMatrix:
    """Complex square matrix equal to its adjoint.

    Args:
        data: square matrix within ``tolerances.hermitian_tol`` of its adjoint
        tolerances: tolerance record

    Raises:
        HermitianError: if ``||M - M*||_F > hermitian_tol * (1 + ||M||_F)``
    """

    __slots__ = ("_matrix",)

    def __init__(self, data: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES):
        matrix = as_complex_matrix(data)
        skew = float(np.linalg.norm(matrix - matrix.conj().T))
        scale = 1.0 + float(np.linalg.norm(matrix))
        if skew > tolerances.hermitian_tol * scale:
            raise HermitianError(
                f"Matrix is not Hermitian: ||M - M*||_F = {skew:.3e} exceeds "
                f"{tolerances.hermitian_tol:.1e} * {scale:.3e}"
            )
        matrix = (matrix + matrix.conj().T) / 2
        matrix.setflags(write=False)
        self._matrix = matrix

    @property
    def matrix(self) -> ComplexMatrix:
        """Read-only ``complex128`` array."""
        return self._matrix

    @property
    def dim(self) -> int:
        """Matrix size ``n``."""
        return int(self._matrix.shape[0])

    def __repr__(self):
        return f"HermitianMatrix(dim={self.dim})"

    def __eq__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        return bool(np.array_equal(self._matrix, other._matrix))

    __hash__ = None  # type: ignore


def as_hermitian(data: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES) -> HermitianMatrix:
    """``data`` itself if already Hermitian, otherwise a checked ``HermitianMatrix``."""
    if isinstance(data, HermitianMatrix):
        return data
    return HermitianMatrix(data, tolerances)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Real values sorted nonincreasing.

    Args:
        values: sorted values
        nonnegative: whether the spectrum holds singular values
    """

    values: np.ndarray
    nonnegative: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise DimensionError(f"Spectrum must be a vector, got shape {values.shape}")
        if np.any(np.diff(values) > 0):
            raise ValueError(f"Spectrum must be sorted nonincreasing: {values}")
        if self.nonnegative and values.size and values[-1] < 0:
            raise ValueError(f"Singular values must be nonnegative: {values}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_unsorted(cls, values, nonnegative: bool = False) -> "Spectrum":
        """Stable nonincreasing sort; exact ties keep their input order."""
        values = np.asarray(values, dtype=float)
        return cls(values[np.argsort(-values, kind="stable")], nonnegative)

    def __len__(self):
        return int(self.values.size)

    def __iter__(self):
        return iter(self.values.tolist())

    def __getitem__(self, index):
        return self.values[index]


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Spectrum with orthonormal eigenvectors as columns, in the same order."""

    spectrum: Spectrum
    vectors: ComplexMatrix

    def reconstruct(self) -> ComplexMatrix:
        """``V diag(lambda) V*``."""
        return (self.vectors * self.spectrum.values) @ self.vectors.conj().T


def matmul(a: MatrixLike, b: MatrixLike) -> ComplexMatrix:
    """Dense product ``a @ b``.

    Raises:
        DimensionError: if the dimensions differ
    """
    a, b = as_complex_matrix(a), as_complex_matrix(b)
    _check_same_dim(a, b)
    return a @ b


def adjoint(a: MatrixLike) -> ComplexMatrix:
    """Conjugate transpose."""
    return as_complex_matrix(a).conj().T.copy()


def re_part(y: MatrixLike) -> HermitianMatrix:
    """Hermitian part ``(Y + Y*) / 2``."""
    y = as_complex_matrix(y)
    return HermitianMatrix((y + y.conj().T) / 2)


def commutator(x: MatrixLike, y: MatrixLike) -> ComplexMatrix:
    """``[x, y] = xy - yx``."""
    x, y = as_complex_matrix(x), as_complex_matrix(y)
    _check_same_dim(x, y)
    return x @ y - y @ x


def anticommutator(x: MatrixLike, y: MatrixLike) -> ComplexMatrix:
    """``{x, y} = xy + yx``."""
    x, y = as_complex_matrix(x), as_complex_matrix(y)
    _check_same_dim(x, y)
    return x @ y + y @ x


def ad_power(x: MatrixLike, y: MatrixLike, m: int) -> ComplexMatrix:
    """``ad_x^m(y)``: the commutator with ``x`` applied ``m`` times (``m = 0`` returns ``y``)."""
    if m < 0:
        raise ValueError(f"ad power must be nonnegative, got {m}")
    x, result = as_complex_matrix(x), as_complex_matrix(y)
    _check_same_dim(x, result)
    for _ in range(m):
        result = x @ result - result @ x
    return result


def _off_diagonal_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _rotation(a: np.ndarray, p: int, q: int) -> np.ndarray:
    """Unitary 2x2 block ``G`` with ``(G* A G)[p, q] = 0`` on the ``(p, q)`` plane.

    The phase of ``a[p, q]`` is moved to the second basis vector, which leaves a real
    symmetric 2x2 problem solved by the classical symmetric Schur rotation.
    """
    apq = a[p, q]
    r = abs(apq)
    phase = apq / r
    tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
    if tau == 0.0:
        t = 1.0
    else:
        t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
    c = 1.0 / math.hypot(1.0, t)
    s = t * c
    return np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])


def hermitian_eig(
    m: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Sweeps visit every pair ``p < q`` in row order. Iteration stops once the off-diagonal
    Frobenius norm is at most ``eig_offdiag_tol * ||M||_F``.

    Args:
        m: Hermitian matrix
        tolerances: tolerance record

    Returns:
        eigenvalues sorted nonincreasing (stable for exact ties) and matching eigenvectors

    Raises:
        ConvergenceError: if ``max_sweeps`` sweeps do not reach the threshold, or the
            reconstruction misses ``M`` by more than ``eig_tol * (1 + ||M||_F)``
    """
    original = as_hermitian(m, tolerances).matrix
    a = np.array(original)
    n = a.shape[0]
    vectors = np.eye(n, dtype=complex)
    norm = float(np.linalg.norm(a))
    threshold = tolerances.eig_offdiag_tol * norm
    pair = [0, 0]
    sweep = 0
    while _off_diagonal_norm(a) > threshold:
        if sweep == tolerances.max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {sweep} sweeps "
                f"(off-diagonal norm {_off_diagonal_norm(a):.3e}, threshold {threshold:.3e})"
            )
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < _TINY:
                    a[p, q] = a[q, p] = 0.0
                    continue
                g = _rotation(a, p, q)
                pair[0], pair[1] = p, q
                a[:, pair] = a[:, pair] @ g
                a[pair, :] = g.conj().T @ a[pair, :]
                a[p, q] = a[q, p] = 0.0
                vectors[:, pair] = vectors[:, pair] @ g
    L.debug("Jacobi converged after %d sweeps for n=%d", sweep, n)
    values = np.diag(a).real
    order = np.argsort(-values, kind="stable")
    decomposition = EigenDecomposition(Spectrum(values[order]), vectors[:, order])
    residual = float(np.linalg.norm(decomposition.reconstruct() - original))
    if residual > tolerances.eig_tol * (1.0 + norm):
        raise ConvergenceError(
            f"Eigendecomposition residual {residual:.3e} exceeds "
            f"{tolerances.eig_tol:.1e} * (1 + ||M||_F)"
        )
    return decomposition


def eigvals(m: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Spectrum:
    """``lambda(M)``."""
    return hermitian_eig(m, tolerances).spectrum


def singular_values(y: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Spectrum:
    """``sigma(Y)`` from the eigenvalues of ``Y* Y``, negative roundoff clamped to zero."""
    y = as_complex_matrix(y)
    gram = HermitianMatrix(y.conj().T @ y, tolerances)
    values = hermitian_eig(gram, tolerances).spectrum.values
    return Spectrum(np.sqrt(np.clip(values, 0.0, None)), nonnegative=True)


def hermitian_function(
    m: MatrixLike,
    fn: Callable[[np.ndarray], np.ndarray],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> HermitianMatrix:
    """``f(M) = V diag(f(lambda)) V*`` for a real function ``fn`` applied elementwise."""
    decomposition = hermitian_eig(m, tolerances)
    values = np.asarray(fn(decomposition.spectrum.values), dtype=float)
    vectors = decomposition.vectors
    return HermitianMatrix((vectors * values) @ vectors.conj().T, tolerances)


def expm_hermitian(m: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES) -> HermitianMatrix:
    """``e^M`` through the eigendecomposition of ``M``."""
    return hermitian_function(m, np.exp, tolerances)


def matrix_power(m: MatrixLike, k: int) -> ComplexMatrix:
    """``M^k`` by repeated multiplication (``k = 0`` gives the identity)."""
    if k < 0:
        raise ValueError(f"Power must be nonnegative, got {k}")
    m = as_complex_matrix(m)
    result = np.eye(m.shape[0], dtype=complex)
    for _ in range(k):
        result = result @ m
    return result


def hermitian_power(m: MatrixLike, k: int) -> HermitianMatrix:
    """``H^k`` of a Hermitian ``H``; the iterated product is symmetrized on return."""
    return HermitianMatrix(matrix_power(as_hermitian(m), k))
