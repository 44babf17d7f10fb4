"""Majorization comparators, Ky Fan sums, spectral projections and double commutators."""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple, Union

import numpy as np

from majlab.exceptions import DimensionError, PreconditionError
from majlab.linalg import (
    HermitianMatrix,
    MatrixLike,
    Spectrum,
    as_complex_matrix,
    as_hermitian,
    commutator,
    eigvals,
    expm_hermitian,
    hermitian_eig,
)
from majlab.util import DEFAULT_TOLERANCES, Tolerances

L = logging.getLogger(__name__)

SpectrumLike = Union[Spectrum, Sequence[float], np.ndarray]


class Relation(str, Enum):
    """Majorization relations between nonincreasing vectors."""

    WEAK = "weak"
    STRONG = "strong"
    WEAK_LOG = "weak_log"
    LOG = "log"

    @property
    def is_log(self) -> bool:
        """Whether prefix products (sums of logs) are compared."""
        return self in (Relation.WEAK_LOG, Relation.LOG)

    @property
    def needs_equality(self) -> bool:
        """Whether the full sums (products) must agree."""
        return self in (Relation.STRONG, Relation.LOG)


@dataclass(frozen=True)
class MajorizationVerdict:
    """Outcome of ``check_majorization``.

    ``margin`` is the smallest prefix gap ``prefix_y(r) - prefix_x(r)``; for relations that
    require equality the last gap enters as ``-|gap|``. ``worst_r`` is 1-based.
    """

    relation: Relation
    holds: bool
    worst_r: int
    margin: float
    margins: Tuple[float, ...]
    tol: float

    def to_dict(self):
        """JSON-ready view."""
        return {
            "relation": self.relation.value,
            "holds": self.holds,
            "worst_r": self.worst_r,
            "margin": self.margin,
            "margins": list(self.margins),
            "tol": self.tol,
        }


def _as_spectrum(x: SpectrumLike) -> Spectrum:
    if isinstance(x, Spectrum):
        return x
    return Spectrum.from_unsorted(x)


def check_majorization(
    x: SpectrumLike,
    y: SpectrumLike,
    relation: Union[Relation, str] = Relation.WEAK,
    tol: float = DEFAULT_TOLERANCES.majorization_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> MajorizationVerdict:
    """Check ``x`` against ``y`` for ``relation``.

    Args:
        x: smaller side
        y: larger side
        relation: one of ``weak``, ``strong``, ``weak_log``, ``log``
        tol: slack on the prefix sums, or on the sums of logs for log relations
        tolerances: provides ``log_floor``

    Raises:
        DimensionError: if lengths differ
        PreconditionError: for negative entries under a log relation
    """
    relation = Relation(relation)
    x, y = _as_spectrum(x), _as_spectrum(y)
    if len(x) != len(y):
        raise DimensionError(f"Length mismatch: {len(x)} vs {len(y)}")
    xs, ys = x.values, y.values
    if relation.is_log:
        if np.any(xs < 0) or np.any(ys < 0):
            raise PreconditionError("Log majorization needs nonnegative entries")
        tiny = np.flatnonzero((xs < tolerances.log_floor) | (ys < tolerances.log_floor))
        if tiny.size:
            L.debug("Entry below log floor at index %d, log relation fails", tiny[0])
            return MajorizationVerdict(
                relation, False, int(tiny[0]) + 1, -math.inf, tuple(), float(tol)
            )
        xs, ys = np.log(xs), np.log(ys)
    gaps = np.cumsum(ys) - np.cumsum(xs)
    if relation.needs_equality and gaps.size:
        gaps[-1] = -abs(gaps[-1])
    if not gaps.size:
        return MajorizationVerdict(relation, True, 0, 0.0, tuple(), float(tol))
    worst = int(np.argmin(gaps))
    margin = float(gaps[worst])
    return MajorizationVerdict(
        relation, margin >= -tol, worst + 1, margin, tuple(gaps.tolist()), float(tol)
    )


def ky_fan_sum(x: SpectrumLike, r: int) -> float:
    """Sum of the ``r`` largest entries.

    Raises:
        PreconditionError: unless ``1 <= r <= n``
    """
    x = _as_spectrum(x)
    if not 1 <= r <= len(x):
        raise PreconditionError(f"r must be in [1, {len(x)}], got {r}")
    return float(np.sum(x.values[:r]))


class SpectralProjection:
    """Orthogonal projection of rank ``r``.

    Raises:
        PreconditionError: if the matrix is not idempotent or its trace is not ``r``
    """

    __slots__ = ("matrix", "rank")

    def __init__(
        self, matrix: MatrixLike, rank: int, tolerances: Tolerances = DEFAULT_TOLERANCES
    ):
        matrix = as_hermitian(matrix, tolerances)
        e = matrix.matrix
        idempotency = float(np.linalg.norm(e @ e - e))
        trace = float(np.trace(e).real)
        if idempotency > tolerances.proj_tol or abs(trace - rank) > tolerances.proj_tol:
            raise PreconditionError(
                f"Not a rank-{rank} projection: ||E^2 - E||_F = {idempotency:.3e}, Tr E = {trace}"
            )
        self.matrix = matrix
        self.rank = rank

    def __repr__(self):
        return f"SpectralProjection(dim={self.matrix.dim}, rank={self.rank})"


def top_projection(
    m: MatrixLike, r: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> SpectralProjection:
    """Projection onto the eigenvectors of the ``r`` largest eigenvalues of ``m``.

    Ties at the boundary are resolved by taking the first ``r`` columns after the stable
    sort, so the result is deterministic.
    """
    decomposition = hermitian_eig(m, tolerances)
    n = len(decomposition.spectrum)
    if not 1 <= r <= n:
        raise PreconditionError(f"r must be in [1, {n}], got {r}")
    v = decomposition.vectors[:, :r]
    return SpectralProjection(v @ v.conj().T, r, tolerances)


def double_comm_trace(
    e: SpectralProjection,
    x: MatrixLike,
    f: MatrixLike,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """``Tr(E [X, [X, F]])`` by direct matrix arithmetic.

    Raises:
        PreconditionError: if ``E`` does not attain the Ky Fan maximum of ``F``
    """
    f = as_hermitian(f, tolerances)
    x = as_hermitian(x, tolerances)
    attained = float(np.trace(e.matrix.matrix @ f.matrix).real)
    best = ky_fan_sum(eigvals(f, tolerances), e.rank)
    if abs(attained - best) > tolerances.proj_tol * (1.0 + abs(best)):
        raise PreconditionError(
            f"E is not a Ky Fan maximizer of F: Tr(EF) = {attained}, expected {best}"
        )
    inner = commutator(x, commutator(x, f))
    return float(np.trace(e.matrix.matrix @ inner).real)


def double_comm_trace_eigenbasis(
    x: MatrixLike, f: MatrixLike, r: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """``2 sum_{i <= r < j} (f_i - f_j) |x_ij|^2`` with ``X`` written in the eigenbasis of ``F``.

    Equals ``double_comm_trace(top_projection(F, r), X, F)``.
    """
    decomposition = hermitian_eig(f, tolerances)
    v = decomposition.vectors
    rotated = v.conj().T @ as_complex_matrix(x) @ v
    values = decomposition.spectrum.values
    gaps = values[:r, None] - values[None, r:]
    return float(2.0 * np.sum(gaps * np.abs(rotated[:r, r:]) ** 2))


def golden_thompson_check(
    a: MatrixLike, b: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> MajorizationVerdict:
    """``lambda(e^{A+B})`` log-majorized by the spectrum of ``e^{B/2} e^A e^{B/2}``.

    The symmetrized product is similar to ``e^A e^B`` and positive definite, so a Hermitian
    eigensolver suffices.
    """
    a, b = as_hermitian(a, tolerances), as_hermitian(b, tolerances)
    lhs = eigvals(expm_hermitian(a.matrix + b.matrix, tolerances), tolerances)
    half_b = expm_hermitian(b.matrix / 2, tolerances).matrix
    product = HermitianMatrix(half_b @ expm_hermitian(a, tolerances).matrix @ half_b, tolerances)
    rhs = eigvals(product, tolerances)
    return check_majorization(lhs, rhs, Relation.LOG, tolerances.majorization_tol, tolerances)


def golden_thompson_trace_gap(
    a: MatrixLike, b: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """``Tr(e^A e^B) - Tr(e^{A+B})``, nonnegative and zero exactly for commuting pairs."""
    a, b = as_hermitian(a, tolerances), as_hermitian(b, tolerances)
    product = expm_hermitian(a, tolerances).matrix @ expm_hermitian(b, tolerances).matrix
    total = expm_hermitian(a.matrix + b.matrix, tolerances).matrix
    return float(np.trace(product).real - np.trace(total).real)


def trace_commutator_residual(x: MatrixLike, y: MatrixLike, z: MatrixLike) -> float:
    """``|Tr(Z[X, Y]) - Tr([Z, X] Y)|``."""
    x, y, z = as_complex_matrix(x), as_complex_matrix(y), as_complex_matrix(z)
    lhs = np.trace(z @ commutator(x, y))
    rhs = np.trace(commutator(z, x) @ y)
    return float(abs(lhs - rhs))
