"""Taylor coefficients of ``e^{(A+B)t}`` and ``e^{At} e^{Bt}`` and their commutator identities.

With ``H = A + B`` and ``X = A - B``:

* ``Q_k = sum_p binom(k, p) A^p B^{k-p}`` is the k-th derivative of ``e^{At} e^{Bt}`` at 0,
* ``R_k = (Q_k + Q_k*) / 2`` and ``D_k = R_k - H^k``.

Residuals of the identities are relative, divided by ``1 + ||H||_F^k``.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from majlab.exceptions import DimensionError, PreconditionError
from majlab.linalg import (
    ComplexMatrix,
    HermitianMatrix,
    MatrixLike,
    Spectrum,
    ad_power,
    anticommutator,
    as_complex_matrix,
    as_hermitian,
    commutator,
    eigvals,
    expm_hermitian,
    frobenius,
    hermitian_power,
    re_part,
    singular_values,
)
from majlab.spectral import (
    MajorizationVerdict,
    Relation,
    check_majorization,
    ky_fan_sum,
    top_projection,
)
from majlab.util import DEFAULT_TOLERANCES, Tolerances

L = logging.getLogger(__name__)

MAX_ORDER = 60


@dataclass(frozen=True)
class PairHX:
    """``H = A + B`` and ``X = A - B``."""

    H: HermitianMatrix
    X: HermitianMatrix

    @classmethod
    def from_ab(cls, a: MatrixLike, b: MatrixLike) -> "PairHX":
        """Build from ``(A, B)``."""
        a, b = as_hermitian(a).matrix, as_hermitian(b).matrix
        if a.shape != b.shape:
            raise DimensionError(f"Dimension mismatch: {a.shape} vs {b.shape}")
        return cls(HermitianMatrix(a + b), HermitianMatrix(a - b))

    def to_ab(self) -> Tuple[HermitianMatrix, HermitianMatrix]:
        """``A = (H + X) / 2`` and ``B = (H - X) / 2``."""
        h, x = self.H.matrix, self.X.matrix
        return HermitianMatrix((h + x) / 2), HermitianMatrix((h - x) / 2)


def compute_qk(a: MatrixLike, b: MatrixLike, k: int) -> ComplexMatrix:
    """``Q_k``, with the powers of ``A`` and ``B`` formed by repeated multiplication.

    Raises:
        PreconditionError: unless ``1 <= k <= 60``
        DimensionError: if ``a`` and ``b`` differ in size
    """
    if not 1 <= k <= MAX_ORDER:
        raise PreconditionError(f"Order k must be in [1, {MAX_ORDER}], got {k}")
    a, b = as_complex_matrix(a), as_complex_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"Dimension mismatch: {a.shape} vs {b.shape}")
    n = a.shape[0]
    a_powers = [np.eye(n, dtype=complex)]
    b_powers = [np.eye(n, dtype=complex)]
    for _ in range(k):
        a_powers.append(a_powers[-1] @ a)
        b_powers.append(b_powers[-1] @ b)
    q = np.zeros((n, n), dtype=complex)
    for p in range(k + 1):
        q += math.comb(k, p) * (a_powers[p] @ b_powers[k - p])
    return q


@dataclass(frozen=True)
class CoeffBundle:
    """``Q_k``, ``R_k``, ``H^k`` and ``D_k`` of a pair."""

    k: int
    Q: ComplexMatrix
    R: HermitianMatrix
    Hk: HermitianMatrix
    D: HermitianMatrix


def coeff_bundle(
    a: MatrixLike, b: MatrixLike, k: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> CoeffBundle:
    """Evaluate all order-``k`` coefficient matrices of ``(A, B)``."""
    a, b = as_hermitian(a, tolerances), as_hermitian(b, tolerances)
    q = compute_qk(a, b, k)
    r = re_part(q)
    hk = hermitian_power(a.matrix + b.matrix, k)
    return CoeffBundle(k, q, r, hk, HermitianMatrix(r.matrix - hk.matrix, tolerances))


def _scale(h: np.ndarray, k: int) -> float:
    return 1.0 + float(np.linalg.norm(h)) ** k


def _identity_residual(a: MatrixLike, b: MatrixLike, k: int, rhs_fn) -> float:
    pair = PairHX.from_ab(a, b)
    bundle = coeff_bundle(a, b, k)
    rhs = rhs_fn(pair.H.matrix, pair.X.matrix)
    return frobenius(bundle.D.matrix - rhs) / _scale(pair.H.matrix, k)


def d3_rhs(h: np.ndarray, x: np.ndarray) -> ComplexMatrix:
    """``[X, [X, H]] / 4``."""
    return ad_power(x, h, 2) / 4


def d4_rhs(h: np.ndarray, x: np.ndarray) -> ComplexMatrix:
    """``[X, [X, H^2]] / 2 - [X, H]^2 / 4``."""
    k = commutator(x, h)
    return ad_power(x, h @ h, 2) / 2 - (k @ k) / 4


def d5_rhs(h: np.ndarray, x: np.ndarray) -> ComplexMatrix:
    """Five-term expansion of ``D_5`` in ``H`` and ``ad_X``."""
    h2 = h @ h
    ad2_h = ad_power(x, h, 2)
    return (
        ad_power(x, h, 4) / 16
        + 7 * ad_power(x, h2 @ h, 2) / 16
        + 9 * anticommutator(h, ad_power(x, h2, 2)) / 32
        - anticommutator(h2, ad2_h) / 32
        + (h @ ad2_h @ h) / 8
    )


def d3_identity_residual(a: MatrixLike, b: MatrixLike) -> float:
    """Relative residual of ``R_3 - H^3 = [X, [X, H]] / 4``."""
    return _identity_residual(a, b, 3, d3_rhs)


def d4_identity_residual(a: MatrixLike, b: MatrixLike) -> float:
    """Relative residual of ``R_4 - H^4 = [X, [X, H^2]] / 2 - [X, H]^2 / 4``."""
    return _identity_residual(a, b, 4, d4_rhs)


def d5_identity_residual(a: MatrixLike, b: MatrixLike) -> float:
    """Relative residual of ``D_5`` against its five-term commutator expansion."""
    return _identity_residual(a, b, 5, d5_rhs)


def skew_square_psd(
    x: MatrixLike, h: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> Spectrum:
    """Spectrum of ``-[X, H]^2``, which is ``K* K`` for the skew-Hermitian ``K = [X, H]``."""
    k = commutator(as_hermitian(x, tolerances), as_hermitian(h, tolerances))
    return eigvals(HermitianMatrix(-(k @ k), tolerances), tolerances)


def _odd_even_operator(h: np.ndarray, k: int) -> np.ndarray:
    """``H`` for odd ``k``, ``H^2`` for even ``k``: its top projections are those of ``H^k``."""
    return h if k % 2 else h @ h


def projection_certificates(
    a: MatrixLike, b: MatrixLike, k: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> List[Tuple[int, float]]:
    """``Tr(E_{k,r} D_k)`` for every ``r``.

    ``E_{k,r}`` projects onto the top-``r`` eigenspace of ``H`` (odd ``k``) or of ``H^2``
    (even ``k``); in both cases it is a Ky Fan maximizer for ``H^k``.
    """
    bundle = coeff_bundle(a, b, k, tolerances)
    h = as_hermitian(a, tolerances).matrix + as_hermitian(b, tolerances).matrix
    return _bundle_certificates(bundle, h, tolerances)


def _bundle_certificates(
    bundle: CoeffBundle, h: np.ndarray, tolerances: Tolerances
) -> List[Tuple[int, float]]:
    operator = HermitianMatrix(_odd_even_operator(h, bundle.k), tolerances)
    certificates = []
    for r in range(1, operator.dim + 1):
        e = top_projection(operator, r, tolerances).matrix.matrix
        certificates.append((r, float(np.trace(e @ bundle.D.matrix).real)))
    return certificates


def trace_discrepancy(a: MatrixLike, b: MatrixLike, k: int) -> float:
    """``Tr D_k``; zero at ``k = 3``, only reported at other orders."""
    return float(np.trace(coeff_bundle(a, b, k).D.matrix).real)


@dataclass(frozen=True)
class TheoremMargins:
    """Ky Fan margins of ``lambda(H^k)`` against ``lambda(R_k)``.

    Args:
        k: order
        margins: ``(r, ky_fan(R_k, r) - ky_fan(H^k, r))``
        certificates: ``(r, Tr(E_{k,r} D_k))``
        trace_residual: ``|Tr H^3 - Tr R_3| / (1 + ||H||_F^3)``, only for ``k = 3``
    """

    k: int
    margins: List[Tuple[int, float]]
    certificates: List[Tuple[int, float]]
    trace_residual: Optional[float] = None

    @property
    def min_margin(self) -> float:
        """Smallest prefix margin."""
        return min(m for _, m in self.margins)

    @property
    def min_certificate(self) -> float:
        """Smallest projection certificate."""
        return min(c for _, c in self.certificates)


def ky_fan_margins(
    a: MatrixLike, b: MatrixLike, k: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """``ky_fan(lambda(R_k), r) - ky_fan(lambda(H^k), r)`` for ``r = 1..n``."""
    return _bundle_margins(coeff_bundle(a, b, k, tolerances), tolerances)


def _bundle_margins(bundle: CoeffBundle, tolerances: Tolerances) -> np.ndarray:
    r_values = eigvals(bundle.R, tolerances).values
    h_values = eigvals(bundle.Hk, tolerances).values
    return np.cumsum(r_values) - np.cumsum(h_values)


def theorem_margins(
    a: MatrixLike, b: MatrixLike, k: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> TheoremMargins:
    """Margins and certificates of ``lambda(H^k)`` against ``lambda(R_k)`` for ``k`` in 3, 4.

    Raises:
        PreconditionError: unless ``k`` is 3 or 4
    """
    if k not in (3, 4):
        raise PreconditionError(f"Theorem margins are defined for k in (3, 4), got {k}")
    bundle = coeff_bundle(a, b, k, tolerances)
    h = as_hermitian(a, tolerances).matrix + as_hermitian(b, tolerances).matrix
    trace_residual = None
    if k == 3:
        gap = abs(np.trace(bundle.Hk.matrix).real - np.trace(bundle.R.matrix).real)
        trace_residual = float(gap) / _scale(h, 3)
    return TheoremMargins(
        k,
        [(r, float(m)) for r, m in enumerate(_bundle_margins(bundle, tolerances), start=1)],
        _bundle_certificates(bundle, h, tolerances),
        trace_residual,
    )


def sigma_comparison(
    a: MatrixLike, b: MatrixLike, k: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> MajorizationVerdict:
    """Verdict of ``lambda(H^k) <_w sigma(Q_k)``."""
    bundle = coeff_bundle(a, b, k, tolerances)
    return check_majorization(
        eigvals(bundle.Hk, tolerances),
        singular_values(bundle.Q, tolerances),
        Relation.WEAK,
        tolerances.majorization_tol,
        tolerances,
    )


def second_derivative_discrepancy(a: MatrixLike, b: MatrixLike) -> float:
    """``||Q_2 - (A^2 + AB + BA + B^2) - [A, B]||_F``."""
    a, b = as_complex_matrix(a), as_complex_matrix(b)
    h_squared = (a + b) @ (a + b)
    return frobenius(compute_qk(a, b, 2) - h_squared - commutator(a, b))


def trotter_error(
    a: MatrixLike,
    b: MatrixLike,
    t: float,
    n: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """``||(e^{tA/n} e^{tB/n})^n - e^{t(A+B)}||_F``.

    Raises:
        PreconditionError: if ``n < 1``
    """
    if n < 1:
        raise PreconditionError(f"Number of Trotter steps must be positive, got {n}")
    a, b = as_hermitian(a, tolerances).matrix, as_hermitian(b, tolerances).matrix
    step = (
        expm_hermitian(a * (t / n), tolerances).matrix
        @ expm_hermitian(b * (t / n), tolerances).matrix
    )
    exact = expm_hermitian((a + b) * t, tolerances).matrix
    return frobenius(np.linalg.matrix_power(step, n) - exact)


class DecompositionTerm(NamedTuple):
    """``c [X, [X, F]]`` with ``c >= 0``."""

    coefficient: float
    f: MatrixLike


def _check_terms(terms: Sequence[DecompositionTerm]):
    for term in terms:
        if term.coefficient < 0:
            raise PreconditionError(
                f"Decomposition coefficients must be nonnegative, got {term.coefficient}"
            )


def decomposition_check(
    d: MatrixLike,
    x: MatrixLike,
    terms: Sequence[DecompositionTerm],
    ws: Sequence[MatrixLike] = (),
) -> float:
    """Frobenius residual of ``D = sum_j c_j [X, [X, F_j]] + sum_q W_q* W_q``.

    Raises:
        PreconditionError: if some ``c_j`` is negative
    """
    terms = [DecompositionTerm(*term) for term in terms]
    _check_terms(terms)
    x = as_complex_matrix(x)
    candidate = np.zeros_like(x)
    for term in terms:
        candidate = candidate + term.coefficient * ad_power(x, term.f, 2)
    for w in ws:
        w = as_complex_matrix(w)
        candidate = candidate + w.conj().T @ w
    return frobenius(as_complex_matrix(d) - candidate)


@dataclass(frozen=True)
class DecompositionCertificate:
    """Per-``r`` evidence that a decomposition certifies ``Tr(E_{k,r} D_k) >= 0``.

    Args:
        r: projection rank
        term_traces: ``Tr(E_{k,r} c_j [X, [X, F_j]])`` per term
        square_traces: ``Tr(E_{k,r} W_q* W_q)`` per square
        maximizer_gaps: ``ky_fan(F_j, r) - Tr(E_{k,r} F_j)``; zero when ``F_j`` is increasing in
            the odd/even operator
    """

    r: int
    term_traces: Tuple[float, ...]
    square_traces: Tuple[float, ...]
    maximizer_gaps: Tuple[float, ...]

    def holds(self, tol: float) -> bool:
        """Every trace nonnegative and ``E_{k,r}`` a Ky Fan maximizer of each ``F_j``."""
        return (
            all(t >= -tol for t in self.term_traces + self.square_traces)
            and all(abs(g) <= tol for g in self.maximizer_gaps)
        )


def decomposition_certificates(
    k: int,
    h: MatrixLike,
    x: MatrixLike,
    terms: Sequence[DecompositionTerm],
    ws: Sequence[MatrixLike] = (),
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> List[DecompositionCertificate]:
    """Term-by-term traces of a candidate decomposition against ``E_{k,r}``."""
    terms = [DecompositionTerm(*term) for term in terms]
    _check_terms(terms)
    h = as_hermitian(h, tolerances).matrix
    x = as_complex_matrix(x)
    operator = HermitianMatrix(_odd_even_operator(h, k), tolerances)
    squares = [as_complex_matrix(w).conj().T @ as_complex_matrix(w) for w in ws]
    f_spectra = [eigvals(as_hermitian(term.f, tolerances), tolerances) for term in terms]
    certificates = []
    for r in range(1, operator.dim + 1):
        e = top_projection(operator, r, tolerances).matrix.matrix
        certificates.append(
            DecompositionCertificate(
                r,
                tuple(
                    float(np.trace(e @ (term.coefficient * ad_power(x, term.f, 2))).real)
                    for term in terms
                ),
                tuple(float(np.trace(e @ s).real) for s in squares),
                tuple(
                    ky_fan_sum(spectrum, r)
                    - float(np.trace(e @ as_complex_matrix(term.f)).real)
                    for term, spectrum in zip(terms, f_spectra)
                ),
            )
        )
    return certificates
