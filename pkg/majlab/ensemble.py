"""Random matrix ensembles shared by the verification suite and the conjecture search."""

from enum import Enum
from typing import Dict, Tuple

import numpy as np

from majlab.linalg import HermitianMatrix

NORM_BOUND = 2.0
NEAR_COMMUTING_EPS = 1e-3


class Ensemble(str, Enum):
    """Distributions of Hermitian pairs ``(A, B)``."""

    GAUSSIAN = "gaussian"
    RANK_DEFICIENT = "rank_deficient"
    NEAR_COMMUTING = "near_commuting"


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``; identical keys give identical streams."""
    return np.random.default_rng([seed, *key])


def stream_provenance(seed: int, *key: int) -> Dict:
    """Description of the stream returned by ``stream`` for reports."""
    return {
        "bit_generator": "PCG64",
        "seed_sequence": [int(seed), *(int(k) for k in key)],
        "numpy": np.__version__,
    }


def random_complex(rng: np.random.Generator, n: int) -> np.ndarray:
    """General complex matrix with i.i.d. standard Gaussian real and imaginary parts."""
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def _rescale(matrix: np.ndarray, bound: float) -> np.ndarray:
    norm = float(np.linalg.norm(matrix, 2))
    if norm > bound:
        matrix = matrix * (bound / norm)
    return matrix


def random_hermitian(rng: np.random.Generator, n: int, rescale: bool = True) -> HermitianMatrix:
    """``(G + G*) / 2`` for a complex Gaussian ``G``, optionally scaled to spectral norm <= 2."""
    g = random_complex(rng, n)
    matrix = (g + g.conj().T) / 2
    if rescale:
        matrix = _rescale(matrix, NORM_BOUND)
    return HermitianMatrix(matrix)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar unitary from the QR factorization of a complex Gaussian matrix."""
    q, r = np.linalg.qr(random_complex(rng, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def commuting_pair(rng: np.random.Generator, n: int) -> Tuple[HermitianMatrix, HermitianMatrix]:
    """Two Hermitian matrices diagonal in a common random basis."""
    u = random_unitary(rng, n)
    a = rng.uniform(-1.0, 1.0, n)
    b = rng.uniform(-1.0, 1.0, n)
    return (
        HermitianMatrix((u * a) @ u.conj().T),
        HermitianMatrix((u * b) @ u.conj().T),
    )


def _rank_deficient(rng: np.random.Generator, n: int) -> HermitianMatrix:
    """Hermitian matrix whose trailing ``max(1, n // 2)`` eigenvalues are zero."""
    u = random_unitary(rng, n)
    values = np.sort(rng.uniform(-NORM_BOUND, NORM_BOUND, n))[::-1]
    values[n - max(1, n // 2) :] = 0.0
    return HermitianMatrix((u * values) @ u.conj().T)


def _near_commuting(
    rng: np.random.Generator, n: int
) -> Tuple[HermitianMatrix, HermitianMatrix]:
    """``B = p(A) + eps * noise`` with ``p`` a random real cubic."""
    a = random_hermitian(rng, n).matrix
    coefficients = rng.standard_normal(4)
    b = np.zeros_like(a)
    for c in coefficients[::-1]:
        b = b @ a + c * np.eye(n)
    b = b + NEAR_COMMUTING_EPS * random_hermitian(rng, n).matrix
    return HermitianMatrix(a), HermitianMatrix(_rescale((b + b.conj().T) / 2, NORM_BOUND))


def random_pair(
    rng: np.random.Generator, n: int, ensemble: Ensemble = Ensemble.GAUSSIAN
) -> Tuple[HermitianMatrix, HermitianMatrix]:
    """Draw ``(A, B)`` from ``ensemble``."""
    ensemble = Ensemble(ensemble)
    if ensemble is Ensemble.NEAR_COMMUTING:
        return _near_commuting(rng, n)
    if ensemble is Ensemble.RANK_DEFICIENT:
        return _rank_deficient(rng, n), _rank_deficient(rng, n)
    return random_hermitian(rng, n), random_hermitian(rng, n)
