from pathlib import Path

import numpy as np

from majlab.ensemble import random_hermitian, stream

TEST_DATA_DIR = Path(__file__).parent / "data"

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def hermitian(seed, n, *key):
    """Seeded random Hermitian array of spectral norm <= 2."""
    return np.array(random_hermitian(stream(seed, n, *key), n).matrix)


def pair(seed, n, *key):
    """Seeded random Hermitian pair."""
    rng = stream(seed, n, *key)
    return np.array(random_hermitian(rng, n).matrix), np.array(random_hermitian(rng, n).matrix)


def cases(dims=range(2, 9), trials=10):
    """``(n, trial)`` parameters for ``pytest.mark.parametrize``."""
    return [(n, t) for n in dims for t in range(trials)]
