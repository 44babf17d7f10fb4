"""utilities module."""

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from majlab.exceptions import DimensionError

THREADS_ENV = "MAJLAB_THREADS"


@dataclass(frozen=True)
class Tolerances:
    """All numerical thresholds of the package.

    Args:
        hermitian_tol: relative distance ``||M - M*||_F / (1 + ||M||_F)`` accepted when
            building a Hermitian matrix
        eig_offdiag_tol: Jacobi stops once the off-diagonal Frobenius norm falls below this
            fraction of ``||M||_F``
        max_sweeps: Jacobi sweeps before giving up
        eig_tol: accepted reconstruction error of an eigendecomposition, relative to
            ``1 + ||M||_F``
        proj_tol: accepted idempotency/trace error of a spectral projection
        majorization_tol: absolute slack on prefix sums (or sums of logs)
        log_floor: entries below this make a log relation fail
        identity_tol: accepted relative residual of the commutator identities
        fan_hoffman_tol: slack of ``lambda_j(Re Y) <= sigma_j(Y)``
        inconclusive_band: margins with smaller magnitude are never reported as violations
        counterexample_threshold: a margin below minus this value is a counterexample candidate
        reverify_tightening: factor applied to ``eig_offdiag_tol`` when reverifying
        reverify_rel: relative agreement required when reverifying a nonzero margin
    """

    hermitian_tol: float = 1e-12
    eig_offdiag_tol: float = 1e-13
    max_sweeps: int = 60
    eig_tol: float = 1e-10
    proj_tol: float = 1e-9
    majorization_tol: float = 1e-9
    log_floor: float = 1e-300
    identity_tol: float = 1e-10
    fan_hoffman_tol: float = 1e-10
    inconclusive_band: float = 1e-8
    counterexample_threshold: float = 1e-6
    reverify_tightening: float = 100.0
    reverify_rel: float = 0.1

    def tightened(self, factor: Optional[float] = None) -> "Tolerances":
        """Copy with the Jacobi stopping threshold divided by ``factor``."""
        factor = self.reverify_tightening if factor is None else factor
        return dataclasses.replace(self, eig_offdiag_tol=self.eig_offdiag_tol / factor)


DEFAULT_TOLERANCES = Tolerances()


def matrix_to_json(matrix: np.ndarray) -> Dict[str, Any]:
    """Matrix in the shared file format ``{"dim", "re", "im"}``."""
    matrix = np.asarray(matrix, dtype=complex)
    return {
        "dim": int(matrix.shape[0]),
        "re": matrix.real.tolist(),
        "im": matrix.imag.tolist(),
    }


def matrix_from_json(data: Dict[str, Any]) -> np.ndarray:
    """Inverse of ``matrix_to_json``.

    Raises:
        DimensionError: if ``dim`` does not match the stored rows
    """
    dim = int(data["dim"])
    matrix = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    if matrix.shape != (dim, dim):
        raise DimensionError(f"Matrix of shape {matrix.shape} does not have dim {dim}")
    return matrix


def write_json(path: Path, payload: Dict[str, Any]):
    """Dump ``payload`` to ``path``; floats keep their shortest round-trip repr."""
    path = Path(path)
    path.parent.mkdir(exist_ok=True, parents=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def thread_cap() -> int:
    """Number of local workers allowed by ``MAJLAB_THREADS`` (default 1)."""
    value = os.environ.get(THREADS_ENV, "1")
    try:
        threads = int(value)
    except ValueError as e:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {value!r}") from e
    if threads < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {value!r}")
    return threads


def parse_slurm_args(slurm_args):
    """Parse processed slurm arguments.

    Args:
        slurm_args: tuple of slurm arguments
    """
    result = {}
    for key, value in slurm_args:
        try:
            parsed_value = int(value)
        except ValueError:
            parsed_value = value

        result["slurm_" + key.replace("-", "_")] = parsed_value

    return result
