"""Numerical hunt for pairs with ``lambda(H^k)`` not weakly majorized by ``lambda(R_k)``."""

import itertools
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields
from datetime import timedelta
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import submitit
import yaml

from majlab.ensemble import Ensemble, random_pair, stream, stream_provenance
from majlab.exceptions import (
    ConvergenceError,
    DimensionError,
    HermitianError,
    PreconditionError,
    ReportError,
)
from majlab.linalg import HermitianMatrix, MatrixLike
from majlab.taylor import ky_fan_margins, projection_certificates, sigma_comparison
from majlab.util import DEFAULT_TOLERANCES, Tolerances, matrix_from_json, matrix_to_json, write_json

L = logging.getLogger(__name__)

SCHEMA = "vr-1"
MARGIN_MATCH_TOL = 1e-9
# Squared Frobenius norm of a pair after normalization; the objective is homogeneous in (A, B).
PAIR_NORM_SQUARED = 2.0


@dataclass(frozen=True)
class SearchConfig:
    """Parameters of a hunt.

    Args:
        k: order; 3 and 4 serve as controls where no violation can exist
        dim: matrix size
        num_restarts: independent descents
        steps_per_restart: gradient steps per descent
        step_size: initial length of every step before backtracking
        rng_seed: seed of all restart streams
        ensemble: distribution of the starting pairs
        fd_step: half-width of the central differences
        min_step: backtracking stops below this step length
    """

    k: int
    dim: int
    num_restarts: int = 20
    steps_per_restart: int = 50
    step_size: float = 0.1
    rng_seed: int = 0
    ensemble: Ensemble = Ensemble.GAUSSIAN
    fd_step: float = 1e-6
    min_step: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "ensemble", Ensemble(self.ensemble))
        if self.k < 3:
            raise PreconditionError(f"Search order must be at least 3, got {self.k}")
        for name in ("dim", "num_restarts", "steps_per_restart"):
            if getattr(self, name) < 1:
                raise PreconditionError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("step_size", "fd_step", "min_step"):
            if not getattr(self, name) > 0:
                raise PreconditionError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 <= self.rng_seed < 2**64:
            raise PreconditionError(f"rng_seed must fit in 64 bits, got {self.rng_seed}")

    @classmethod
    def from_yaml(cls, path: Union[str, Path], **overrides) -> "SearchConfig":
        """Read a YAML mapping; non-``None`` ``overrides`` replace file values."""
        with Path(path).open(encoding="utf-8") as f:
            data = yaml.load(f, Loader=yaml.SafeLoader) or {}
        if not isinstance(data, dict):
            raise PreconditionError(f"Search config {path} must be a mapping")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise PreconditionError(f"Unknown search config keys in {path}: {sorted(unknown)}")
        data.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready echo."""
        data = asdict(self)
        data["ensemble"] = self.ensemble.value
        return data


def hermitian_to_params(m: MatrixLike) -> np.ndarray:
    """The ``n^2`` real coordinates of a Hermitian matrix.

    Diagonal entries come first, then ``sqrt(2)`` times the real and imaginary parts of the
    strict upper triangle, so the Euclidean norm of the vector is the Frobenius norm.
    """
    m = m.matrix if isinstance(m, HermitianMatrix) else HermitianMatrix(m).matrix
    upper = m[np.triu_indices(m.shape[0], 1)]
    return np.concatenate([m.diagonal().real, math.sqrt(2) * upper.real, math.sqrt(2) * upper.imag])


def params_to_hermitian(params: np.ndarray, n: int) -> HermitianMatrix:
    """Inverse of ``hermitian_to_params``."""
    params = np.asarray(params, dtype=float)
    if params.shape != (n * n,):
        raise DimensionError(f"Expected {n * n} parameters for n={n}, got {params.shape}")
    m = np.diag(params[:n]).astype(complex)
    rows, cols = np.triu_indices(n, 1)
    half = len(rows)
    upper = (params[n : n + half] + 1j * params[n + half :]) / math.sqrt(2)
    m[rows, cols] = upper
    m[cols, rows] = upper.conj()
    return HermitianMatrix(m)


def margin_profile(
    a: MatrixLike, b: MatrixLike, k: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """``ky_fan(lambda(R_k), r) - ky_fan(lambda(H^k), r)`` for ``r = 1..n``."""
    if k < 1:
        raise PreconditionError(f"Order k must be positive, got {k}")
    return ky_fan_margins(a, b, k, tolerances)


def margin_objective(
    a: MatrixLike, b: MatrixLike, k: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """Smallest prefix margin; negative values are counterexample candidates."""
    return float(np.min(margin_profile(a, b, k, tolerances)))


def _normalize(x: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        return x
    return x * (math.sqrt(PAIR_NORM_SQUARED) / norm)


def _split(x: np.ndarray, n: int) -> Tuple[HermitianMatrix, HermitianMatrix]:
    return params_to_hermitian(x[: n * n], n), params_to_hermitian(x[n * n :], n)


@dataclass
class RestartResult:
    """Best pair of one descent and its trace of ``(step, margin, step_size)``."""

    index: int
    margin: float
    a: np.ndarray
    b: np.ndarray
    trace: List[Tuple[int, float, float]] = field(default_factory=list)


def run_restart(
    config: SearchConfig, index: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> RestartResult:
    """One finite-difference descent of ``margin_objective`` from a random starting pair.

    Pairs are kept on the sphere ``||A||_F^2 + ||B||_F^2 = 2``. Each step starts at
    ``step_size`` along the normalized negative gradient and halves until the objective
    decreases; the descent stops early when no step above ``min_step`` helps.
    """
    n = config.dim
    rng = stream(config.rng_seed, index)
    a, b = random_pair(rng, n, config.ensemble)
    x = _normalize(np.concatenate([hermitian_to_params(a), hermitian_to_params(b)]))

    def objective(point: np.ndarray) -> float:
        return margin_objective(*_split(_normalize(point), n), config.k, tolerances)

    value = objective(x)
    trace = [(0, value, 0.0)]
    h = config.fd_step
    for step_index in range(1, config.steps_per_restart + 1):
        gradient = np.empty_like(x)
        for i in range(x.size):
            offset = np.zeros_like(x)
            offset[i] = h
            gradient[i] = (objective(x + offset) - objective(x - offset)) / (2 * h)
        norm = float(np.linalg.norm(gradient))
        if norm == 0.0:
            L.debug("Restart %d: zero gradient at step %d", index, step_index)
            break
        direction = -gradient / norm
        step = config.step_size
        while step >= config.min_step:
            candidate = _normalize(x + step * direction)
            candidate_value = objective(candidate)
            if candidate_value < value:
                x, value = candidate, candidate_value
                break
            step /= 2
        else:
            L.debug("Restart %d: backtracking exhausted at step %d", index, step_index)
            break
        trace.append((step_index, value, step))
    a, b = _split(x, n)
    L.info("Restart %d finished with margin %.3e", index, value)
    return RestartResult(index, value, np.array(a.matrix), np.array(b.matrix), trace)


def run_restart_batch(
    config: SearchConfig, indices: Sequence[int], tolerances: Tolerances = DEFAULT_TOLERANCES
) -> List[RestartResult]:
    """Run the restarts ``indices`` one after another; a unit of work for an executor."""
    return [run_restart(config, index, tolerances) for index in indices]


def _run_restarts(
    config: SearchConfig,
    tolerances: Tolerances,
    threads: int,
    slurm_args: Optional[Dict[str, Union[str, int]]],
    log_dir: str,
    timeout_s: int,
) -> List[RestartResult]:
    # pylint: disable=too-many-arguments
    indices = range(config.num_restarts)
    if not slurm_args and threads == 1:
        L.info("Running restarts serially.")
        return run_restart_batch(config, indices, tolerances)

    executor: submitit.Executor
    if slurm_args:
        L.info("Using SLURM executor.")
        if "slurm_time" in slurm_args:
            raise KeyError(
                "Use `timeout_s` argument instead of `slurm_time`. "
                "It will be synchronized automatically."
            )
        executor = submitit.AutoExecutor(folder=log_dir + "/%j")
        executor.update_parameters(**slurm_args, slurm_time=str(timedelta(seconds=timeout_s)))
        batch_size = 1
    else:
        L.info("Using local executor with %d jobs.", threads)
        executor = submitit.LocalExecutor(folder=log_dir + "/%j")
        batch_size = math.ceil(config.num_restarts / threads)
    executor.update_parameters(timeout_min=max(1, timeout_s // 60))

    jobs = []
    remaining = iter(indices)
    # executor.batch uses Slurm job array to submit all jobs at once
    with executor.batch():
        while batch := tuple(itertools.islice(remaining, batch_size)):
            jobs.append(executor.submit(run_restart_batch, config, batch, tolerances))
    return [result for job in jobs for result in job.result()]


class MarginStatus:
    """Classification of a best margin."""

    COUNTEREXAMPLE = "counterexample"
    INCONCLUSIVE = "inconclusive"
    NO_VIOLATION = "no_violation"


def classify_margin(margin: float, tolerances: Tolerances = DEFAULT_TOLERANCES) -> str:
    """Margins below ``-counterexample_threshold`` are candidates; small ones are noise."""
    if margin < -tolerances.counterexample_threshold:
        return MarginStatus.COUNTEREXAMPLE
    if margin < tolerances.inconclusive_band:
        return MarginStatus.INCONCLUSIVE
    return MarginStatus.NO_VIOLATION


@dataclass
class ViolationReport:
    """Self-verifying record of a hunt.

    ``margins`` is the per-``r`` profile at the stored pair and ``best_margin`` its minimum.
    """

    # pylint: disable=too-many-instance-attributes
    config: SearchConfig
    best_margin: float
    best_restart: int
    a: np.ndarray
    b: np.ndarray
    margins: Tuple[float, ...]
    certificates: Tuple[Tuple[int, float], ...]
    sigma_margins: Tuple[float, ...]
    restart_margins: Tuple[float, ...]
    wall_clock_s: float
    rng: Dict[str, Any]
    schema: str = SCHEMA

    @property
    def status(self) -> str:
        """``counterexample``, ``inconclusive`` or ``no_violation``."""
        return classify_margin(self.best_margin)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready view with matrices in the shared ``{dim, re, im}`` format."""
        return {
            "schema": self.schema,
            "config": self.config.to_dict(),
            "best_margin": self.best_margin,
            "best_restart": self.best_restart,
            "status": self.status,
            "argmin": {"a": matrix_to_json(self.a), "b": matrix_to_json(self.b)},
            "margins": list(self.margins),
            "certificates": [{"r": r, "trace": value} for r, value in self.certificates],
            "sigma_margins": list(self.sigma_margins),
            "restart_margins": list(self.restart_margins),
            "wall_clock_s": self.wall_clock_s,
            "rng": self.rng,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ViolationReport":
        """Parse ``to_dict`` output.

        Raises:
            ReportError: on a wrong schema, missing fields or unreadable matrices
        """
        if not isinstance(data, dict) or data.get("schema") != SCHEMA:
            raise ReportError(f"Not a {SCHEMA} violation report")
        try:
            return cls(
                config=SearchConfig(**data["config"]),
                best_margin=float(data["best_margin"]),
                best_restart=int(data["best_restart"]),
                a=matrix_from_json(data["argmin"]["a"]),
                b=matrix_from_json(data["argmin"]["b"]),
                margins=tuple(float(m) for m in data["margins"]),
                certificates=tuple(
                    (int(c["r"]), float(c["trace"])) for c in data["certificates"]
                ),
                sigma_margins=tuple(float(m) for m in data["sigma_margins"]),
                restart_margins=tuple(float(m) for m in data["restart_margins"]),
                wall_clock_s=float(data["wall_clock_s"]),
                rng=dict(data["rng"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ReportError(f"Malformed violation report: {e}") from e

    def write(self, path: Union[str, Path]):
        """Write as JSON."""
        write_json(Path(path), self.to_dict())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ViolationReport":
        """Read a report written by ``write``."""
        try:
            with Path(path).open(encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ReportError(f"{path} is not valid JSON: {e}") from e
        return cls.from_dict(data)


def hunt(
    config: SearchConfig,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    threads: int = 1,
    slurm_args: Optional[Dict[str, Union[str, int]]] = None,
    log_dir: str = "logs",
    timeout_s: int = 3600,
    restarts: Optional[List[RestartResult]] = None,
) -> ViolationReport:
    # pylint: disable=too-many-arguments
    """Run all restarts and report the most adversarial pair found.

    Restart ``i`` draws from the stream ``(rng_seed, i)``, so serial, pooled and SLURM
    schedules give the same report apart from ``wall_clock_s``.

    Args:
        config: search parameters
        tolerances: tolerance record
        threads: number of local submitit jobs the restarts are split into
        slurm_args: ``slurm_*`` parameters; non-empty selects the SLURM executor
        log_dir: submitit log folder
        timeout_s: time to live of submitit workers in seconds
        restarts: list that receives the individual restart results, e.g. for traces
    """
    start = time.perf_counter()
    L.info(
        "Hunting k=%d dim=%d with %d restarts (%s)",
        config.k,
        config.dim,
        config.num_restarts,
        config.ensemble.value,
    )
    results = _run_restarts(config, tolerances, threads, slurm_args, log_dir, timeout_s)
    if restarts is not None:
        restarts.extend(results)
    best = min(results, key=lambda result: (result.margin, result.index))
    profile = margin_profile(best.a, best.b, config.k, tolerances)
    sigma = sigma_comparison(best.a, best.b, config.k, tolerances)
    rng = stream_provenance(config.rng_seed)
    rng["restart_key"] = "[rng_seed, restart_index]"
    report = ViolationReport(
        config=config,
        best_margin=float(np.min(profile)),
        best_restart=best.index,
        a=best.a,
        b=best.b,
        margins=tuple(float(m) for m in profile),
        certificates=tuple(projection_certificates(best.a, best.b, config.k, tolerances)),
        sigma_margins=tuple(float(m) for m in sigma.margins),
        restart_margins=tuple(result.margin for result in results),
        wall_clock_s=time.perf_counter() - start,
        rng=rng,
    )
    if config.k in (3, 4) and report.status == MarginStatus.COUNTEREXAMPLE:
        L.warning(
            "Control hunt at k=%d reports margin %.3e; the comparison is a theorem here",
            config.k,
            report.best_margin,
        )
    L.info("Hunt finished: best margin %.3e (%s)", report.best_margin, report.status)
    return report


@dataclass(frozen=True)
class Reverification:
    """Outcome of ``reverify``; truthy when the stored margins are reproduced."""

    status: str
    recomputed_margin: float = math.nan
    tightened_margin: float = math.nan
    detail: str = ""

    CONFIRMED = "confirmed"
    INCONCLUSIVE = "inconclusive"
    MISMATCH = "mismatch"
    CORRUPT = "corrupt"

    def __bool__(self):
        return self.status in (self.CONFIRMED, self.INCONCLUSIVE)


def reverify(
    report: Union[ViolationReport, str, Path], tolerances: Tolerances = DEFAULT_TOLERANCES
) -> Reverification:
    """Recompute a report from its stored pair.

    The per-``r`` margins must match within ``1e-9``. Margins outside the inconclusive band
    are recomputed again with a tightened Jacobi threshold and must keep their sign and stay
    within ``reverify_rel`` of the stored value.

    Raises:
        ReportError: if a report file cannot be parsed
    """
    if not isinstance(report, ViolationReport):
        report = ViolationReport.load(report)
    k = report.config.k
    try:
        a = HermitianMatrix(report.a, tolerances)
        b = HermitianMatrix(report.b, tolerances)
        profile = margin_profile(a, b, k, tolerances)
    except (HermitianError, DimensionError, ValueError) as e:
        L.warning("Stored pair is unusable: %s", e)
        return Reverification(Reverification.CORRUPT, detail=str(e))
    recomputed = float(np.min(profile))
    stored = np.asarray(report.margins, dtype=float)
    if (
        stored.shape != profile.shape
        or float(np.max(np.abs(stored - profile))) > MARGIN_MATCH_TOL
        or abs(recomputed - report.best_margin) > MARGIN_MATCH_TOL
    ):
        L.warning("Recomputed margin %.3e differs from stored %.3e", recomputed, report.best_margin)
        return Reverification(Reverification.MISMATCH, recomputed, detail="stored margins differ")
    if abs(report.best_margin) < tolerances.inconclusive_band:
        return Reverification(
            Reverification.INCONCLUSIVE, recomputed, detail="margin below noise floor"
        )
    try:
        tightened = margin_objective(a, b, k, tolerances.tightened())
    except ConvergenceError as e:
        L.warning("Tightened recomputation did not converge: %s", e)
        return Reverification(Reverification.INCONCLUSIVE, recomputed, detail=str(e))
    if math.copysign(1.0, tightened) != math.copysign(1.0, report.best_margin) or abs(
        tightened - report.best_margin
    ) > tolerances.reverify_rel * abs(report.best_margin):
        L.warning("Tightened margin %.3e departs from %.3e", tightened, report.best_margin)
        return Reverification(
            Reverification.MISMATCH, recomputed, tightened, "tightened margin departs"
        )
    return Reverification(Reverification.CONFIRMED, recomputed, tightened)


def margin_trace_frame(results: Sequence[RestartResult]) -> pd.DataFrame:
    """One row per accepted step: ``restart, step, margin, step_size``."""
    rows = [
        (result.index, step, margin, step_size)
        for result in results
        for step, margin, step_size in result.trace
    ]
    return pd.DataFrame(rows, columns=["restart", "step", "margin", "step_size"])


def write_margin_trace_csv(results: Sequence[RestartResult], path: Union[str, Path]):
    """Write ``margin_trace_frame`` as CSV."""
    path = Path(path)
    path.parent.mkdir(exist_ok=True, parents=True)
    margin_trace_frame(results).to_csv(path, index=False)
