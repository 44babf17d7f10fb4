"""Randomized verification suite and the Lie-Trotter convergence sweep."""

import logging
import math
from contextlib import nullcontext
from typing import Sequence, Tuple

import click
import numpy as np
import pandas as pd

from majlab.ensemble import commuting_pair, random_complex, random_hermitian, random_pair, stream
from majlab.exceptions import PreconditionError
from majlab.linalg import eigvals, frobenius, re_part, singular_values
from majlab.report import RunReport
from majlab.spectral import (
    double_comm_trace,
    double_comm_trace_eigenbasis,
    golden_thompson_check,
    golden_thompson_trace_gap,
    top_projection,
    trace_commutator_residual,
)
from majlab.taylor import (
    d3_identity_residual,
    d4_identity_residual,
    d5_identity_residual,
    sigma_comparison,
    theorem_margins,
    trotter_error,
)
from majlab.util import DEFAULT_TOLERANCES, Tolerances

L = logging.getLogger(__name__)

IDENTITY_RESIDUALS = {
    3: d3_identity_residual,
    4: d4_identity_residual,
    5: d5_identity_residual,
}
TROTTER_RATIO_BOUND = 0.6
TROTTER_ASSERT_FROM = 8
TROTTER_COMMUTING_TOL = 1e-12


def _theorem_checks(report: RunReport, a, b, k: int, context, tolerances: Tolerances):
    # pylint: disable=too-many-arguments
    tol = tolerances.majorization_tol
    report.record(
        f"identity_d{k}", -IDENTITY_RESIDUALS[k](a, b), tolerances.identity_tol, context
    )
    margins = theorem_margins(a, b, k, tolerances)
    report.record(f"theorem_k{k}", margins.min_margin, tol, context)
    report.record(f"certificates_k{k}", margins.min_certificate, tol, context)
    if margins.trace_residual is not None:
        report.record(f"trace_equality_k{k}", -margins.trace_residual, tol, context)
    report.record(f"sigma_k{k}", sigma_comparison(a, b, k, tolerances).margin, tol, context)


def _baseline_checks(
    report: RunReport, rng: np.random.Generator, n: int, a, b, context, tolerances: Tolerances
):
    # pylint: disable=too-many-arguments,too-many-locals
    tol = tolerances.majorization_tol
    y = random_complex(rng, n)
    gaps = singular_values(y, tolerances).values - eigvals(re_part(y), tolerances).values
    report.record("fan_hoffman", float(np.min(gaps)), tolerances.fan_hoffman_tol, context)

    verdict = golden_thompson_check(a, b, tolerances)
    report.record("golden_thompson", verdict.margin, tol, context)
    report.record(
        "golden_thompson_trace", golden_thompson_trace_gap(a, b, tolerances), tol, context
    )
    ca, cb = commuting_pair(rng, n)
    equality = golden_thompson_check(ca, cb, tolerances)
    worst = max((abs(m) for m in equality.margins), default=-equality.margin)
    report.record("golden_thompson_commuting", -worst, tol, context)

    f = random_hermitian(rng, n)
    x = random_hermitian(rng, n)
    r = int(rng.integers(1, n + 1))
    direct = double_comm_trace(top_projection(f, r, tolerances), x, f, tolerances)
    report.record("double_commutator", direct, tol, context)
    basis = double_comm_trace_eigenbasis(x, f, r, tolerances)
    report.record("double_commutator_basis", -abs(direct - basis), tol, context)

    z = random_complex(rng, n)
    scale = 1.0 + frobenius(x) * frobenius(f) * frobenius(z)
    report.record(
        "trace_commutator",
        -trace_commutator_residual(x, f, z) / scale,
        tolerances.identity_tol,
        context,
    )


def run_verify(
    ks: Sequence[int],
    dims: Sequence[int],
    trials: int,
    seed: int = 0,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    progress: bool = False,
) -> RunReport:
    # pylint: disable=too-many-arguments
    """Run the randomized checks over ``trials`` pairs per dimension.

    Trial ``t`` at dimension ``n`` draws from the stream ``(seed, n, t)``. For each order in
    ``ks`` it checks the identity residual, the theorem margins with their projection
    certificates (and trace equality at ``k = 3``) and the comparison with ``sigma(Q_k)``; the
    ``D_5`` identity is checked when ``5`` is among ``ks``. Independently of ``ks`` it checks
    Fan-Hoffman, Golden-Thompson, double-commutator positivity and the trace-commutator
    identity.

    Args:
        ks: orders, a subset of ``(3, 4, 5)``
        dims: matrix sizes
        trials: pairs per size
        seed: seed of all streams
        tolerances: tolerance record
        progress: show a progress bar on standard error
    """
    unknown = set(ks) - set(IDENTITY_RESIDUALS)
    if unknown:
        raise PreconditionError(f"Unsupported orders {sorted(unknown)}")
    report = RunReport(
        "verify", {"k": list(ks), "dims": list(dims), "trials": trials, "seed": seed}
    )
    cases = [(n, t) for n in dims for t in range(trials)]
    L.info("Verifying k=%s over %d cases", list(ks), len(cases))
    bar = (
        click.progressbar(cases, label="Verifying", file=click.get_text_stream("stderr"))
        if progress
        else nullcontext(cases)
    )
    with bar as items:
        for n, t in items:
            rng = stream(seed, n, t)
            a, b = random_pair(rng, n)
            context = {"dim": n, "trial": t}
            for k in ks:
                if k in (3, 4):
                    _theorem_checks(report, a, b, k, context, tolerances)
                else:
                    report.record(
                        f"identity_d{k}",
                        -IDENTITY_RESIDUALS[k](a, b),
                        tolerances.identity_tol,
                        context,
                    )
            _baseline_checks(report, rng, n, a, b, context, tolerances)
    L.info("Verification finished: %s", report.totals)
    return report


def trotter_steps(nmax: int) -> Tuple[int, ...]:
    """``1, 2, 4, ..., nmax``.

    Raises:
        PreconditionError: unless ``nmax`` is a power of two, at least 2
    """
    if nmax < 2 or nmax & (nmax - 1):
        raise PreconditionError(f"nmax must be a power of two >= 2, got {nmax}")
    return tuple(1 << i for i in range(nmax.bit_length()))


def run_trotter(
    t: float = 1.0,
    nmax: int = 128,
    seed: int = 0,
    dim: int = 4,
    commuting: bool = False,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[pd.DataFrame, RunReport]:
    # pylint: disable=too-many-arguments
    """Lie-Trotter errors ``||(e^{tA/n} e^{tB/n})^n - e^{t(A+B)}||_F`` for doubling ``n``.

    For a generic pair the errors must decrease and halve at least as fast as
    ``error(2n) <= 0.6 error(n)`` from ``n = 8`` on; for a commuting pair every error must stay
    below ``1e-12``.

    Returns:
        a frame of ``n, error, ratio`` and the report of the assertions
    """
    steps = trotter_steps(nmax)
    rng = stream(seed, 0)
    if commuting:
        a, b = commuting_pair(rng, dim)
    else:
        a, b = random_hermitian(rng, dim), random_hermitian(rng, dim)
    errors = [trotter_error(a, b, t, n, tolerances) for n in steps]
    ratios = [math.nan] + [e2 / e1 if e1 else math.nan for e1, e2 in zip(errors, errors[1:])]
    frame = pd.DataFrame({"n": steps, "error": errors, "ratio": ratios})
    report = RunReport(
        "trotter", {"t": t, "nmax": nmax, "seed": seed, "dim": dim, "commuting": commuting}
    )
    if commuting:
        for n, error in zip(steps, errors):
            report.record("trotter_commuting", -error, TROTTER_COMMUTING_TOL, {"n": n})
    else:
        for n, e1, e2 in zip(steps, errors, errors[1:]):
            if n < TROTTER_ASSERT_FROM:
                continue
            context = {"n": n}
            report.record("trotter_monotone", e1 - e2, 0.0, context)
            report.record("trotter_ratio", TROTTER_RATIO_BOUND - e2 / e1, 0.0, context)
    L.info("Trotter sweep finished: %s", report.totals)
    return frame, report
