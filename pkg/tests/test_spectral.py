import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from utils import SIGMA_X, SIGMA_Z, cases, hermitian

from majlab.ensemble import commuting_pair, random_unitary, stream
from majlab.exceptions import DimensionError, PreconditionError
from majlab.linalg import eigvals, frobenius
from majlab.spectral import (
    Relation,
    SpectralProjection,
    check_majorization,
    double_comm_trace,
    double_comm_trace_eigenbasis,
    golden_thompson_check,
    golden_thompson_trace_gap,
    ky_fan_sum,
    top_projection,
    trace_commutator_residual,
)

vectors = st.lists(
    st.floats(min_value=-100, max_value=100, allow_nan=False), min_size=1, max_size=8
)


def test_majorization_examples():
    verdict = check_majorization([3, 1], [3, 2], "weak")
    assert verdict.holds
    assert verdict.margins == (0.0, 1.0)

    verdict = check_majorization([2, 2], [3, 0], Relation.WEAK)
    assert not verdict.holds
    assert verdict.worst_r == 2
    assert verdict.margin == -1.0

    assert check_majorization([2, 1], [3, 0], Relation.STRONG).holds
    assert not check_majorization([2, 1], [3, 1], Relation.STRONG).holds


def test_majorization_errors():
    with pytest.raises(DimensionError):
        check_majorization([1, 2], [1, 2, 3])
    with pytest.raises(PreconditionError):
        check_majorization([1, -1], [1, 1], Relation.LOG)


def test_log_majorization_floor():
    verdict = check_majorization([1.0, 0.0], [1.0, 1.0], Relation.WEAK_LOG)
    assert not verdict.holds
    assert verdict.margin == -math.inf
    assert verdict.worst_r == 2

    assert check_majorization([2.0, 2.0], [4.0, 1.0], Relation.LOG).holds
    assert check_majorization([2.0, 1.0], [4.0, 1.0], Relation.WEAK_LOG).holds


@seed(2)
@settings(max_examples=100)
@given(x=vectors, relation=st.sampled_from([Relation.WEAK, Relation.STRONG]))
def test_majorization_reflexive(x, relation):
    verdict = check_majorization(x, x, relation)
    assert verdict.holds
    assert verdict.margin == 0.0


@seed(3)
@settings(max_examples=100)
@given(
    x=st.lists(st.floats(min_value=1e-3, max_value=100), min_size=1, max_size=8),
    relation=st.sampled_from(list(Relation)),
)
def test_log_majorization_reflexive(x, relation):
    assert check_majorization(x, x, relation).holds


@seed(4)
@settings(max_examples=100)
@given(
    x=vectors,
    bumps=st.lists(st.floats(min_value=0, max_value=10), min_size=16, max_size=16),
)
def test_weak_majorization_transitive(x, bumps):
    # entrywise larger vectors dominate weakly
    x = np.sort(np.asarray(x))[::-1]
    y = x + np.asarray(bumps[: x.size])
    z = y + np.asarray(bumps[8 : 8 + x.size])
    assert check_majorization(x, y).holds
    assert check_majorization(y, z).holds
    assert check_majorization(x, z).holds


def test_ky_fan_sum():
    assert ky_fan_sum([3, 1, -2], 2) == 4
    assert ky_fan_sum([3, 1, -2], 3) == 2
    with pytest.raises(PreconditionError):
        ky_fan_sum([3, 1, -2], 0)
    with pytest.raises(PreconditionError):
        ky_fan_sum([3, 1, -2], 4)


@pytest.mark.parametrize("n,r", [(3, 1), (4, 2), (5, 3), (6, 5)])
def test_ky_fan_variational(n, r):
    m = hermitian(20, n)
    best = ky_fan_sum(eigvals(m), r)
    rng = stream(21, n)
    traces = []
    for _ in range(200):
        v = random_unitary(rng, n)[:, :r]
        traces.append(float(np.trace(v.conj().T @ m @ v).real))
    assert max(traces) <= best + 1e-8
    assert np.trace(top_projection(m, r).matrix.matrix @ m).real == pytest.approx(best, abs=1e-9)


def test_top_projection_examples():
    e = top_projection(np.diag([5.0, 1.0, -2.0]), 1)
    np.testing.assert_allclose(e.matrix.matrix, np.diag([1.0, 0.0, 0.0]), atol=1e-15)

    e = top_projection(np.eye(3), 2)
    assert e.rank == 2
    assert np.trace(e.matrix.matrix).real == pytest.approx(2.0)

    e = top_projection(SIGMA_X, 1)
    np.testing.assert_allclose(e.matrix.matrix, np.full((2, 2), 0.5), atol=1e-14)

    with pytest.raises(PreconditionError):
        top_projection(SIGMA_X, 3)


def test_spectral_projection_rejects():
    with pytest.raises(PreconditionError):
        SpectralProjection(np.diag([1.0, 0.5]), 1)
    with pytest.raises(PreconditionError):
        SpectralProjection(np.diag([1.0, 0.0]), 2)


def test_double_comm_trace_example():
    f = np.diag([2.0, 0.0])
    e = SpectralProjection(np.diag([1.0, 0.0]), 1)
    assert double_comm_trace(e, SIGMA_X, f) == pytest.approx(4.0)
    assert double_comm_trace_eigenbasis(SIGMA_X, f, 1) == pytest.approx(4.0)
    assert double_comm_trace(e, np.diag([1.0, 3.0]), f) == 0.0


def test_double_comm_trace_precondition():
    e = SpectralProjection(np.diag([0.0, 1.0]), 1)
    with pytest.raises(PreconditionError):
        double_comm_trace(e, SIGMA_X, np.diag([2.0, 0.0]))


@pytest.mark.parametrize("n,trial", cases(trials=5))
def test_double_comm_trace_positive(n, trial):
    f, x = hermitian(22, n, trial), hermitian(23, n, trial)
    for r in range(1, n + 1):
        direct = double_comm_trace(top_projection(f, r), x, f)
        assert direct >= -1e-9
        assert direct == pytest.approx(double_comm_trace_eigenbasis(x, f, r), abs=1e-9)


def test_golden_thompson_commuting():
    a, b = commuting_pair(stream(24, 0), 4)
    verdict = golden_thompson_check(a, b)
    assert verdict.holds
    assert max(abs(m) for m in verdict.margins) <= 1e-9
    assert abs(golden_thompson_trace_gap(a, b)) <= 1e-9


def test_golden_thompson_pauli():
    verdict = golden_thompson_check(SIGMA_Z, SIGMA_X)
    assert verdict.holds
    assert verdict.margins[0] > 0.05
    assert golden_thompson_trace_gap(SIGMA_Z, SIGMA_X) > 0


@pytest.mark.parametrize("n,trial", cases(dims=range(2, 7), trials=5))
def test_golden_thompson_random(n, trial):
    a, b = hermitian(25, n, trial), hermitian(26, n, trial)
    assert golden_thompson_check(a, b).margin >= -1e-9
    assert golden_thompson_trace_gap(a, b) >= -1e-9


def test_trace_commutator_identity():
    x, y, z = (hermitian(27, 5, i) for i in range(3))
    scale = 1 + frobenius(x) * frobenius(y) * frobenius(z)
    assert trace_commutator_residual(x, y, z) <= 1e-10 * scale
