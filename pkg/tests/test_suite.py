import pytest

from majlab.exceptions import PreconditionError
from majlab.report import Status
from majlab.suite import run_trotter, run_verify, trotter_steps


def test_verify_k3_k4():
    report = run_verify((3, 4), (2, 3), trials=3, seed=7)
    assert report.ok, report.summary()
    expected = {
        "identity_d3",
        "theorem_k3",
        "certificates_k3",
        "trace_equality_k3",
        "sigma_k3",
        "identity_d4",
        "theorem_k4",
        "certificates_k4",
        "sigma_k4",
        "fan_hoffman",
        "golden_thompson",
        "golden_thompson_trace",
        "golden_thompson_commuting",
        "double_commutator",
        "double_commutator_basis",
        "trace_commutator",
    }
    assert set(report.checks) == expected
    assert all(check.trials == 6 for check in report.checks.values())


def test_verify_is_reproducible():
    first = run_verify((3,), (3,), trials=2, seed=3).to_dict()
    second = run_verify((3,), (3,), trials=2, seed=3).to_dict()
    assert first == second


def test_verify_empty_and_errors():
    report = run_verify((3,), (2,), trials=0)
    assert report.checks == {}
    assert report.exit_code == 0
    with pytest.raises(PreconditionError):
        run_verify((6,), (2,), trials=1)


def test_trotter_steps():
    assert trotter_steps(2) == (1, 2)
    assert trotter_steps(16) == (1, 2, 4, 8, 16)
    for nmax in (1, 6):
        with pytest.raises(PreconditionError):
            trotter_steps(nmax)


def test_trotter_generic():
    frame, report = run_trotter(t=1.0, nmax=128, seed=0)
    assert frame["n"].tolist() == [1, 2, 4, 8, 16, 32, 64, 128]
    assert report.ok, report.summary()
    assert report.checks["trotter_ratio"].trials == 4
    assert (frame["ratio"].iloc[4:] <= 0.6).all()


def test_trotter_commuting():
    frame, report = run_trotter(nmax=32, commuting=True)
    assert (frame["error"] < 1e-12).all()
    assert report.checks["trotter_commuting"].status is Status.PASS


def test_trotter_degenerate_sweep():
    frame, report = run_trotter(nmax=2)
    assert len(frame) == 2
    assert report.checks == {}
