import dataclasses
import json

import numpy as np
import pytest

from graphscat import harness
from graphscat.harness import CHECKS, TrialSpec, make_trial, oracle_small_scatter, run_suite, tiny_instances
from graphscat.io import dumps_json

SMALL = TrialSpec(n_trials=6, n_range=(3, 9), J_range=(0, 2))


@pytest.fixture(scope="module")
def small_certificate():
    return run_suite(SMALL)


def test_zero_trials_is_vacuous():
    cert = run_suite(dataclasses.replace(SMALL, n_trials=0))
    assert cert.passed and cert.checks == []
    d = json.loads(dumps_json(cert))
    assert d["metadata"]["n_trials"] == 0 and d["metadata"]["pass"] is True


def test_small_run_passes(small_certificate):
    failing = [c.as_dict() for c in small_certificate.checks if not c.passed]
    assert failing == []
    assert set(small_certificate.criteria()) == {f"T{k}" for k in range(1, 16)}


def test_certificate_is_reproducible(small_certificate):
    again = run_suite(SMALL)
    assert dumps_json(again) == dumps_json(small_certificate)


def test_threads_do_not_change_result(small_certificate, monkeypatch):
    monkeypatch.setenv("SCATTER_THREADS", "3")
    assert dumps_json(run_suite(SMALL)) == dumps_json(small_certificate)


def test_zero_tolerance_fails():
    cert = run_suite(dataclasses.replace(SMALL, n_trials=3, tol=0.0, exact_tol=0.0, grid_tol=0.0))
    assert not cert.passed
    assert any(not ok for ok in cert.criteria().values())


def test_exceptions_become_failures(monkeypatch):
    def check_frames(t, spec):
        raise RuntimeError("boom")

    groups = tuple(check_frames if g.__name__ == "check_frames" else g for g in harness.TRIAL_GROUPS)
    monkeypatch.setattr(harness, "TRIAL_GROUPS", groups)
    cert = run_suite(dataclasses.replace(SMALL, n_trials=2))
    bad = [c for c in cert.checks if not c.passed]
    assert bad and {c.id for c in bad} <= {"T2", "T3"}
    assert any("RuntimeError: boom" in note for c in bad for note in c.notes)
    assert all(c.max_violation == float("inf") for c in bad)


def test_trials_are_independent_of_order():
    a = make_trial(SMALL, 4)
    make_trial(SMALL, 0)
    b = make_trial(SMALL, 4)
    np.testing.assert_array_equal(a.graph.adjacency, b.graph.adjacency)
    np.testing.assert_array_equal(a.x, b.x)
    assert (a.J, a.L, a.kind, a.M_kind) == (b.J, b.L, b.kind, b.M_kind)


def test_trial_parameters_in_range():
    for i in range(20):
        t = make_trial(SMALL, i)
        assert SMALL.n_range[0] <= t.graph.n <= SMALL.n_range[1]
        assert SMALL.J_range[0] <= t.J <= SMALL.J_range[1]
        assert SMALL.L_range[0] <= t.L <= SMALL.L_range[1]
        assert t.sys_scat.M.is_diagonal


def test_informational_checks_never_fail(small_certificate):
    info = [c for c in small_certificate.checks if c.informational]
    assert [c.name for c in info] == ["partial_invariance_stepwise"]
    assert all(cid in CHECKS for cid in ("T10.stepwise", "T10.monotone"))


def test_certificate_json_layout(small_certificate):
    d = json.loads(dumps_json(small_certificate))
    assert d["metadata"]["seed"] == 1
    assert "timestamp" not in json.dumps(d)
    for c in d["checks"]:
        assert {"id", "name", "anchor", "trials", "max_violation", "tolerance", "pass"} <= set(c)


def test_tiny_instances_cover_weighted_and_unweighted():
    names = [name for name, _ in tiny_instances()]
    assert {"K2", "P3", "K3"} <= set(names) and len(names) == 6


def test_oracle_agrees_with_hand_value_on_k2(k2):
    # the poly frame on K2 splits [1, 0] into [0.5, -0.5] and [0.5, 0.5]
    out = oracle_small_scatter(k2, 0, 1, np.array([1.0, 0.0]), "poly", "identity", "u0")
    assert out.nonwindowed[()] == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert out.nonwindowed[(0,)] == pytest.approx(1 / np.sqrt(2), abs=1e-15)
