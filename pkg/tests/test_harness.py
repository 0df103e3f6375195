import csv
import random

import pytest

from anonmatch import generate
from anonmatch.harness import (
    STATS_FIELDS, SweepConfig, TrialError, TrialSpec, inject_faults, run_trial, stream, sweep,
)
from anonmatch.matching import MatchingEngine
from anonmatch.trace import ExecutionTrace
from anonmatch.verifier import NodeClass, classify, potential


def test_k2_synchronous_converges_to_the_edge():
    _, stats = run_trial(TrialSpec(algorithm="a1", gen="path,n=2", daemon="synchronous", seed=1))
    assert stats.converged and (stats.final_g, stats.final_a) == (1, 0)


@pytest.mark.parametrize("algo", ["a1", "a2", "composed"])
def test_same_spec_same_bytes(tmp_path, algo):
    runs = []
    for i in range(2):
        out = tmp_path / f"t{i}.jsonl"
        csv_out = tmp_path / f"s{i}.csv"
        run_trial(TrialSpec(algorithm=algo, gen="random_connected,n=14", daemon="adversarial", seed=99,
                            trace_out=str(out), csv_out=str(csv_out)))
        runs.append((out.read_bytes(), csv_out.read_bytes()))
    assert runs[0] == runs[1]


@pytest.mark.parametrize("algo", ["a1", "a2", "composed"])
def test_replay_reproduces_configuration_sequence(tmp_path, algo):
    out = tmp_path / "orig.jsonl"
    first, s1 = run_trial(TrialSpec(algorithm=algo, gen="random_connected,n=11", daemon="random_subset",
                                    seed=5, trace_out=str(out)))
    again, s2 = run_trial(TrialSpec(algorithm=algo, gen="random_connected,n=11", daemon="replay",
                                    daemon_a2="replay", seed=5, replay=str(out)))
    assert [e.to_record() for e in again.events] == [e.to_record() for e in first.events]
    assert s2.total_moves == s1.total_moves


def test_trace_round_trip(tmp_path):
    trace, _ = run_trial(TrialSpec(algorithm="composed", gen="ring,n=6", seed=2))
    path = tmp_path / "t.jsonl"
    trace.save(path)
    assert ExecutionTrace.load(path).dumps() == trace.dumps()


def test_named_streams_are_independent():
    a, b = stream(1, "daemon"), stream(1, "rules")
    assert [a.random() for _ in range(3)] != [b.random() for _ in range(3)]
    assert stream(1, "daemon").random() == stream(1, "daemon").random()


def test_all_null_faults_leave_everyone_single():
    g = generate("ring", 7)
    beta, _ = inject_faults(g, "all-null", random.Random(0))
    assert tuple(potential(g, beta)) == (0, 0)
    assert all(classify(g, beta, u) is NodeClass.SINGLE for u in range(g.n))


def test_out_of_range_faults_read_as_null():
    g = generate("path", 5)
    beta, _ = inject_faults(g, "random", random.Random(4), domain=60)
    eng = MatchingEngine(g, beta)
    for u, t in enumerate(eng.targets()):
        if beta[u] not in g.ports(u):
            assert t is None


def test_chain_preset_starts_with_abandonment():
    trace, _ = run_trial(TrialSpec(algorithm="a1", gen="path,n=3", faults="preset:chain", daemon="sync"))
    assert trace.events[0].selection == [(2, "Abandonment")]


def test_unknown_fault_mode():
    with pytest.raises(ValueError):
        inject_faults(generate("path", 3), "everything", random.Random(0))


@pytest.mark.parametrize("policy", ["synchronous", "random_subset", "random_sequential", "adversarial_greedy"])
def test_link_naming_bound_per_policy(policy):
    for seed in range(20):
        _, stats = run_trial(TrialSpec(algorithm="a2", gen="random_connected,n=10,p=0.5", daemon=policy,
                                       seed=seed))
        assert stats.converged and stats.total_moves <= 20 * stats.m


def test_monitor_violation_raises_with_trace(monkeypatch):
    from anonmatch import harness
    from anonmatch.verifier import Violation

    monkeypatch.setattr(harness, "monitor_trace", lambda t: [Violation(0, "potential-drop", "forged")])
    with pytest.raises(TrialError) as err:
        run_trial(TrialSpec(gen="path,n=3"))
    assert err.value.kind == "monitor" and err.value.trace is not None


def test_cap_hit_is_reported_not_raised():
    _, stats = run_trial(TrialSpec(gen="ring,n=9", max_moves=2, faults="all-null"))
    assert not stats.converged and not stats.within_bound


def test_sweep_rows_and_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    rows = sweep(SweepConfig(ns=[2, 6], trials=30, policies=["adversarial_greedy", "synchronous"]), out)
    assert [(r["n"], r["policy"]) for r in rows] == [
        (2, "adversarial_greedy"), (2, "synchronous"), (6, "adversarial_greedy"), (6, "synchronous")]
    small = rows[0]
    assert small["bound_4n3_applies"] is False and small["bound_4n3_ok"] is None
    assert rows[2]["k_bound"] == 1372 and rows[2]["bound_4n3_ok"]
    with out.open() as fh:
        assert len(list(csv.DictReader(fh))) == 4


def test_stats_row_fields():
    _, stats = run_trial(TrialSpec(gen="star,n=5"))
    assert list(stats.row()) == STATS_FIELDS
