import random
from collections import Counter

import pytest

from anonmatch import build_graph, generate
from anonmatch.daemon import make_policy
from anonmatch.execution import drive
from anonmatch.linkname import LinkNameEngine, guard_R0_holds, is_stable_A2
from anonmatch.registers import OwnershipError, RegisterFile
from anonmatch.verifier import check_LN
from anonmatch.verifier.modelcheck import a2_successors


def run_to_silence(g, regs, policy="synchronous", seed=0):
    eng = LinkNameEngine(g, regs)
    events = []
    res = drive(eng, make_policy(policy, random.Random(seed)), 40 * g.m + 8, events)
    return eng, res, events


def garbage(g, rng, top=None):
    top = top if top is not None else 2 * max(g.degree(u) for u in range(g.n)) + 2
    return RegisterFile(
        [[rng.randint(0, top) for _ in g.ports(u)] for u in range(g.n)],
        [[rng.randint(0, top) for _ in g.ports(u)] for u in range(g.n)],
    )


@pytest.mark.parametrize("links, holds", [
    ([1, 2, 3], False), ([3, 1, 2], False), ([1, 1, 2], True), ([1, 5], True), ([], False),
])
def test_rename_guard(links, holds):
    assert guard_R0_holds(links) is holds


def test_rename_is_canonical():
    g = build_graph(3, [(0, 1), (0, 2)])
    regs = RegisterFile([[7, 7], [1], [1]], [[1, 1], [7], [7]])
    eng, res, events = run_to_silence(g, regs)
    assert regs.link[0] == [1, 2]
    r0 = Counter(a.split("@")[0] for e in events for u, a in e.selection if u == 0)
    assert r0["R0.read"] == 2 and r0["R0.write"] == 2


def test_no_rename_when_names_already_canonical():
    g = build_graph(2, [(0, 1)])
    regs = RegisterFile([[1], [1]], [[1], [1]])
    assert LinkNameEngine(g, regs).enabled_map() == {}


def test_copy_rule_updates_img():
    g = build_graph(2, [(0, 1)])
    regs = RegisterFile([[1], [1]], [[0], [1]])
    eng, res, events = run_to_silence(g, regs)
    assert regs.img[0] == [1]
    assert [a for e in events for _, a in e.selection] == [
        "Ra.read_img@1", "Ra.read_link@1", "Ra.reread_link@1", "Ra.write_img@1"]


def test_copy_rule_aborts_when_names_already_agree():
    # node 1 finishes renaming between node 0's two reads
    g = build_graph(2, [(0, 1)])
    regs = RegisterFile([[1], [5]], [[1], [1]])
    eng = LinkNameEngine(g, regs)
    assert eng.enabled_map()[0] == ("Ra.read_img@1",)
    eng.step([(0, "Ra.read_img@1")])
    eng.step([(1, "R0.read@1")])
    eng.step([(1, "R0.write@1")])
    eng.step([(0, "Ra.read_link@1")])
    assert eng.is_stable() and regs.img[0] == [1]


def test_stability_examples():
    g = build_graph(2, [(0, 1)])
    assert is_stable_A2(g, RegisterFile([[1], [1]], [[1], [1]]))
    assert not is_stable_A2(g, RegisterFile([[1], [1]], [[3], [1]]))


def test_foreign_write_refused():
    g = build_graph(2, [(0, 1)])
    with pytest.raises(OwnershipError):
        RegisterFile.zeros(g).write(1, "img", 0, 0, 5)


@pytest.mark.parametrize("policy", ["synchronous", "random_subset", "random_sequential", "adversarial_greedy"])
def test_move_accounting(policy):
    rng = random.Random(f"moves/{policy}")
    for _ in range(25):
        g = generate("random_connected", rng.randint(2, 14), seed=rng.getrandbits(32), p=0.4)
        regs = garbage(g, rng)
        eng, res, events = run_to_silence(g, regs, policy, rng.getrandbits(32))
        assert res.converged and res.moves <= 20 * g.m
        assert check_LN(g, regs).ok
        actions = [(u, a) for e in events for u, a in e.selection]
        assert sum(a.startswith("R0") for _, a in actions) <= 4 * g.m
        img_writes = Counter((u, a.split("@")[1]) for u, a in actions if a.startswith("Ra.write"))
        assert max(img_writes.values(), default=0) <= 2


def test_successor_enumeration_matches_engine():
    """Every selection's successor from the model checker equals a real step."""
    rng = random.Random(17)
    for _ in range(60):
        g = generate(rng.choice(["path", "ring", "star", "random_connected"]), rng.randint(3, 5),
                     seed=rng.getrandbits(32))
        eng = LinkNameEngine(g, garbage(g, rng, top=3))
        # walk a few random steps so machines are mid-rule
        for _ in range(rng.randint(0, 6)):
            enabled = eng.enabled_map()
            if not enabled:
                break
            eng.step(make_policy("random_subset", rng).select(enabled))
        state = eng.freeze()
        for sel, succ in a2_successors(g, eng, state):
            probe = LinkNameEngine(g, RegisterFile.thaw(state[0]), list(state[1]))
            probe.step(sel)
            assert probe.freeze() == succ, sel


def test_either_serialization_is_explored():
    # node 1 renames while node 0 re-reads the same register
    g = build_graph(2, [(0, 1)])
    eng = LinkNameEngine(g, RegisterFile([[1], [5]], [[3], [1]]))
    eng.step([(0, "Ra.read_img@1")])
    eng.step([(0, "Ra.read_link@1")])
    eng.step([(1, "R0.read@1")])
    state = eng.freeze()
    key = lambda pairs: {(tuple(s), succ) for s, succ in pairs}
    asc = key(a2_successors(g, eng, state))
    both = key(a2_successors(g, eng, state, "both"))
    assert asc < both
    sel = [(0, "Ra.reread_link@1"), (1, "R0.write@1")]
    seen = {succ[1][0].scratch for s, succ in both if s == tuple(sel)}
    assert seen == {(5,), (1,)}
