import random

import pytest

from anonmatch import build_graph, generate
from anonmatch.composed import RewrittenMatchingEngine
from anonmatch.harness import TrialSpec, run_trial
from anonmatch.matching import MatchingEngine, Rule
from anonmatch.registers import RegisterFile
from anonmatch.verifier import check_LN, check_M, matched_pairs, replay_final, translate_names


def canonical(g):
    """Registers as link naming leaves them: names are port ranks."""
    link = [[i + 1 for i in range(g.degree(u))] for u in range(g.n)]
    img = [[link[lk.neighbor][g.mirror_pos[u][i]] for i, lk in enumerate(g.links[u])] for u in range(g.n)]
    return RegisterFile(link, img)


def test_marriage_guard_compares_against_img(k2):
    regs = canonical(k2)
    assert RewrittenMatchingEngine(k2, [None, 1], regs).enabled_rule(0) is Rule.MARRIAGE


def test_unknown_name_reads_as_null(k2):
    eng = RewrittenMatchingEngine(k2, [None, 7], canonical(k2))
    assert eng.enabled_rule(0) is Rule.SEDUCTION
    assert eng.enabled_rule(1) is Rule.SEDUCTION


def test_all_null_matches_port_version():
    g = generate("random_connected", 9, seed=4)
    names = RewrittenMatchingEngine(g, [None] * 9, canonical(g))
    ports = MatchingEngine(g, [None] * 9)
    assert names.enabled_map() == ports.enabled_map()


def test_marriage_stores_link_name_not_port():
    g = build_graph(3, [(0, 1, 4, 1), (0, 2, 9, 1)])
    regs = canonical(g)
    assert regs.link[0] == [1, 2]
    eng = RewrittenMatchingEngine(g, [None, None, 1], regs)
    assert eng.apply_rule(0, Rule.MARRIAGE) == 2


def test_seduction_stores_link_names():
    g = build_graph(3, [(0, 1, 4, 1), (0, 2, 9, 1)])
    eng = RewrittenMatchingEngine(g, [None] * 3, canonical(g), random.Random(0))
    seen = {eng.apply_rule(0, "Seduction") for _ in range(200)}
    assert seen == {None, 1, 2}


def test_abandonment_clears(p3):
    eng = RewrittenMatchingEngine(p3, [1, 2, 1], canonical(p3))
    assert eng.apply_rule(0, Rule.ABANDONMENT) is None


def test_guards_agree_with_port_version_on_named_registers():
    rng = random.Random(23)
    for _ in range(300):
        g = generate("random_connected", rng.randint(2, 9), seed=rng.getrandbits(32), p=0.4)
        link = []
        for u in range(g.n):
            names = list(range(1, g.degree(u) + 1))
            rng.shuffle(names)
            link.append(names)
        img = [[link[lk.neighbor][g.mirror_pos[u][i]] for i, lk in enumerate(g.links[u])]
               for u in range(g.n)]
        regs = RegisterFile(link, img)
        beta = [rng.choice([None, 0, *range(1, g.degree(u) + 2)]) for u in range(g.n)]
        named = RewrittenMatchingEngine(g, beta, regs)
        plain = MatchingEngine(g, translate_names(g, regs, beta))
        assert named.enabled_map() == plain.enabled_map()


@pytest.mark.parametrize("gen, pairs", [
    ("path,n=2", 1),
    ("ring,n=4", 2),
    ("star,n=6", 1),
])
def test_composed_runs_reach_a_maximal_matching(gen, pairs):
    for seed in range(15):
        trace, stats = run_trial(TrialSpec(algorithm="composed", gen=gen, daemon="adversarial", seed=seed))
        assert stats.converged and stats.a2_moves <= 20 * stats.m
        assert stats.final_g == pairs and stats.final_a == 0


def test_final_state_translates_to_valid_matching():
    trace, stats = run_trial(TrialSpec(algorithm="composed", gen="random_connected,n=15", seed=3,
                                       daemon="random_subset"))
    g, named, regs = replay_final(trace)
    beta = translate_names(g, regs, named)
    assert check_M(g, beta).ok and check_LN(g, regs).ok
    assert len(matched_pairs(g, beta)) == stats.final_g


def test_interleaved_mode_runs():
    for seed in range(10):
        _, stats = run_trial(TrialSpec(algorithm="composed", gen="random_connected,n=8", seed=seed,
                                       mode="interleaved", daemon="random_subset"))
        assert stats.converged
