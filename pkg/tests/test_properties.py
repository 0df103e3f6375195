import random

from hypothesis import given, settings
from hypothesis import strategies as st

from anonmatch import generate
from anonmatch.matching import MatchingEngine
from anonmatch.topology import relabel_ports
from anonmatch.verifier import NodeClass, classify, k_bound, lex_le, matched_pairs, potential

pots = st.tuples(st.integers(0, 20), st.integers(0, 40))
families = st.sampled_from(["path", "ring", "star", "complete", "random_connected"])


@st.composite
def graphs(draw, max_n=9):
    fam = draw(families)
    n = draw(st.integers(3 if fam == "ring" else 2, max_n))
    g = generate(fam, n, seed=draw(st.integers(0, 2**32)), p=draw(st.floats(0.0, 1.0)))
    if draw(st.booleans()):
        g = relabel_ports(g, random.Random(draw(st.integers(0, 999))))
    return g


@st.composite
def configs(draw, max_n=9):
    g = draw(graphs(max_n))
    beta = [draw(st.sampled_from([None, 0, *g.ports(u), 1000])) for u in range(g.n)]
    return g, beta


@given(pots, pots, pots)
def test_lex_order_is_total(p, q, r):
    assert lex_le(p, p)
    assert lex_le(p, q) or lex_le(q, p)
    if lex_le(p, q) and lex_le(q, p):
        assert p == q
    if lex_le(p, q) and lex_le(q, r):
        assert lex_le(p, r)


@given(configs())
def test_classes_partition_nodes(gb):
    g, beta = gb
    classes = [classify(g, beta, u) for u in range(g.n)]
    assert all(isinstance(c, NodeClass) for c in classes)
    pot = potential(g, beta)
    assert classes.count(NodeClass.IN_GOOD_EDGE) == 2 * pot.good == 2 * len(matched_pairs(g, beta))


@given(graphs(12))
def test_ports_round_trip(g):
    for u in range(g.n):
        assert len(set(g.ports(u))) == g.degree(u)
        for a in g.ports(u):
            v = g.proc(u, a)
            b = g.port_mirror(u, a)
            assert b in g.ports(g.bookkeeping_index(v))
            assert g.bookkeeping_index(g.proc(v, b)) == u


@given(st.integers(1, 200), st.integers(1, 200), st.floats(1e-300, 1.0), st.floats(1e-300, 1.0))
def test_k_bound_monotone(n1, n2, e1, e2):
    (n1, n2), (e1, e2) = sorted((n1, n2)), sorted((e1, e2))
    assert k_bound(n1, e2) <= k_bound(n2, e2)
    assert k_bound(n1, e2) <= k_bound(n1, e1)


@settings(max_examples=150)
@given(configs(), st.integers(0, 2**32), st.randoms(use_true_random=False))
def test_potential_never_decreases(gb, seed, pick):
    g, beta = gb
    eng = MatchingEngine(g, beta, random.Random(seed))
    for _ in range(6):
        enabled = eng.enabled_map()
        if not enabled:
            break
        nodes = sorted(enabled)
        chosen = pick.sample(nodes, pick.randint(1, len(nodes)))
        before = potential(g, eng.beta)
        eng.step([(u, enabled[u][0]) for u in chosen])
        assert lex_le(before, potential(g, eng.beta))
