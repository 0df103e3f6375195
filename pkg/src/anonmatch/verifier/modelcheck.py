"""Exhaustive exploration of small instances.

For the matching algorithm every raw configuration is enumerated (each
pointer is null, one of the node's ports, or one garbage value), together
with every legal daemon selection and every outcome of the random draws.

For link naming, registers range over {0, ..., degree+1}: the algorithm
only tests equality and membership in 1..degree, so one out-of-range value
stands for all of them.  ``img(u,a)`` takes the domain of the neighbor's
``link`` register it mirrors, which keeps the domain closed under copying.
Machines start idle; every reachable (register, machine) state is explored.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..linkname import IDLE_MACHINE, R0_WRITE, RA_LINK, RA_REREAD, LinkNameEngine, act, plan_for
from ..matching import MatchingEngine, Rule
from ..registers import RegisterFile
from ..topology import AnonymousGraph
from ..trace import ExecutionTrace, TraceEvent
from .specs import brute_force_maximal_matchings, check_LN, check_M, lex_le, matched_pairs, pointees, potential_of

GARBAGE = 0  # never a port


class StateSpaceTooLarge(RuntimeError):
    pass


@dataclass
class ModelCheckResult:
    algorithm: str
    states: int = 0
    transitions: int = 0
    stable_states: int = 0
    closure_ok: bool = True
    monotone_ok: bool = True
    stable_iff_spec_ok: bool = True
    convergence_ok: bool = True
    bound_ok: bool = True
    longest_path: int | None = None
    bound: int | None = None
    notes: list[str] = field(default_factory=list)
    counterexample: ExecutionTrace | None = None

    @property
    def ok(self) -> bool:
        return (self.closure_ok and self.monotone_ok and self.stable_iff_spec_ok
                and self.convergence_ok and self.bound_ok)

    def summary(self) -> str:
        flags = [
            f"closure={'ok' if self.closure_ok else 'FAIL'}",
            f"monotone={'ok' if self.monotone_ok else 'FAIL'}",
            f"stable<=>spec={'ok' if self.stable_iff_spec_ok else 'FAIL'}",
            f"convergence={'ok' if self.convergence_ok else 'FAIL'}",
        ]
        if self.bound is not None:
            flags.append(f"longest={self.longest_path}/{self.bound} {'ok' if self.bound_ok else 'FAIL'}")
        return f"{self.algorithm}: {self.states} states, {self.transitions} transitions, " + ", ".join(flags)


def _counterexample(g, algorithm, initial, selection, draws, changes, note) -> ExecutionTrace:
    return ExecutionTrace(
        header={"algorithm": algorithm, "graph": g.to_dict(), "initial": initial, "seed": None,
                "policy": "replay", "note": note},
        events=[TraceEvent(0, "A1" if algorithm == "a1" else "A2", selection, draws, changes)],
        outcome={"counterexample": note},
    )


def _outcomes(eng: MatchingEngine, u: int, rule: Rule, targets: list):
    """Every (new value, draw record) the rule can produce at ``u``."""
    links = eng.g.links[u]
    if rule is Rule.MARRIAGE:
        return [(eng._command(u, rule, targets, []), None)]
    if rule is Rule.ABANDONMENT:
        return [(None, None)]
    cands = [i for i, lk in enumerate(links) if targets[lk.neighbor] is None]
    outs = [(None, {"node": u, "coin": 0})]
    for k, i in enumerate(cands):
        outs.append((links[i].port, {"node": u, "coin": 1, "index": k, "pick": links[i].port}))
    return outs


def model_check_a1(g: AnonymousGraph, *, max_states: int = 200_000) -> ModelCheckResult:
    domains = [[None, *g.ports(u), GARBAGE] for u in range(g.n)]
    total = 1
    for d in domains:
        total *= len(d)
    if total > max_states:
        raise StateSpaceTooLarge(f"{total} configurations exceed the cap of {max_states}")
    res = ModelCheckResult("a1")
    maximal = brute_force_maximal_matchings(g)
    realized: set[frozenset] = set()
    succ: dict[tuple, set[tuple]] = {}
    stable: set[tuple] = set()
    eng = MatchingEngine(g, [None] * g.n)
    for config in itertools.product(*domains):
        res.states += 1
        eng.beta = list(config)
        targets = eng.targets()
        enabled = {u: r for u in range(g.n) if (r := eng._rule(u, targets)) is not None}
        p = pointees(g, config)
        f0 = potential_of(g, p)
        spec_ok = check_M(g, config).ok
        matched = {x for pr in matched_pairs(g, config) for x in pr}
        legit = spec_ok and all(p[u] is None for u in range(g.n) if u not in matched)
        if not enabled:
            stable.add(config)
            res.stable_states += 1
            realized.add(frozenset(matched_pairs(g, config)))
            if not spec_ok:
                res.stable_iff_spec_ok = False
                res.notes.append(f"stable configuration {config} violates M")
            if not legit:
                res.stable_iff_spec_ok = False
                res.notes.append(f"stable configuration {config} has a dangling pointer")
            continue
        if legit:
            res.stable_iff_spec_ok = False
            res.notes.append(f"legitimate configuration {config} is not stable: {enabled}")
        nexts = succ.setdefault(config, set())
        nodes = sorted(enabled)
        for r in range(1, len(nodes) + 1):
            for chosen in itertools.combinations(nodes, r):
                options = [_outcomes(eng, u, enabled[u], targets) for u in chosen]
                for combo in itertools.product(*options):
                    new = list(config)
                    for u, (val, _) in zip(chosen, combo):
                        new[u] = val
                    new = tuple(new)
                    res.transitions += 1
                    nexts.add(new)
                    f1 = potential_of(g, pointees(g, new))
                    if not lex_le(f0, f1) and res.monotone_ok:
                        res.monotone_ok = False
                        sel = [(u, enabled[u].value) for u in chosen]
                        draws = [d for _, d in combo if d is not None]
                        changes = [{"var": "beta", "node": u, "old": config[u], "new": val}
                                   for u, (val, _) in zip(chosen, combo)]
                        res.counterexample = _counterexample(
                            g, "a1", {"beta": list(config)}, sel, draws, changes,
                            f"potential {tuple(f0)} -> {tuple(f1)}")
    if realized != maximal:
        res.stable_iff_spec_ok = False
        res.notes.append(f"stable matchings {sorted(map(sorted, realized))} differ from maximal matchings")
    # stable configurations have no successors, so a legitimate one is never left
    res.closure_ok = all(c not in succ for c in stable)
    res.convergence_ok = _all_reach(succ, stable, res)
    return res


def _all_reach(succ: dict, targets: set, res: ModelCheckResult) -> bool:
    """Every state has some path into ``targets``."""
    preds: dict = {}
    for s, nxt in succ.items():
        for t in nxt:
            preds.setdefault(t, []).append(s)
    good = set(targets)
    frontier = list(targets)
    while frontier:
        t = frontier.pop()
        for s in preds.get(t, ()):
            if s not in good:
                good.add(s)
                frontier.append(s)
    stuck = [s for s in succ if s not in good]
    if stuck:
        res.notes.append(f"{len(stuck)} states cannot reach a stable state, e.g. {stuck[0]}")
    return not stuck


def _register_domains(g: AnonymousGraph):
    link_dom = [[range(g.degree(u) + 2)] * g.degree(u) for u in range(g.n)]
    img_dom = [[range(g.degree(lk.neighbor) + 2) for lk in g.links[u]] for u in range(g.n)]
    return link_dom, img_dom


def model_check_a2(g: AnonymousGraph, *, max_states: int = 2_000_000,
                   serialization: str = "ascending") -> ModelCheckResult:
    """Exhaustive check of link naming from every idle register file.

    ``serialization`` fixes how a neighbor's read and an owner's write of the
    same register in one transition are ordered: ``ascending`` follows the
    engine (lower node first), ``both`` explores either order.
    """
    if serialization not in ("ascending", "both"):
        raise ValueError(f"serialization must be 'ascending' or 'both', not {serialization!r}")
    link_dom, img_dom = _register_domains(g)
    flat = [d for u in range(g.n) for d in link_dom[u]] + [d for u in range(g.n) for d in img_dom[u]]
    total = 1
    for d in flat:
        total *= len(d)
    if total > max_states:
        raise StateSpaceTooLarge(f"{total} initial register files exceed the cap of {max_states}")
    res = ModelCheckResult("a2", bound=20 * g.m)
    eng = LinkNameEngine(g, RegisterFile.zeros(g))
    idle = (IDLE_MACHINE,) * g.n

    def regs_of(values):
        link, img, k = [], [], 0
        for u in range(g.n):
            link.append(tuple(values[k:k + g.degree(u)]))
            k += g.degree(u)
        for u in range(g.n):
            img.append(tuple(values[k:k + g.degree(u)]))
            k += g.degree(u)
        return (tuple(link), tuple(img))

    longest: dict[tuple, int] = {}
    best_next: dict[tuple, tuple] = {}
    on_stack: set[tuple] = set()
    initial_states = []
    for values in itertools.product(*flat):
        regs = regs_of(values)
        state = (regs, idle)
        initial_states.append(state)
        rf = RegisterFile.thaw(regs)
        spec_ok = check_LN(g, rf).ok
        eng.restore(state)
        if spec_ok != (not eng.enabled_map()):
            res.stable_iff_spec_ok = False
            res.notes.append(f"idle state {regs}: LN={spec_ok} but stable={not eng.enabled_map()}")

    def successors(state):
        return a2_successors(g, eng, state, serialization)

    for root in initial_states:
        if root in longest:
            continue
        # iterative DFS computing the longest path (in moves) to silence;
        # frames are [state, successor iterator, selection that led here, best]
        stack = [[root, successors(root), None, 0]]
        on_stack.add(root)
        while stack:
            frame = stack[-1]
            state, it = frame[0], frame[1]
            descended = False
            for sel, nxt in it:
                res.transitions += 1
                if nxt in on_stack:
                    res.convergence_ok = False
                    res.notes.append(f"cycle through state {nxt}")
                    continue
                if nxt in longest:
                    cand = longest[nxt] + len(sel)
                    if cand > frame[3]:
                        frame[3], best_next[state] = cand, (sel, nxt)
                    continue
                stack.append([nxt, successors(nxt), sel, 0])
                on_stack.add(nxt)
                descended = True
                break
            if descended:
                continue
            stack.pop()
            on_stack.discard(state)
            longest[state] = frame[3]
            if frame[3] == 0:
                res.stable_states += 1
                if not check_LN(g, RegisterFile.thaw(state[0])).ok:
                    res.stable_iff_spec_ok = False
                    res.notes.append(f"stable state {state[0]} violates LN")
            if stack:
                parent = stack[-1]
                cand = frame[3] + len(frame[2])
                if cand > parent[3]:
                    parent[3], best_next[parent[0]] = cand, (frame[2], state)
    res.states = len(longest)
    worst = max(initial_states, key=lambda s: longest[s])
    res.longest_path = longest[worst]
    res.bound_ok = res.longest_path <= res.bound
    if not res.bound_ok:
        events, s = [], worst
        while s in best_next:
            sel, nxt = best_next[s]
            events.append(TraceEvent(len(events), "A2", sel, [], _register_changes(g, s[0], nxt[0])))
            s = nxt
        res.counterexample = ExecutionTrace(
            header={"algorithm": "a2", "graph": g.to_dict(), "seed": None, "policy": "replay",
                    "initial": RegisterFile.thaw(worst[0]).to_dict()},
            events=events, outcome={"counterexample": f"{res.longest_path} moves > 20m"})
    return res



def _register_changes(g: AnonymousGraph, before: tuple, after: tuple) -> list[dict]:
    out = []
    for var, b_rows, a_rows in zip(("link", "img"), before, after):
        for u, (b_row, a_row) in enumerate(zip(b_rows, a_rows)):
            for i, (old, new) in enumerate(zip(b_row, a_row)):
                if old != new:
                    out.append({"var": var, "node": u, "port": g.links[u][i].port, "old": old, "new": new})
    return out


def a2_successors(g: AnonymousGraph, eng: LinkNameEngine, state: tuple,
                  serialization: str = "ascending") -> list:
    """All ``(selection, successor)`` pairs of a frozen link-naming state.

    Each enabled node's single action is evaluated once against the current
    registers.  Only neighbor ``link`` reads can race with a write in the
    same transition; those reads get a second evaluation against the written
    value, used when the writer goes first (lower node under ``ascending``,
    either way under ``both``).
    """
    regs_t, machines = state
    link_t, img_t = regs_t
    rf = RegisterFile.thaw(regs_t)
    plans = {u: p for u in range(g.n) if (p := plan_for(g, rf, machines[u], u)) is not None}
    nodes = sorted(plans)
    items = {u: (u, eng.label(u, plans[u])) for u in nodes}
    machine = {}
    new_link = {}  # node -> its link row after its own write, if it writes one
    new_img = {}
    after_write = {}
    watches = {}
    for u in nodes:
        m, writes = act(g, rf, machines[u], u, plans[u])
        machine[u] = m
        for w in writes:
            pos = g.position(u, w["port"])
            getattr(rf, w["var"])[u][pos] = w["old"]
            rows, out_map = (link_t, new_link) if w["var"] == "link" else (img_t, new_img)
            row = list(rows[u])
            row[pos] = w["new"]
            out_map[u] = tuple(row)
    for u in nodes:
        phase, pos = plans[u]
        if phase not in (RA_LINK, RA_REREAD):
            continue
        w, j = g.links[u][pos].neighbor, g.mirror_pos[u][pos]
        if plans.get(w) == (R0_WRITE, j):
            old = rf.link[w][j]
            rf.link[w][j] = j + 1
            after_write[u], _ = act(g, rf, machines[u], u, plans[u])
            rf.link[w][j] = old
            watches[u] = w
    out = []
    for r in range(1, len(nodes) + 1):
        for chosen in itertools.combinations(nodes, r):
            links, imgs, machs = list(link_t), list(img_t), list(machines)
            for u in chosen:
                machs[u] = machine[u]
                if u in new_link:
                    links[u] = new_link[u]
                elif u in new_img:
                    imgs[u] = new_img[u]
            regs = (tuple(links), tuple(imgs))
            sel = [items[u] for u in chosen]
            racing = [u for u in chosen if u in watches and watches[u] in chosen] if watches else ()
            if not racing:
                out.append((sel, (regs, tuple(machs))))
                continue
            if serialization == "both":
                orders = itertools.product((False, True), repeat=len(racing))
            else:
                orders = [tuple(watches[u] < u for u in racing)]
            seen = set()
            for late in orders:
                for u, a in zip(racing, late):
                    machs[u] = after_write[u] if a else machine[u]
                succ = (regs, tuple(machs))
                if succ not in seen:
                    seen.add(succ)
                    out.append((sel, succ))
    return out


def model_check(g: AnonymousGraph, algorithm: str, **options) -> ModelCheckResult:
    if algorithm in ("a1", "A1"):
        return model_check_a1(g, **options)
    if algorithm in ("a2", "A2"):
        return model_check_a2(g, **options)
    raise ValueError(f"model checking supports a1 and a2, not {algorithm!r}")
