"""The matching algorithm rewritten over link names, and its composition
with the link-naming layer.

In the rewrite a node stores a link *name* in ``beta``.  ``u`` points
through port ``a`` when ``beta[u] == link(u,a)``; the neighbor across ``a``
points back at ``u`` when ``beta[neighbor] == img(u,a)``.  A stored name
that matches no link, or matches more than one, reads as null.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .daemon import DaemonPolicy
from .execution import RunResult, drive
from .linkname import LinkNameEngine, StepMachine
from .matching import Draws, MatchingEngine, Rule
from .registers import RegisterFile
from .topology import AnonymousGraph
from .trace import TraceEvent


class RewrittenMatchingEngine(MatchingEngine):
    layer = "RA1"

    def __init__(self, g: AnonymousGraph, beta: Sequence, regs: RegisterFile,
                 draws: Draws | random.Random | None = None):
        super().__init__(g, beta, draws)
        self.regs = regs

    def targets(self) -> list:
        out = []
        for u, raw in enumerate(self.beta):
            hit = None
            if type(raw) is int:
                for i, name in enumerate(self.regs.link[u]):
                    if name == raw:
                        if hit is not None:
                            hit = None
                            break
                        hit = i
            out.append(hit)
        return out

    def points_at(self, u, i, targets):
        v = self.g.links[u][i].neighbor
        return targets[v] is not None and self.beta[v] == self.regs.img[u][i]

    def stored_value(self, u, i):
        return self.regs.link[u][i]

    def port_config(self) -> list:
        """The same pointers expressed as ports (for the plain-port checkers)."""
        return [None if t is None else self.g.links[u][t].port for u, t in enumerate(self.targets())]


@dataclass
class ComposedState:
    regs: RegisterFile
    beta: list


class InterleavedEngine:
    """Both layers scheduled together; a node has at most one action per
    transition, its register action listed before its matching rule."""

    layer = "A2+RA1"

    def __init__(self, a2: LinkNameEngine, ra1: RewrittenMatchingEngine):
        self.a2, self.ra1 = a2, ra1

    def enabled_map(self):
        out: dict[int, list[str]] = {}
        for u, acts in self.a2.enabled_map().items():
            out.setdefault(u, []).extend("A2:" + a for a in acts)
        for u, acts in self.ra1.enabled_map().items():
            out.setdefault(u, []).extend("RA1:" + a for a in acts)
        return {u: tuple(v) for u, v in sorted(out.items())}

    def weigh(self, u, action):
        layer, _, act = action.partition(":")
        return (self.a2 if layer == "A2" else self.ra1).weigh(u, act)

    def step(self, selection):
        a2_sel = [(u, a[3:]) for u, a in selection if a.startswith("A2:")]
        ra1_sel = [(u, a[4:]) for u, a in selection if a.startswith("RA1:")]
        # matching rules read the configuration before this transition
        targets = self.ra1.targets()
        pending, draws = [], []
        for u, name in sorted(ra1_sel):
            rule = Rule(name)
            if self.ra1._rule(u, targets) is not rule:
                raise ValueError(f"{name} is not enabled at node {u}")
            pending.append((u, self.ra1._command(u, rule, targets, draws)))
        _, changes = self.a2.step(a2_sel) if a2_sel else ([], [])
        for u, new in pending:
            changes.append({"var": "beta", "node": u, "old": self.ra1.beta[u], "new": new})
            self.ra1.beta[u] = new
        return draws, changes


@dataclass
class ComposedRun:
    events: list[TraceEvent]
    a2: RunResult
    ra1: RunResult
    state: ComposedState


def run_composed(g: AnonymousGraph, state: ComposedState, policy_a2: DaemonPolicy,
                 policy_ra1: DaemonPolicy, draws: Draws | random.Random, *,
                 a2_cap: int, ra1_cap: int, mode: str = "phased", potential=None) -> ComposedRun:
    """Phased mode runs link naming to silence, then the matching layer.

    ``potential`` is called with the matching engine after every matching
    transition, for trace records.
    """
    regs = state.regs
    a2 = LinkNameEngine(g, regs, [StepMachine() for _ in range(g.n)])
    ra1 = RewrittenMatchingEngine(g, state.beta, regs, draws)
    pot = (lambda: potential(ra1)) if potential else None
    events: list[TraceEvent] = []
    if mode == "phased":
        r2 = drive(a2, policy_a2, a2_cap, events)
        if not r2.converged:
            return ComposedRun(events, r2, RunResult(False, 0, 0), ComposedState(regs, ra1.beta))
        r1 = drive(ra1, policy_ra1, ra1_cap, events, pot)
    elif mode == "interleaved":
        both = InterleavedEngine(a2, ra1)
        r = drive(both, policy_ra1, a2_cap + ra1_cap, events, pot)
        a2_moves = sum(1 for e in events for _, a in e.selection if a.startswith("A2:"))
        r2 = RunResult(a2.is_stable(), a2_moves, len(events))
        r1 = RunResult(r.converged, r.moves - a2_moves, r.transitions)
    else:
        raise ValueError(f"unknown composition mode {mode!r}")
    return ComposedRun(events, r2, r1, ComposedState(regs, ra1.beta))
