"""Randomized maximal matching under guarded-rule atomicity.

Each node stores one pointer ``beta``: null or the port of the neighbor it
points at.  A neighbor ``v`` across port ``a`` points back at ``u`` when
``beta[v]`` equals the port through which ``v`` reaches ``u``; no node
identity is ever compared.
"""

from __future__ import annotations

import random
from enum import Enum
from typing import Iterable, Sequence

from .topology import AnonymousGraph


class Rule(str, Enum):
    MARRIAGE = "Marriage"
    ABANDONMENT = "Abandonment"
    SEDUCTION = "Seduction"


RULE_ORDER = (Rule.MARRIAGE, Rule.ABANDONMENT, Rule.SEDUCTION)
_BY_NAME = {r.value: r for r in Rule}


class ContractViolation(RuntimeError):
    pass


class Draws:
    """Source of the rule randomness: a fair coin and a uniform pick."""

    def __init__(self, rng: random.Random) -> None:
        self.rng = rng

    def coin(self, node: int) -> int:
        return self.rng.randrange(2)

    def pick(self, node: int, k: int) -> int:
        return self.rng.randrange(k)


class RecordedDraws(Draws):
    """Feeds back the draws stored in a trace, in order."""

    def __init__(self, events: Iterable) -> None:
        self._queue = [d for e in events for d in e.draws]
        self._pos = 0

    def _next(self, node: int) -> dict:
        if self._pos >= len(self._queue):
            raise ContractViolation("recorded draws exhausted")
        d = self._queue[self._pos]
        if d["node"] != node:
            raise ContractViolation(f"recorded draw belongs to node {d['node']}, not {node}")
        return d

    def coin(self, node):
        d = self._next(node)
        if "pick" not in d:
            self._pos += 1
        return d["coin"]

    def pick(self, node, k):
        d = self._next(node)
        self._pos += 1
        return d["index"]


def interpret_beta(g: AnonymousGraph, u: int, raw):
    """A stored value that is not one of ``u``'s ports reads as null."""
    if raw is None or isinstance(raw, bool) or not isinstance(raw, int):
        return None
    return raw if g.link(u, raw) is not None else None


class MatchingEngine:
    layer = "A1"

    def __init__(self, g: AnonymousGraph, beta: Sequence, draws: Draws | random.Random | None = None):
        self.g = g
        self.beta = list(beta)
        if len(self.beta) != g.n:
            raise ValueError(f"beta has {len(self.beta)} entries for {g.n} nodes")
        if draws is None:
            draws = random.Random(0)
        self.draws = draws if isinstance(draws, Draws) else Draws(draws)

    # -- pointer semantics (overridden by the port-free rewrite) ----------

    def targets(self) -> list:
        """Interpreted pointer of every node, as a port position or None."""
        pos = self.g._pos
        return [
            pos[u].get(raw) if type(raw) is int else None
            for u, raw in enumerate(self.beta)
        ]

    def points_at(self, u: int, i: int, targets: list) -> bool:
        lk = self.g.links[u][i]
        t = targets[lk.neighbor]
        return t is not None and self.g.links[lk.neighbor][t].port == lk.mirror

    def stored_value(self, u: int, i: int):
        return self.g.links[u][i].port

    # -- guards and commands ----------------------------------------------

    def _rule(self, u: int, targets: list) -> Rule | None:
        links = self.g.links[u]
        t = targets[u]
        if t is None:
            for i in range(len(links)):
                if self.points_at(u, i, targets):
                    return Rule.MARRIAGE
            for lk in links:
                if targets[lk.neighbor] is None:
                    return Rule.SEDUCTION
            return None
        lk = links[t]
        if targets[lk.neighbor] is not None and not self.points_at(u, t, targets):
            return Rule.ABANDONMENT
        return None

    def enabled_rule(self, u: int) -> Rule | None:
        return self._rule(u, self.targets())

    def enabled_map(self) -> dict[int, tuple[str]]:
        targets = self.targets()
        out = {}
        for u in range(self.g.n):
            r = self._rule(u, targets)
            if r is not None:
                out[u] = (r.value,)
        return out

    def is_stable(self) -> bool:
        return not self.enabled_map()

    @staticmethod
    def weigh(u: int, action: str) -> int:
        # Indecisive nodes always make progress, Single nodes sometimes.
        return {"Marriage": 2, "Seduction": 1}.get(action, 0)

    def _command(self, u: int, rule: Rule, targets: list, draws_out: list):
        links = self.g.links[u]
        if rule is Rule.MARRIAGE:
            i = next(i for i in range(len(links)) if self.points_at(u, i, targets))
            return self.stored_value(u, i)
        if rule is Rule.ABANDONMENT:
            return None
        candidates = [i for i, lk in enumerate(links) if targets[lk.neighbor] is None]
        coin = self.draws.coin(u)
        if coin == 1:
            k = self.draws.pick(u, len(candidates))
            i = candidates[k]
            draws_out.append({"node": u, "coin": 1, "index": k, "pick": links[i].port})
            return self.stored_value(u, i)
        draws_out.append({"node": u, "coin": 0})
        return None

    def apply_rule(self, u: int, rule: Rule | str) -> object:
        """New value of ``beta[u]`` after executing ``rule``; state untouched."""
        rule = _BY_NAME[rule] if isinstance(rule, str) else rule
        targets = self.targets()
        if self._rule(u, targets) is not rule:
            raise ContractViolation(f"{rule.value} is not enabled at node {u}")
        return self._command(u, rule, targets, [])

    def step(self, selection: Sequence[tuple[int, str]]) -> tuple[list[dict], list[dict]]:
        """Execute one transition; returns ``(draws, changes)``.

        All guards and commands read the configuration before the transition;
        writes land simultaneously.
        """
        nodes = [u for u, _ in selection]
        if len(set(nodes)) != len(nodes):
            raise ContractViolation(f"selection schedules a node twice: {selection}")
        targets = self.targets()
        draws: list[dict] = []
        writes = []
        for u, name in sorted(selection):
            rule = _BY_NAME.get(name)
            if rule is None or self._rule(u, targets) is not rule:
                raise ContractViolation(f"{name} is not enabled at node {u}")
            writes.append((u, self._command(u, rule, targets, draws)))
        changes = []
        for u, new in writes:
            old = self.beta[u]
            self.beta[u] = new
            changes.append({"var": "beta", "node": u, "old": old, "new": new})
        return draws, changes


# Functional wrappers -------------------------------------------------------

def enabled_rule(g: AnonymousGraph, beta: Sequence, u: int) -> Rule | None:
    return MatchingEngine(g, beta).enabled_rule(u)


def apply_rule(g: AnonymousGraph, beta: Sequence, u: int, rule, rng: random.Random):
    return MatchingEngine(g, beta, rng).apply_rule(u, rule)


def step(g: AnonymousGraph, beta: Sequence, selection, rng: random.Random) -> list:
    eng = MatchingEngine(g, beta, rng)
    eng.step(selection)
    return eng.beta


def is_stable(g: AnonymousGraph, beta: Sequence) -> bool:
    return MatchingEngine(g, beta).is_stable()
